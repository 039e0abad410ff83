#include "amreg/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "amreg/format.hpp"
#include "amreg/pgm.hpp"

namespace amreg {

std::vector<double> TranslationTrack::dx() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.shift.dx);
  return out;
}

std::vector<double> TranslationTrack::dy() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.shift.dy);
  return out;
}

TranslationTrack align_sequence(std::span<const GrayImage> frames, AlignMode mode,
                                const RegisterOptions& options) {
  if (frames.size() < 2) throw Error(ErrorCode::TooFewFrames, "need at least two frames");
  for (const auto& f : frames) {
    if (f.rows() != frames[0].rows() || f.cols() != frames[0].cols()) {
      throw Error(ErrorCode::DimensionMismatch, "frames differ in size");
    }
  }
  TranslationTrack track;
  track.entries.push_back({0, {0.0, 0.0}, CiAmScore{0.0}, std::nullopt});
  for (std::size_t t = 1; t < frames.size(); ++t) {
    const RealShift before = track.entries.back().shift;
    TrackEntry entry{static_cast<int>(t), before, CiAmScore{}, std::nullopt};
    const GrayImage& ref = mode == AlignMode::First ? frames[0] : frames[t - 1];
    try {
      const RegistrationResult r = full_register(ref, frames[t], options);
      entry.shift = mode == AlignMode::First ? r.total : before + r.total;
      entry.score = r.score;
      if (r.fractional.low_texture) entry.flag = "low-texture";
    } catch (const Error& e) {
      entry.score = CiAmScore{std::numeric_limits<double>::infinity()};
      entry.flag = error_name(e.code());
    }
    track.entries.push_back(std::move(entry));
  }
  return track;
}

namespace {

std::vector<GrayImage> apply_track(std::span<const GrayImage> frames,
                                   const TranslationTrack& track, double sign) {
  if (track.entries.size() != frames.size()) {
    throw Error(ErrorCode::TrackMismatch, "track length differs from frame count");
  }
  std::vector<GrayImage> out;
  out.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const RealShift s = track.entries[t].shift;
    out.push_back(quantize(shift_bilinear(frames[t], {sign * s.dx, sign * s.dy})));
  }
  return out;
}

double population_variance(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size());
}

}  // namespace

std::vector<GrayImage> stabilize(std::span<const GrayImage> frames, const TranslationTrack& track) {
  return apply_track(frames, track, -1.0);
}

std::vector<GrayImage> restore(std::span<const GrayImage> frames, const TranslationTrack& track) {
  return apply_track(frames, track, 1.0);
}

JitterReport jitter_variance(std::span<const double> dx, std::span<const double> dy) {
  if (dx.size() != dy.size()) throw Error(ErrorCode::LengthMismatch, "dx and dy lengths differ");
  if (dx.size() < 2) throw Error(ErrorCode::TooFewFrames, "jitter needs at least two entries");
  return {population_variance(dx), population_variance(dy)};
}

JitterReport jitter_variance(const TranslationTrack& track) {
  const auto dx = track.dx();
  const auto dy = track.dy();
  return jitter_variance(dx, dy);
}

std::vector<double> offset_series(std::span<const Point2> points, std::span<const Point2> truth) {
  if (points.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "point and truth series differ in length");
  }
  std::vector<double> out;
  out.reserve(points.size());
  for (std::size_t t = 0; t < points.size(); ++t) {
    out.push_back(std::hypot(points[t].x - truth[t].x, points[t].y - truth[t].y));
  }
  return out;
}

double interior_psnr(GrayView a, GrayView b, int margin) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw Error(ErrorCode::DimensionMismatch, "images must have identical dimensions");
  }
  if (margin < 0 || a.rows <= 2 * margin || a.cols <= 2 * margin) {
    throw Error(ErrorCode::TooSmall, "margin leaves no interior");
  }
  double sq = 0.0;
  std::size_t n = 0;
  for (int r = margin; r < a.rows - margin; ++r) {
    for (int c = margin; c < a.cols - margin; ++c) {
      const double d = static_cast<double>(a(r, c)) - static_cast<double>(b(r, c));
      sq += d * d;
      ++n;
    }
  }
  if (sq == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / (sq / static_cast<double>(n)));
}

std::string track_to_json(const TranslationTrack& track) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : track.entries) {
    nlohmann::ordered_json j;
    j["frame"] = e.frame;
    j["dx"] = round6(e.shift.dx);
    j["dy"] = round6(e.shift.dy);
    if (e.score.perfect()) {
      j["am"] = "perfect";
    } else if (std::isfinite(e.score.ci)) {
      j["am"] = round6(e.score.am());
    } else {
      j["am"] = nullptr;
    }
    j["flag"] = e.flag ? nlohmann::ordered_json(*e.flag) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string track_to_csv(const TranslationTrack& track) {
  std::string out = "frame,dx,dy,am,flag\n";
  for (const auto& e : track.entries) {
    out += std::to_string(e.frame) + "," + fixed6(e.shift.dx) + "," + fixed6(e.shift.dy) + ",";
    if (e.score.perfect()) {
      out += "perfect";
    } else if (std::isfinite(e.score.ci)) {
      out += fixed6(e.score.am());
    }
    out += ",";
    if (e.flag) out += *e.flag;
    out += "\n";
  }
  return out;
}

namespace {

CiAmScore score_from_am(double am) {
  if (am <= 0.0) return CiAmScore{std::numeric_limits<double>::infinity()};
  return CiAmScore{1.0 / am};
}

void check_track(const TranslationTrack& track) {
  for (std::size_t t = 0; t < track.entries.size(); ++t) {
    if (track.entries[t].frame != static_cast<int>(t)) {
      throw Error(ErrorCode::TrackMismatch, "track frame indices must run 0, 1, 2, ...");
    }
  }
}

}  // namespace

TranslationTrack track_from_json(const std::string& text) {
  TranslationTrack track;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw Error(ErrorCode::TrackMismatch, "track JSON must be an array");
    for (const auto& j : arr) {
      TrackEntry e;
      e.frame = j.at("frame").get<int>();
      e.shift = {j.at("dx").get<double>(), j.at("dy").get<double>()};
      const auto& am = j.at("am");
      if (am.is_string()) {
        if (am.get<std::string>() != "perfect") {
          throw Error(ErrorCode::TrackMismatch, "am must be a number or \"perfect\"");
        }
        e.score = CiAmScore{0.0};
      } else if (am.is_number()) {
        e.score = score_from_am(am.get<double>());
      } else {
        e.score = CiAmScore{std::numeric_limits<double>::infinity()};
      }
      if (j.contains("flag") && j.at("flag").is_string()) e.flag = j.at("flag").get<std::string>();
      track.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TrackMismatch, std::string("malformed track JSON: ") + e.what());
  }
  check_track(track);
  return track;
}

TranslationTrack track_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame,dx,dy,am,flag", 0) != 0) {
    throw Error(ErrorCode::TrackMismatch, "track CSV header must be frame,dx,dy,am,flag");
  }
  TranslationTrack track;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 5) throw Error(ErrorCode::TrackMismatch, "track CSV row needs 5 cells");
    TrackEntry e;
    try {
      e.frame = std::stoi(cells[0]);
      e.shift = {std::stod(cells[1]), std::stod(cells[2])};
      if (cells[3] == "perfect") {
        e.score = CiAmScore{0.0};
      } else if (cells[3].empty()) {
        e.score = CiAmScore{std::numeric_limits<double>::infinity()};
      } else {
        e.score = score_from_am(std::stod(cells[3]));
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::TrackMismatch, "malformed number in track CSV");
    }
    if (!cells[4].empty()) e.flag = cells[4];
    track.entries.push_back(std::move(e));
  }
  check_track(track);
  return track;
}

namespace {

bool is_csv(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv";
}

}  // namespace

void save_track(const TranslationTrack& track, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << (is_csv(path) ? track_to_csv(track) : track_to_json(track));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

TranslationTrack load_track(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return is_csv(path) ? track_from_csv(ss.str()) : track_from_json(ss.str());
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.pgm", index);
  return buf;
}

std::vector<GrayImage> load_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  }
  std::vector<std::pair<long long, std::filesystem::path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
    const std::string stem = entry.path().stem().string();
    std::string digits;
    for (char ch : stem) {
      if (std::isdigit(static_cast<unsigned char>(ch))) digits.push_back(ch);
    }
    const long long n = digits.empty() ? -1 : std::stoll(digits.substr(0, 18));
    files.emplace_back(n, entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<GrayImage> frames;
  frames.reserve(files.size());
  for (const auto& [n, path] : files) frames.push_back(load_pgm(path));
  return frames;
}

void save_frames(std::span<const GrayImage> frames, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    save_pgm(frames[t], dir / frame_filename(static_cast<int>(t)));
  }
}

}  // namespace amreg
