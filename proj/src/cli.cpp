#include "amreg/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "amreg/eval.hpp"
#include "amreg/format.hpp"
#include "amreg/pgm.hpp"
#include "amreg/sequence.hpp"
#include "amreg/subpixel.hpp"

namespace amreg::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitCompute = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic:
    case ErrorCode::UnsupportedMaxval:
    case ErrorCode::TruncatedData:
    case ErrorCode::IoError:
      return kExitIo;
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    default:
      return kExitCompute;
  }
}

void require_file(const std::string& path, const char* flag) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::IoError, std::string(flag) + ": no such file " + path);
  }
}

void require_dir(const std::string& path, const char* flag) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) {
    throw Error(ErrorCode::IoError, std::string(flag) + ": no such directory " + path);
  }
}

void require_writable_parent(const std::string& path, const char* flag) {
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) {
    throw Error(ErrorCode::IoError, std::string(flag) + ": missing directory " + parent.string());
  }
}

bool wants_json(const std::string& path) {
  return fs::path(path).extension() == ".json";
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path);
}

nlohmann::ordered_json am_json(const CiAmScore& s) {
  if (s.perfect()) return "perfect";
  return round6(s.am());
}

std::string am_text(const CiAmScore& s) { return s.perfect() ? "perfect" : fixed6(s.am()); }

AlignMode parse_align_mode(const std::string& name) {
  if (name == "first") return AlignMode::First;
  if (name == "previous") return AlignMode::Previous;
  throw UsageError("--mode must be first or previous");
}

GrayImage base_or_texture(const std::string& path, int size, std::uint64_t seed) {
  if (!path.empty()) return load_pgm(path);
  if (size < 16) throw UsageError("--size must be at least 16");
  return procedural_texture(size, size, seed);
}

struct Knobs {
  int refine_radius = 3;
  int margin = -1;
  int trim = 4;

  void add_to(CLI::App* app) {
    app->add_option("--refine-radius", refine_radius,
                    "Half-width of the per-level refinement box (pixels)")
        ->capture_default_str();
    app->add_option("--margin", margin,
                    "Template border for the integer search; -1 picks min(rows, cols)/8")
        ->capture_default_str();
    app->add_option("--trim", trim, "Pixels trimmed from the aligned overlap")
        ->capture_default_str();
  }

  RegisterOptions options() const {
    RegisterOptions o;
    o.coarse.refine_radius = refine_radius;
    o.search_margin = margin;
    o.overlap_trim = trim;
    return o;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Alignment-metric image registration and sequence stabilization", "amreg"};
  app.require_subcommand(1);

  Knobs knobs;

  // register
  std::string ref_path, mov_path;
  bool as_json = false;
  auto* reg = app.add_subcommand("register", "Register a moving image against a reference");
  reg->add_option("--ref", ref_path, "Reference PGM")->required();
  reg->add_option("--mov", mov_path, "Moving PGM")->required();
  reg->add_flag("--json", as_json, "Print {\"dx\", \"dy\", \"am\"} as JSON");
  knobs.add_to(reg);

  // oracle
  double grid_step = 0.005;
  auto* oracle = app.add_subcommand(
      "oracle", "Grid-search cross-variance minimizer for a pair within one pixel");
  oracle->add_option("--ref", ref_path, "Reference PGM")->required();
  oracle->add_option("--mov", mov_path, "Moving PGM")->required();
  oracle->add_option("--step", grid_step, "Grid step")->capture_default_str();

  // stabilize / restore
  std::string frames_dir, out_dir, track_path, mode_name = "first";
  auto* stab = app.add_subcommand("stabilize", "Align a frame directory and write stabilized frames");
  stab->add_option("--frames", frames_dir, "Directory of numbered PGM frames")->required();
  stab->add_option("--out", out_dir, "Output directory")->required();
  stab->add_option("--mode", mode_name, "Reference: first or previous")->capture_default_str();
  stab->add_option("--track", track_path, "Track file to write (.json or .csv)")->required();
  knobs.add_to(stab);

  auto* rest = app.add_subcommand("restore", "Move stabilized frames back along a track");
  rest->add_option("--frames", frames_dir, "Directory of stabilized PGM frames")->required();
  rest->add_option("--track", track_path, "Track file (.json or .csv)")->required();
  rest->add_option("--out", out_dir, "Output directory")->required();

  // synth
  std::string base_path;
  double dx = 0.0, dy = 0.0, noise = 0.0;
  std::uint64_t seed = 1;
  int size = 256;
  std::string synth_mode = "direct";
  auto* synth = app.add_subcommand("synth", "Write a reference/moving pair with a known shift");
  synth->add_option("--base", base_path, "Base PGM (default: procedural texture)");
  synth->add_option("--size", size, "Procedural texture size when --base is absent")
      ->capture_default_str();
  synth->add_option("--dx", dx, "Horizontal shift (pixels)")->required();
  synth->add_option("--dy", dy, "Vertical shift (pixels)")->required();
  synth->add_option("--noise", noise, "Gaussian noise sigma (grey levels)")->capture_default_str();
  synth->add_option("--seed", seed, "Noise and texture seed")->capture_default_str();
  synth->add_option("--mode", synth_mode, "direct or supersample")->capture_default_str();
  synth->add_option("--out", out_dir, "Output directory")->required();

  // sweep
  std::string out_path;
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int offset = 1;
  auto* sweep = app.add_subcommand("sweep", "Sub-pixel accuracy sweep over a fraction grid");
  sweep->add_option("--base", base_path, "Base PGM (default: procedural texture)");
  sweep->add_option("--size", size, "Procedural texture size when --base is absent");
  sweep->add_option("--seed", seed, "Texture seed")->capture_default_str();
  sweep->add_option("--fractions", fractions, "Comma-separated fractions in [0, 1)")
      ->delimiter(',');
  sweep->add_option("--offset", offset, "Whole-pixel part of every shift")->capture_default_str();
  sweep->add_option("--mode", synth_mode, "direct or supersample")->capture_default_str();
  sweep->add_option("--out", out_path, "CSV (or .json) report path; stdout when absent");
  knobs.add_to(sweep);

  // noise
  std::vector<double> sigmas{0.0, 1.0, 2.0, 3.0};
  int trials = 10;
  auto* noise_cmd = app.add_subcommand("noise", "RMSE of recovered shifts under Gaussian noise");
  noise_cmd->add_option("--base", base_path, "Base PGM (default: procedural texture)");
  noise_cmd->add_option("--size", size, "Procedural texture size when --base is absent");
  noise_cmd->add_option("--seed", seed, "Noise and texture seed")->capture_default_str();
  noise_cmd->add_option("--sigmas", sigmas, "Comma-separated noise sigmas")->delimiter(',');
  noise_cmd->add_option("--trials", trials, "Trials per sigma (>= 5)")->capture_default_str();
  noise_cmd->add_option("--mode", synth_mode, "direct or supersample")->capture_default_str();
  noise_cmd->add_option("--out", out_path, "CSV (or .json) report path; stdout when absent");
  knobs.add_to(noise_cmd);

  // bench
  std::vector<int> sizes{100, 200, 400, 800, 1000};
  int runs = 5;
  auto* bench = app.add_subcommand("bench", "Median full_register time per image size");
  bench->add_option("--sizes", sizes, "Comma-separated square sizes (>= 100)")->delimiter(',');
  bench->add_option("--runs", runs, "Runs per size (>= 5)")->capture_default_str();
  bench->add_option("--seed", seed, "Texture seed")->capture_default_str();
  bench->add_option("--out", out_path, "CSV (or .json) report path; stdout when absent");
  knobs.add_to(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "amreg: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (reg->parsed()) {
      require_file(ref_path, "--ref");
      require_file(mov_path, "--mov");
      const GrayImage ref = load_pgm(ref_path);
      const GrayImage mov = load_pgm(mov_path);
      const RegistrationResult r = full_register(ref, mov, knobs.options());
      if (as_json) {
        nlohmann::ordered_json j;
        j["dx"] = round6(r.total.dx);
        j["dy"] = round6(r.total.dy);
        j["am"] = am_json(r.score);
        out << j.dump() << "\n";
      } else {
        out << "dx " << fixed6(r.total.dx) << "\n"
            << "dy " << fixed6(r.total.dy) << "\n"
            << "am " << am_text(r.score) << "\n"
            << "integer " << fixed6(r.integer_shift.dx) << " " << fixed6(r.integer_shift.dy)
            << "\n"
            << "fractional " << fixed6(r.fractional.x) << " " << fixed6(r.fractional.y) << "\n";
        if (r.fractional.low_texture) out << "flag low-texture\n";
      }
    } else if (oracle->parsed()) {
      require_file(ref_path, "--ref");
      require_file(mov_path, "--mov");
      const GrayImage ref = load_pgm(ref_path);
      const GrayImage mov = load_pgm(mov_path);
      const RealShift d = grid_oracle(mov, ref, grid_step);
      nlohmann::ordered_json j;
      j["dx"] = round6(d.dx);
      j["dy"] = round6(d.dy);
      out << j.dump() << "\n";
    } else if (stab->parsed()) {
      require_dir(frames_dir, "--frames");
      require_writable_parent(track_path, "--track");
      const AlignMode mode = parse_align_mode(mode_name);
      const std::vector<GrayImage> frames = load_frames(frames_dir);
      const TranslationTrack track = align_sequence(frames, mode, knobs.options());
      save_frames(stabilize(frames, track), out_dir);
      save_track(track, track_path);
    } else if (rest->parsed()) {
      require_dir(frames_dir, "--frames");
      require_file(track_path, "--track");
      const std::vector<GrayImage> frames = load_frames(frames_dir);
      const TranslationTrack track = load_track(track_path);
      save_frames(restore(frames, track), out_dir);
    } else if (synth->parsed()) {
      if (!base_path.empty()) require_file(base_path, "--base");
      SynthCase c;
      c.shift = {dx, dy};
      c.sigma = noise;
      c.seed = seed;
      c.mode = parse_synth_mode(synth_mode);
      if (noise < 0.0) throw UsageError("--noise must be non-negative");
      const GrayImage base = base_or_texture(base_path, size, seed);
      const ShiftedPair pair = make_shifted_pair(base, c);
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + out_dir);
      save_pgm(pair.reference, fs::path(out_dir) / "reference.pgm");
      save_pgm(pair.moving, fs::path(out_dir) / "moving.pgm");
      nlohmann::ordered_json truth;
      truth["dx"] = round6(pair.truth.dx);
      truth["dy"] = round6(pair.truth.dy);
      truth["noise"] = round6(noise);
      truth["seed"] = seed;
      truth["mode"] = synth_mode_name(c.mode);
      write_text((fs::path(out_dir) / "truth.json").string(), truth.dump(2) + "\n", out);
    } else if (sweep->parsed()) {
      if (!base_path.empty()) require_file(base_path, "--base");
      if (!out_path.empty()) require_writable_parent(out_path, "--out");
      SweepOptions o;
      o.mode = parse_synth_mode(synth_mode);
      o.integer_offset = offset;
      o.registration = knobs.options();
      const GrayImage base = base_or_texture(base_path, sweep->count("--size") ? size : 396, seed);
      const SweepReport report = accuracy_sweep(base, fractions, o);
      write_text(out_path, wants_json(out_path) ? sweep_to_json(report) : sweep_to_csv(report),
                 out);
    } else if (noise_cmd->parsed()) {
      if (!base_path.empty()) require_file(base_path, "--base");
      if (!out_path.empty()) require_writable_parent(out_path, "--out");
      if (trials < 5) throw UsageError("--trials must be at least 5");
      for (double s : sigmas) {
        if (s < 0.0) throw UsageError("--sigmas must be non-negative");
      }
      NoiseOptions o;
      o.mode = parse_synth_mode(synth_mode);
      o.seed = seed;
      o.registration = knobs.options();
      const GrayImage base = base_or_texture(base_path, noise_cmd->count("--size") ? size : 256, seed);
      const auto rows = noise_sweep(base, sigmas, trials, o);
      write_text(out_path, wants_json(out_path) ? noise_to_json(rows) : noise_to_csv(rows), out);
    } else if (bench->parsed()) {
      if (!out_path.empty()) require_writable_parent(out_path, "--out");
      if (runs < 5) throw UsageError("--runs must be at least 5");
      for (int s : sizes) {
        if (s < 100) throw UsageError("--sizes must be at least 100");
      }
      TimingOptions o;
      o.runs = runs;
      o.seed = seed;
      o.registration = knobs.options();
      const auto rows = timing_bench(sizes, o);
      write_text(out_path, wants_json(out_path) ? timing_to_json(rows) : timing_to_csv(rows), out);
    }
  } catch (const UsageError& e) {
    err << "amreg: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "amreg: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "amreg: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitOk;
}

}  // namespace amreg::cli
