#include "amreg/pgm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

namespace amreg {

namespace {

// Header tokenizer: whitespace separated, '#' starts a comment to end of line.
class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_])) && bytes_[pos_] != '#') {
      out.push_back(bytes_[pos_++]);
    }
    if (out.empty()) throw Error(ErrorCode::TruncatedData, "PGM header ended early");
    return out;
  }

  long number() {
    const std::string t = token();
    for (char ch : t) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) {
        throw Error(ErrorCode::BadMagic, "malformed PGM header field '" + t + "'");
      }
    }
    if (t.size() > 9) throw Error(ErrorCode::BadMagic, "PGM header field too large");
    return std::stol(t);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size()) throw Error(ErrorCode::TruncatedData, "PGM has no raster");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage decode_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::BadMagic, "not a binary PGM (expected P5)");
  }
  HeaderReader header(bytes);
  header.token();  // magic
  const long cols = header.number();
  const long rows = header.number();
  const long maxval = header.number();
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedMaxval,
                "unsupported PGM maxval " + std::to_string(maxval));
  }
  if (rows < 1 || cols < 1) throw Error(ErrorCode::TooSmall, "PGM has zero size");
  const std::size_t start = header.raster_start();
  const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (bytes.size() < start || bytes.size() - start < count) {
    throw Error(ErrorCode::TruncatedData, "PGM raster shorter than width*height");
  }
  std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(start + count));
  return GrayImage(static_cast<int>(rows), static_cast<int>(cols), std::move(data));
}

GrayImage load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for " + path.string());
  return decode_pgm(bytes);
}

std::string encode_pgm(GrayView image) {
  std::string out = "P5\n" + std::to_string(image.cols) + " " +
                    std::to_string(image.rows) + "\n255\n";
  out.reserve(out.size() + image.pixel_count());
  for (int r = 0; r < image.rows; ++r) {
    const auto* p = reinterpret_cast<const char*>(image.row(r));
    out.append(p, p + image.cols);
  }
  return out;
}

void save_pgm(GrayView image, const std::filesystem::path& path) {
  const std::string bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace amreg
