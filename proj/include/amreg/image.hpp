#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amreg {

enum class ErrorCode {
  BadMagic,
  UnsupportedMaxval,
  TruncatedData,
  IoError,
  TooSmall,
  OutOfBounds,
  DimensionMismatch,
  ZeroVariance,
  NoValidOffset,
  DegenerateSystem,
  ZeroPolynomial,
  TrackMismatch,
  TooFewFrames,
  LengthMismatch,
  InvalidArgument,
};

/// Short kebab-case name used in diagnostics and track flags.
const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Non-owning read-only window into a row-major raster.
template <typename T>
struct ImageView {
  const T* data = nullptr;
  int rows = 0;
  int cols = 0;
  std::ptrdiff_t stride = 0;

  const T* row(int r) const { return data + r * stride; }
  T operator()(int r, int c) const { return data[r * stride + c]; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  /// Sub-window; the caller guarantees it lies inside this view.
  ImageView sub(int top, int left, int height, int width) const {
    return {data + top * stride + left, height, width, stride};
  }
};

/// Owning row-major raster. Dimensions are always at least 1x1.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
  }

  Image(int rows, int cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims(rows, cols);
    if (data_.size() != static_cast<std::size_t>(rows) * cols) {
      throw Error(ErrorCode::DimensionMismatch,
                  "pixel buffer does not match image dimensions");
    }
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }

  T* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const T* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  ImageView<T> view() const { return {data_.data(), rows_, cols_, cols_}; }
  operator ImageView<T>() const { return view(); }

  bool operator==(const Image&) const = default;

 private:
  static void check_dims(int rows, int cols) {
    if (rows < 1 || cols < 1) {
      throw Error(ErrorCode::TooSmall, "image dimensions must be at least 1x1");
    }
  }
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_;
  int cols_;
  std::vector<T> data_;
};

using GrayImage = Image<std::uint8_t>;
using RealImage = Image<double>;
using GrayView = ImageView<std::uint8_t>;
using RealView = ImageView<double>;

/// Translation in pixels. Positive dx moves content toward larger column
/// indices, positive dy toward larger row indices.
struct RealShift {
  double dx = 0.0;
  double dy = 0.0;

  friend RealShift operator+(RealShift a, RealShift b) {
    return {a.dx + b.dx, a.dy + b.dy};
  }
  friend RealShift operator-(RealShift a, RealShift b) {
    return {a.dx - b.dx, a.dy - b.dy};
  }
  RealShift operator-() const { return {-dx, -dy}; }
  bool operator==(const RealShift&) const = default;
};

struct ImageStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

struct Histogram {
  std::vector<std::int64_t> counts = std::vector<std::int64_t>(256, 0);
  std::int64_t total = 0;

  double probability(int level) const {
    return static_cast<double>(counts[level]) / static_cast<double>(total);
  }
  double mean() const;
};

Histogram histogram(GrayView image);
ImageStats image_stats(GrayView image);
ImageStats image_stats(RealView image);

RealImage to_real(GrayView image);
/// Rounds to nearest (halves away from zero) and clamps to [0, 255].
GrayImage quantize(RealView image);

/// Keeps pixels at even row and column indices; no prefiltering.
GrayImage downsample(GrayView image);
RealImage downsample(RealView image);

/// Output(i, j) samples the input at (i - dy, j - dx) with bilinear weights,
/// clamping out-of-range samples to the nearest edge pixel.
RealImage shift_bilinear(GrayView image, RealShift d);
RealImage shift_bilinear(RealView image, RealShift d);

/// Bilinear sample at a continuous (row, col) coordinate with edge clamping.
double sample_bilinear(GrayView image, double row, double col);
double sample_bilinear(RealView image, double row, double col);

/// Adds i.i.d. N(0, sigma^2) noise, rounds and clamps. Uses mt19937_64 with
/// a Box-Muller transform so results are identical across platforms.
GrayImage add_gaussian_noise(GrayView image, double sigma, std::uint64_t seed);

GrayImage crop(GrayView image, int top, int left, int height, int width);
RealImage crop(RealView image, int top, int left, int height, int width);

/// The image without its outermost one-pixel frame.
GrayView interior(GrayView image);
RealView interior(RealView image);

}  // namespace amreg
