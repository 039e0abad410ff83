#include "amreg/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace amreg {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::UnsupportedMaxval: return "unsupported-maxval";
    case ErrorCode::TruncatedData: return "truncated-data";
    case ErrorCode::IoError: return "io-error";
    case ErrorCode::TooSmall: return "too-small";
    case ErrorCode::OutOfBounds: return "out-of-bounds";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::ZeroVariance: return "zero-variance";
    case ErrorCode::NoValidOffset: return "no-valid-offset";
    case ErrorCode::DegenerateSystem: return "degenerate-system";
    case ErrorCode::ZeroPolynomial: return "zero-polynomial";
    case ErrorCode::TrackMismatch: return "track-mismatch";
    case ErrorCode::TooFewFrames: return "too-few-frames";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

double Histogram::mean() const {
  double acc = 0.0;
  for (int n = 0; n < 256; ++n) acc += static_cast<double>(n) * counts[n];
  return acc / static_cast<double>(total);
}

Histogram histogram(GrayView image) {
  Histogram h;
  for (int r = 0; r < image.rows; ++r) {
    const std::uint8_t* p = image.row(r);
    for (int c = 0; c < image.cols; ++c) ++h.counts[p[c]];
  }
  h.total = static_cast<std::int64_t>(image.pixel_count());
  return h;
}

ImageStats image_stats(GrayView image) {
  // Integer sums are exact for any realistic image size.
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  for (int r = 0; r < image.rows; ++r) {
    const std::uint8_t* p = image.row(r);
    for (int c = 0; c < image.cols; ++c) {
      sum += p[c];
      sum_sq += static_cast<std::int64_t>(p[c]) * p[c];
    }
  }
  const auto n = static_cast<std::int64_t>(image.pixel_count());
  const double nn = static_cast<double>(n);
  return {static_cast<double>(sum) / nn,
          static_cast<double>(sum_sq * n - sum * sum) / (nn * nn)};
}

ImageStats image_stats(RealView image) {
  const double n = static_cast<double>(image.pixel_count());
  double sum = 0.0;
  for (int r = 0; r < image.rows; ++r) {
    const double* p = image.row(r);
    for (int c = 0; c < image.cols; ++c) sum += p[c];
  }
  const double mean = sum / n;
  double sq = 0.0;
  for (int r = 0; r < image.rows; ++r) {
    const double* p = image.row(r);
    for (int c = 0; c < image.cols; ++c) sq += (p[c] - mean) * (p[c] - mean);
  }
  return {mean, sq / n};
}

RealImage to_real(GrayView image) {
  RealImage out(image.rows, image.cols);
  for (int r = 0; r < image.rows; ++r) {
    std::copy_n(image.row(r), image.cols, out.row(r));
  }
  return out;
}

GrayImage quantize(RealView image) {
  GrayImage out(image.rows, image.cols);
  for (int r = 0; r < image.rows; ++r) {
    const double* src = image.row(r);
    std::uint8_t* dst = out.row(r);
    for (int c = 0; c < image.cols; ++c) {
      dst[c] = static_cast<std::uint8_t>(std::clamp(std::round(src[c]), 0.0, 255.0));
    }
  }
  return out;
}

namespace {

template <typename T>
Image<T> downsample_impl(ImageView<T> image) {
  if (image.rows < 2 || image.cols < 2) {
    throw Error(ErrorCode::TooSmall, "downsample needs at least 2x2 pixels");
  }
  Image<T> out((image.rows + 1) / 2, (image.cols + 1) / 2);
  for (int r = 0; r < out.rows(); ++r) {
    const T* src = image.row(2 * r);
    T* dst = out.row(r);
    for (int c = 0; c < out.cols(); ++c) dst[c] = src[2 * c];
  }
  return out;
}

// Index pair and weight of the upper neighbour for a shifted axis.
struct AxisTap {
  std::vector<int> lo;
  std::vector<int> hi;
  double w = 0.0;
};

AxisTap make_taps(int length, double shift) {
  // Sample position for output index i is i - shift.
  const double base = std::floor(-shift);
  AxisTap t;
  t.w = -shift - base;
  t.lo.resize(length);
  t.hi.resize(length);
  const int offset = static_cast<int>(base);
  for (int i = 0; i < length; ++i) {
    t.lo[i] = std::clamp(i + offset, 0, length - 1);
    t.hi[i] = std::clamp(i + offset + 1, 0, length - 1);
  }
  return t;
}

template <typename T>
RealImage shift_impl(ImageView<T> image, RealShift d) {
  const AxisTap rt = make_taps(image.rows, d.dy);
  const AxisTap ct = make_taps(image.cols, d.dx);
  RealImage out(image.rows, image.cols);
  const double wr1 = rt.w, wr0 = 1.0 - rt.w;
  const double wc1 = ct.w, wc0 = 1.0 - ct.w;
  for (int r = 0; r < image.rows; ++r) {
    const T* top = image.row(rt.lo[r]);
    const T* bottom = image.row(rt.hi[r]);
    double* dst = out.row(r);
    for (int c = 0; c < image.cols; ++c) {
      const int c0 = ct.lo[c];
      const int c1 = ct.hi[c];
      dst[c] = wr0 * (wc0 * top[c0] + wc1 * top[c1]) +
               wr1 * (wc0 * bottom[c0] + wc1 * bottom[c1]);
    }
  }
  return out;
}

template <typename T>
double sample_impl(ImageView<T> image, double row, double col) {
  const double r0 = std::floor(row);
  const double c0 = std::floor(col);
  const double wr = row - r0;
  const double wc = col - c0;
  auto at = [&](double r, double c) {
    const int ri = std::clamp(static_cast<int>(r), 0, image.rows - 1);
    const int ci = std::clamp(static_cast<int>(c), 0, image.cols - 1);
    return static_cast<double>(image(ri, ci));
  };
  return (1.0 - wr) * ((1.0 - wc) * at(r0, c0) + wc * at(r0, c0 + 1)) +
         wr * ((1.0 - wc) * at(r0 + 1, c0) + wc * at(r0 + 1, c0 + 1));
}

template <typename T>
Image<T> crop_impl(ImageView<T> image, int top, int left, int height, int width) {
  if (top < 0 || left < 0 || height < 1 || width < 1 ||
      top + height > image.rows || left + width > image.cols) {
    throw Error(ErrorCode::OutOfBounds, "crop rectangle outside image");
  }
  Image<T> out(height, width);
  for (int r = 0; r < height; ++r) {
    std::copy_n(image.row(top + r) + left, width, out.row(r));
  }
  return out;
}

template <typename T>
ImageView<T> interior_impl(ImageView<T> image) {
  if (image.rows < 3 || image.cols < 3) {
    throw Error(ErrorCode::TooSmall, "interior needs at least 3x3 pixels");
  }
  return image.sub(1, 1, image.rows - 2, image.cols - 2);
}

}  // namespace

GrayImage downsample(GrayView image) { return downsample_impl(image); }
RealImage downsample(RealView image) { return downsample_impl(image); }

RealImage shift_bilinear(GrayView image, RealShift d) { return shift_impl(image, d); }
RealImage shift_bilinear(RealView image, RealShift d) { return shift_impl(image, d); }

double sample_bilinear(GrayView image, double row, double col) {
  return sample_impl(image, row, col);
}
double sample_bilinear(RealView image, double row, double col) {
  return sample_impl(image, row, col);
}

GrayImage add_gaussian_noise(GrayView image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  }
  GrayImage out = crop_impl(image, 0, 0, image.rows, image.cols);
  if (sigma == 0.0) return out;

  std::mt19937_64 engine(seed);
  // Uniform on the open interval (0, 1) from the top 53 bits.
  auto uniform = [&engine] {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
  };
  bool have_spare = false;
  double spare = 0.0;
  auto normal = [&] {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare = radius * std::sin(angle);
    have_spare = true;
    return radius * std::cos(angle);
  };
  for (auto& px : out.pixels()) {
    const double v = static_cast<double>(px) + sigma * normal();
    px = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  }
  return out;
}

GrayImage crop(GrayView image, int top, int left, int height, int width) {
  return crop_impl(image, top, left, height, width);
}
RealImage crop(RealView image, int top, int left, int height, int width) {
  return crop_impl(image, top, left, height, width);
}

GrayView interior(GrayView image) { return interior_impl(image); }
RealView interior(RealView image) { return interior_impl(image); }

}  // namespace amreg
