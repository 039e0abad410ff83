#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "amreg/image.hpp"

namespace testing {

inline amreg::GrayImage random_image(int rows, int cols, std::uint64_t seed, int lo = 0,
                                     int hi = 255) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(lo, hi);
  amreg::GrayImage img(rows, cols);
  for (auto& px : img.pixels()) px = static_cast<std::uint8_t>(dist(rng));
  return img;
}

inline amreg::GrayImage make_gray(int rows, int cols, std::vector<int> values) {
  amreg::GrayImage img(rows, cols);
  for (std::size_t i = 0; i < values.size(); ++i) {
    img.pixels()[i] = static_cast<std::uint8_t>(values[i]);
  }
  return img;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// Naive interactive variance: explicit per-level lists and population variance.
template <typename Varying>
double naive_iv(const amreg::GrayImage& constant, Varying&& varying_at) {
  std::map<int, std::vector<double>> groups;
  for (int r = 0; r < constant.rows(); ++r) {
    for (int c = 0; c < constant.cols(); ++c) groups[constant(r, c)].push_back(varying_at(r, c));
  }
  double acc = 0.0;
  for (const auto& [level, values] : groups) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    for (double v : values) acc += (v - mean) * (v - mean);
  }
  return acc / static_cast<double>(constant.size());
}

inline double naive_variance(const amreg::GrayImage& img) {
  double mean = 0.0;
  for (auto px : img.pixels()) mean += px;
  mean /= static_cast<double>(img.size());
  double acc = 0.0;
  for (auto px : img.pixels()) acc += (px - mean) * (px - mean);
  return acc / static_cast<double>(img.size());
}

inline double naive_ci(const amreg::GrayImage& a, const amreg::GrayImage& b) {
  const double iv_ab = naive_iv(a, [&](int r, int c) { return double(b(r, c)); });
  const double iv_ba = naive_iv(b, [&](int r, int c) { return double(a(r, c)); });
  return iv_ab / naive_variance(b) + iv_ba / naive_variance(a);
}

// Bilinear sample with edge clamping at continuous (row, col).
inline double naive_sample(const amreg::GrayImage& img, double row, double col) {
  const int r0 = static_cast<int>(std::floor(row));
  const int c0 = static_cast<int>(std::floor(col));
  const double fr = row - r0;
  const double fc = col - c0;
  auto at = [&](int r, int c) {
    r = std::clamp(r, 0, img.rows() - 1);
    c = std::clamp(c, 0, img.cols() - 1);
    return static_cast<double>(img(r, c));
  };
  return (1 - fr) * (1 - fc) * at(r0, c0) + (1 - fr) * fc * at(r0, c0 + 1) +
         fr * (1 - fc) * at(r0 + 1, c0) + fr * fc * at(r0 + 1, c0 + 1);
}

// Symmetric CI on the interior with i2 sampled at p - d and i1 at p + d.
inline double naive_model_ci(const amreg::GrayImage& i1, const amreg::GrayImage& i2, double dx,
                             double dy) {
  const amreg::GrayImage c1 = amreg::crop(i1, 1, 1, i1.rows() - 2, i1.cols() - 2);
  const amreg::GrayImage c2 = amreg::crop(i2, 1, 1, i2.rows() - 2, i2.cols() - 2);
  const double f = naive_iv(c1, [&](int r, int c) { return naive_sample(i2, r + 1 - dy, c + 1 - dx); });
  const double g = naive_iv(c2, [&](int r, int c) { return naive_sample(i1, r + 1 + dy, c + 1 + dx); });
  return f / naive_variance(c2) + g / naive_variance(c1);
}

}  // namespace testing
