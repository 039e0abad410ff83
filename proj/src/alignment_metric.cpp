#include "amreg/alignment_metric.hpp"

#include <array>

namespace amreg {

namespace {

void require_same_dims(int r1, int c1, int r2, int c2) {
  if (r1 != r2 || c1 != c2) {
    throw Error(ErrorCode::DimensionMismatch, "images must have identical dimensions");
  }
}

void require_bin_shift(int bin_shift) {
  if (bin_shift < 0 || bin_shift > 7) {
    throw Error(ErrorCode::InvalidArgument, "bin shift must lie in [0, 7]");
  }
}

// Exact per-group moments for 8-bit data.
struct IntegerGroups {
  std::array<std::int64_t, 256> count{};
  std::array<std::int64_t, 256> sum{};
  std::array<std::int64_t, 256> sum_sq{};

  void add(int group, std::int64_t v) {
    ++count[group];
    sum[group] += v;
    sum_sq[group] += v * v;
  }

  // N times the interactive variance.
  double scaled_within_variance() const {
    double acc = 0.0;
    for (int n = 0; n < 256; ++n) {
      if (count[n] == 0) continue;
      const std::int64_t numer = sum_sq[n] * count[n] - sum[n] * sum[n];
      acc += static_cast<double>(numer) / static_cast<double>(count[n]);
    }
    return acc;
  }
};

// Two-pass per-group moments for real-valued data.
template <typename T>
ConditionalStats grouped_stats(GrayView constant, ImageView<T> varying, int bin_shift) {
  require_same_dims(constant.rows, constant.cols, varying.rows, varying.cols);
  require_bin_shift(bin_shift);
  std::array<std::int64_t, 256> count{};
  std::array<double, 256> sum{};
  for (int r = 0; r < constant.rows; ++r) {
    const std::uint8_t* c = constant.row(r);
    const T* v = varying.row(r);
    for (int j = 0; j < constant.cols; ++j) {
      const int g = c[j] >> bin_shift;
      ++count[g];
      sum[g] += static_cast<double>(v[j]);
    }
  }
  std::array<double, 256> mean{};
  for (int n = 0; n < 256; ++n) {
    if (count[n] > 0) mean[n] = sum[n] / static_cast<double>(count[n]);
  }
  std::array<double, 256> sq{};
  for (int r = 0; r < constant.rows; ++r) {
    const std::uint8_t* c = constant.row(r);
    const T* v = varying.row(r);
    for (int j = 0; j < constant.cols; ++j) {
      const int g = c[j] >> bin_shift;
      const double dev = static_cast<double>(v[j]) - mean[g];
      sq[g] += dev * dev;
    }
  }
  ConditionalStats out;
  out.total = static_cast<std::int64_t>(constant.pixel_count());
  for (int n = 0; n < 256; ++n) {
    if (count[n] == 0) continue;
    out.levels.push_back({n, count[n], mean[n], sq[n] / static_cast<double>(count[n])});
  }
  return out;
}

}  // namespace

double ConditionalStats::weighted_variance() const {
  double acc = 0.0;
  for (const auto& l : levels) acc += static_cast<double>(l.count) * l.variance;
  return acc / static_cast<double>(total);
}

ConditionalStats conditional_stats(GrayView constant, GrayView varying) {
  return grouped_stats(constant, varying, 0);
}

ConditionalStats conditional_stats(GrayView constant, RealView varying) {
  return grouped_stats(constant, varying, 0);
}

double interactive_variance(GrayView constant, GrayView varying, int bin_shift) {
  require_same_dims(constant.rows, constant.cols, varying.rows, varying.cols);
  require_bin_shift(bin_shift);
  IntegerGroups groups;
  for (int r = 0; r < constant.rows; ++r) {
    const std::uint8_t* c = constant.row(r);
    const std::uint8_t* v = varying.row(r);
    for (int j = 0; j < constant.cols; ++j) groups.add(c[j] >> bin_shift, v[j]);
  }
  return groups.scaled_within_variance() / static_cast<double>(constant.pixel_count());
}

double interactive_variance(GrayView constant, RealView varying, int bin_shift) {
  return grouped_stats(constant, varying, bin_shift).weighted_variance();
}

CiAmScore cross_variance(GrayView i1, GrayView i2, int bin_shift) {
  require_same_dims(i1.rows, i1.cols, i2.rows, i2.cols);
  require_bin_shift(bin_shift);
  // One pass accumulates both grouping directions and the global moments.
  IntegerGroups by_first;   // i2 grouped by i1
  IntegerGroups by_second;  // i1 grouped by i2
  for (int r = 0; r < i1.rows; ++r) {
    const std::uint8_t* a = i1.row(r);
    const std::uint8_t* b = i2.row(r);
    for (int j = 0; j < i1.cols; ++j) {
      by_first.add(a[j] >> bin_shift, b[j]);
      by_second.add(b[j] >> bin_shift, a[j]);
    }
  }
  const auto n = static_cast<std::int64_t>(i1.pixel_count());
  std::int64_t s1 = 0, q1 = 0, s2 = 0, q2 = 0;
  for (int g = 0; g < 256; ++g) {
    s1 += by_second.sum[g];
    q1 += by_second.sum_sq[g];
    s2 += by_first.sum[g];
    q2 += by_first.sum_sq[g];
  }
  // n^2 times each population variance, exact in 64-bit.
  const std::int64_t var1_scaled = q1 * n - s1 * s1;
  const std::int64_t var2_scaled = q2 * n - s2 * s2;
  if (var1_scaled == 0 || var2_scaled == 0) {
    throw Error(ErrorCode::ZeroVariance, "zero-variance input");
  }
  const double nd = static_cast<double>(n);
  const double iv12 = by_first.scaled_within_variance() / nd;
  const double iv21 = by_second.scaled_within_variance() / nd;
  const double var1 = static_cast<double>(var1_scaled) / (nd * nd);
  const double var2 = static_cast<double>(var2_scaled) / (nd * nd);
  return {iv12 / var2 + iv21 / var1};
}

CiAmScore alignment_metric(GrayView i1, GrayView i2, int bin_shift) {
  return cross_variance(i1, i2, bin_shift);
}

}  // namespace amreg
