#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "amreg/image.hpp"

namespace amreg {

/// Statistics of the varying image over the pixels where the constant image
/// holds one grey level.
struct LevelStats {
  int level = 0;
  std::int64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // population
};

enum class Operand { First, Second };

struct ConditionalStats {
  std::vector<LevelStats> levels;  // occupied levels only, ascending
  std::int64_t total = 0;
  Operand grouped_by = Operand::First;

  /// Sum over levels of p(n) * V(n).
  double weighted_variance() const;
};

/// Cross variance and its reciprocal, the alignment metric. ci == 0 is the
/// PERFECT score, which compares above every finite am.
struct CiAmScore {
  double ci = 0.0;

  bool perfect() const noexcept { return ci == 0.0; }
  double am() const noexcept {
    return perfect() ? std::numeric_limits<double>::infinity() : 1.0 / ci;
  }
  /// Strictly better (higher am, i.e. lower ci).
  bool better_than(const CiAmScore& other) const noexcept { return ci < other.ci; }
};

ConditionalStats conditional_stats(GrayView constant, GrayView varying);
ConditionalStats conditional_stats(GrayView constant, RealView varying);

/// Expected conditional variance of `varying` given the grey levels of
/// `constant`. With bin_shift > 0 the constant image is grouped by
/// (level >> bin_shift) instead of by exact level.
double interactive_variance(GrayView constant, GrayView varying, int bin_shift = 0);
double interactive_variance(GrayView constant, RealView varying, int bin_shift = 0);

/// ci = iv(i1, i2) / var(i2) + iv(i2, i1) / var(i1).
/// Throws ZeroVariance when either image is constant.
CiAmScore cross_variance(GrayView i1, GrayView i2, int bin_shift = 0);
CiAmScore alignment_metric(GrayView i1, GrayView i2, int bin_shift = 0);

}  // namespace amreg
