#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "amreg/alignment_metric.hpp"
#include "amreg/image.hpp"

namespace amreg {

/// Decimation stack; levels[0] is the original image.
struct Pyramid {
  std::vector<GrayImage> levels;

  int depth() const { return static_cast<int>(levels.size()); }
};

/// Largest L with floor(min(template_rows, template_cols) / 2^(L-1)) >= 8,
/// and 1 when the template is smaller than that.
int pyramid_depth(int template_rows, int template_cols);

/// Pyramid of `image` with the depth implied by the template dimensions.
Pyramid build_pyramid(const GrayImage& image, std::pair<int, int> template_dims);

/// Inclusive ranges of template placements (top-left offsets) in the search image.
struct SearchWindow {
  int row_min = 0;
  int row_max = 0;
  int col_min = 0;
  int col_max = 0;

  std::size_t placements() const {
    return static_cast<std::size_t>(row_max - row_min + 1) *
           static_cast<std::size_t>(col_max - col_min + 1);
  }
};

/// Every placement that keeps the template inside the search image.
SearchWindow full_window(GrayView tmpl, GrayView search);

struct AmEntry {
  int dr = 0;
  int dc = 0;
  CiAmScore score;
};

struct SkippedOffset {
  int dr = 0;
  int dc = 0;
  ErrorCode reason = ErrorCode::ZeroVariance;
};

/// Sparse matrix of am values over a window, in row-major offset order.
struct AmMatrix {
  SearchWindow window;
  std::vector<AmEntry> entries;
  std::vector<SkippedOffset> skipped;

  const AmEntry* find(int dr, int dc) const;
  /// Highest am; ties go to the lexicographically smallest (dr, dc).
  const AmEntry* best() const;
};

struct AmMapOptions {
  /// Grey levels are grouped as (level >> bin_shift).
  int bin_shift = 0;
  /// Pixels dropped from every side of the template before comparison.
  int border = 1;
};

AmMatrix am_map(GrayView tmpl, GrayView search, const SearchWindow& window,
                const AmMapOptions& options = {});

struct IntegerShift {
  int dr = 0;
  int dc = 0;
  CiAmScore score;
};

struct CoarseOptions {
  /// Half-width of the refinement box around the doubled coarser peak.
  int refine_radius = 3;
  /// Coarse levels group grey levels so that each bin expects at least
  /// this many template pixels.
  int min_pixels_per_bin = 4;
  int border = 0;
};

struct SearchCounters {
  std::size_t evaluations = 0;  // placements scored (including skipped)
  std::size_t exhaustive = 0;   // placements a full-resolution scan would score
  int levels = 0;
  /// Refinement levels whose peak landed on an unclipped edge of the box,
  /// a hint that the true peak may lie outside it.
  int edge_peaks = 0;
};

/// Grouping shift that gives each grey-level bin at least `min_pixels_per_bin`
/// expected pixels for a template of `pixels` pixels.
int bin_shift_for(std::size_t pixels, int min_pixels_per_bin);

/// Integer placement of `tmpl` inside `search` maximizing am, found by an
/// exhaustive scan at the top pyramid level and constrained refinement below.
IntegerShift coarse_register(const GrayImage& tmpl, const GrayImage& search,
                             const CoarseOptions& options = {},
                             SearchCounters* counters = nullptr);

/// Single-level exhaustive scan with the same grouping rule; the reference
/// answer for coarse_register.
IntegerShift exhaustive_register(const GrayImage& tmpl, const GrayImage& search,
                                 const CoarseOptions& options = {});

}  // namespace amreg
