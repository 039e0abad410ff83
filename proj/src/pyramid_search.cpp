#include "amreg/pyramid_search.hpp"

#include <algorithm>

namespace amreg {

int pyramid_depth(int template_rows, int template_cols) {
  const int m = std::min(template_rows, template_cols);
  int depth = 1;
  while ((m >> depth) >= 8) ++depth;
  return depth;
}

Pyramid build_pyramid(const GrayImage& image, std::pair<int, int> template_dims) {
  const auto [trows, tcols] = template_dims;
  if (trows < 2 || tcols < 2) {
    throw Error(ErrorCode::TooSmall, "template must be at least 2x2");
  }
  if (trows > image.rows() || tcols > image.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "template larger than image");
  }
  const int depth = pyramid_depth(trows, tcols);
  Pyramid p;
  p.levels.reserve(depth);
  p.levels.push_back(image);
  for (int k = 1; k < depth; ++k) p.levels.push_back(downsample(p.levels.back()));
  return p;
}

SearchWindow full_window(GrayView tmpl, GrayView search) {
  if (tmpl.rows > search.rows || tmpl.cols > search.cols) {
    throw Error(ErrorCode::DimensionMismatch, "template larger than search image");
  }
  return {0, search.rows - tmpl.rows, 0, search.cols - tmpl.cols};
}

const AmEntry* AmMatrix::find(int dr, int dc) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{dr, dc},
                             [](const AmEntry& e, const std::pair<int, int>& key) {
                               return std::pair{e.dr, e.dc} < key;
                             });
  if (it == entries.end() || it->dr != dr || it->dc != dc) return nullptr;
  return &*it;
}

const AmEntry* AmMatrix::best() const {
  const AmEntry* top = nullptr;
  // Entries are stored in lexicographic order, so strict comparison keeps
  // the smallest offset among ties.
  for (const auto& e : entries) {
    if (top == nullptr || e.score.better_than(top->score)) top = &e;
  }
  return top;
}

AmMatrix am_map(GrayView tmpl, GrayView search, const SearchWindow& window,
                const AmMapOptions& options) {
  const SearchWindow valid = full_window(tmpl, search);
  if (window.row_min > window.row_max || window.col_min > window.col_max ||
      window.row_min < valid.row_min || window.row_max > valid.row_max ||
      window.col_min < valid.col_min || window.col_max > valid.col_max) {
    throw Error(ErrorCode::OutOfBounds, "search window outside valid placements");
  }
  const int b = options.border;
  if (b < 0 || tmpl.rows <= 2 * b || tmpl.cols <= 2 * b) {
    throw Error(ErrorCode::TooSmall, "template too small for the comparison border");
  }
  const int h = tmpl.rows - 2 * b;
  const int w = tmpl.cols - 2 * b;
  const GrayView core = tmpl.sub(b, b, h, w);

  AmMatrix out;
  out.window = window;
  out.entries.reserve(window.placements());
  for (int dr = window.row_min; dr <= window.row_max; ++dr) {
    for (int dc = window.col_min; dc <= window.col_max; ++dc) {
      try {
        const CiAmScore s = cross_variance(core, search.sub(dr + b, dc + b, h, w),
                                           options.bin_shift);
        out.entries.push_back({dr, dc, s});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVariance) throw;
        out.skipped.push_back({dr, dc, e.code()});
      }
    }
  }
  return out;
}

int bin_shift_for(std::size_t pixels, int min_pixels_per_bin) {
  for (int s = 0; s < 7; ++s) {
    const std::size_t bins = 256u >> s;
    if (pixels >= bins * static_cast<std::size_t>(std::max(1, min_pixels_per_bin))) return s;
  }
  return 7;
}

namespace {

AmMapOptions level_options(GrayView tmpl, const CoarseOptions& options) {
  AmMapOptions o;
  o.border = options.border;
  const std::size_t core = static_cast<std::size_t>(tmpl.rows - 2 * options.border) *
                           static_cast<std::size_t>(tmpl.cols - 2 * options.border);
  o.bin_shift = bin_shift_for(core, options.min_pixels_per_bin);
  return o;
}

IntegerShift pick(const AmMatrix& m) {
  const AmEntry* top = m.best();
  if (top == nullptr) {
    throw Error(ErrorCode::NoValidOffset, "every search offset has zero variance");
  }
  return {top->dr, top->dc, top->score};
}

}  // namespace

IntegerShift coarse_register(const GrayImage& tmpl, const GrayImage& search,
                             const CoarseOptions& options, SearchCounters* counters) {
  if (options.refine_radius < 0) {
    throw Error(ErrorCode::InvalidArgument, "refine radius must be non-negative");
  }
  const Pyramid tp = build_pyramid(tmpl, {tmpl.rows(), tmpl.cols()});
  const Pyramid sp = build_pyramid(search, {tmpl.rows(), tmpl.cols()});
  const int top = tp.depth() - 1;

  SearchCounters local;
  local.levels = tp.depth();
  local.exhaustive = full_window(tmpl, search).placements();

  const SearchWindow top_window = full_window(tp.levels[top], sp.levels[top]);
  local.evaluations += top_window.placements();
  IntegerShift peak = pick(am_map(tp.levels[top], sp.levels[top], top_window,
                                  level_options(tp.levels[top], options)));

  for (int k = top - 1; k >= 0; --k) {
    const GrayImage& t = tp.levels[k];
    const GrayImage& s = sp.levels[k];
    const SearchWindow valid = full_window(t, s);
    const int r = options.refine_radius;
    const int cr = std::clamp(2 * peak.dr, valid.row_min, valid.row_max);
    const int cc = std::clamp(2 * peak.dc, valid.col_min, valid.col_max);
    const SearchWindow window{std::max(valid.row_min, cr - r), std::min(valid.row_max, cr + r),
                              std::max(valid.col_min, cc - r), std::min(valid.col_max, cc + r)};
    local.evaluations += window.placements();
    peak = pick(am_map(t, s, window, level_options(t, options)));
    if ((peak.dr == cr - r && window.row_min > valid.row_min) ||
        (peak.dr == cr + r && window.row_max < valid.row_max) ||
        (peak.dc == cc - r && window.col_min > valid.col_min) ||
        (peak.dc == cc + r && window.col_max < valid.col_max)) {
      ++local.edge_peaks;
    }
  }
  if (counters != nullptr) *counters = local;
  return peak;
}

IntegerShift exhaustive_register(const GrayImage& tmpl, const GrayImage& search,
                                 const CoarseOptions& options) {
  return pick(am_map(tmpl, search, full_window(tmpl, search), level_options(tmpl, options)));
}

}  // namespace amreg
