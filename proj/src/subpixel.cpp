#include "amreg/subpixel.hpp"

#include <algorithm>
#include <cmath>

namespace amreg {

Quadrant opposite(Quadrant q) {
  switch (q) {
    case Quadrant::I: return Quadrant::III;
    case Quadrant::II: return Quadrant::IV;
    case Quadrant::III: return Quadrant::I;
    case Quadrant::IV: return Quadrant::II;
  }
  return q;
}

int sign_x(Quadrant q) { return (q == Quadrant::I || q == Quadrant::IV) ? 1 : -1; }
int sign_y(Quadrant q) { return (q == Quadrant::I || q == Quadrant::II) ? 1 : -1; }

const char* quadrant_name(Quadrant q) {
  switch (q) {
    case Quadrant::I: return "I";
    case Quadrant::II: return "II";
    case Quadrant::III: return "III";
    case Quadrant::IV: return "IV";
  }
  return "?";
}

BilinearCoeffGrid::BilinearCoeffGrid(Quadrant q, int row0, int col0, int rows, int cols,
                                     std::vector<BilinearForm> forms)
    : quadrant_(q), row0_(row0), col0_(col0), rows_(rows), cols_(cols), forms_(std::move(forms)) {
  if (forms_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient grid size mismatch");
  }
}

namespace {

BilinearForm form_at(GrayView image, int sx, int sy, int r, int c) {
  const std::uint8_t* here = image.row(r);
  const std::uint8_t* next = image.row(r + sy);
  const double p00 = here[c];
  const double p01 = here[c + sx];  // along u
  const double p10 = next[c];       // along v
  const double p11 = next[c + sx];
  return {p11 - p01 - p10 + p00, p01 - p00, p10 - p00, p00};
}

}  // namespace

BilinearCoeffGrid bilinear_coeff_grid(GrayView image, Quadrant q) {
  if (image.rows < 2 || image.cols < 2) {
    throw Error(ErrorCode::TooSmall, "bilinear grid needs at least 2x2 pixels");
  }
  const int sx = sign_x(q);
  const int sy = sign_y(q);
  const int row0 = sy > 0 ? 0 : 1;
  const int col0 = sx > 0 ? 0 : 1;
  const int rows = image.rows - 1;
  const int cols = image.cols - 1;
  std::vector<BilinearForm> forms;
  forms.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = row0; r < row0 + rows; ++r) {
    for (int c = col0; c < col0 + cols; ++c) forms.push_back(form_at(image, sx, sy, r, c));
  }
  return BilinearCoeffGrid(q, row0, col0, rows, cols, std::move(forms));
}

namespace {

PolyXY scatter_to_poly(const std::array<std::array<double, 4>, 4>& s) {
  PolyXY p;
  p.coeff(2, 2) = s[0][0];
  p.coeff(2, 1) = 2.0 * s[0][1];
  p.coeff(1, 2) = 2.0 * s[0][2];
  p.coeff(1, 1) = 2.0 * (s[0][3] + s[1][2]);
  p.coeff(2, 0) = s[1][1];
  p.coeff(1, 0) = 2.0 * s[1][3];
  p.coeff(0, 2) = s[2][2];
  p.coeff(0, 1) = 2.0 * s[2][3];
  p.coeff(0, 0) = s[3][3];
  return p;
}

// Scatter of the level-centered coefficient vectors (a', b', c', d') over the
// interior, expanded over the monomials (uv, u, v, 1).
template <typename FormSource>
PolyXY centered_objective_impl(GrayView constant, FormSource&& forms) {
  const int r_end = constant.rows - 1;
  const int c_end = constant.cols - 1;

  std::array<std::int64_t, 256> count{};
  std::array<std::array<double, 4>, 256> mean{};
  for (int r = 1; r < r_end; ++r) {
    const std::uint8_t* level = constant.row(r);
    for (int c = 1; c < c_end; ++c) {
      const BilinearForm f = forms(r, c);
      auto& s = mean[level[c]];
      ++count[level[c]];
      s[0] += f.a;
      s[1] += f.b;
      s[2] += f.c;
      s[3] += f.d;
    }
  }
  for (int n = 0; n < 256; ++n) {
    if (count[n] == 0) continue;
    for (double& v : mean[n]) v /= static_cast<double>(count[n]);
  }

  std::array<std::array<double, 4>, 4> s{};
  for (int r = 1; r < r_end; ++r) {
    const std::uint8_t* level = constant.row(r);
    for (int c = 1; c < c_end; ++c) {
      const BilinearForm f = forms(r, c);
      const auto& m = mean[level[c]];
      const std::array<double, 4> w{f.a - m[0], f.b - m[1], f.c - m[2], f.d - m[3]};
      for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) s[i][j] += w[i] * w[j];
      }
    }
  }

  return scatter_to_poly(s);
}

void require_interior(GrayView constant) {
  if (constant.rows < 3 || constant.cols < 3) {
    throw Error(ErrorCode::TooSmall, "objective needs at least 3x3 pixels");
  }
}

}  // namespace

PolyXY centered_objective(GrayView constant, const BilinearCoeffGrid& grid) {
  require_interior(constant);
  if (!grid.contains(1, 1) || !grid.contains(constant.rows - 2, constant.cols - 2)) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient grid does not cover the interior");
  }
  return centered_objective_impl(constant, [&grid](int r, int c) { return grid.at(r, c); });
}

PolyXY ci_poly(const PolyXY& f, const PolyXY& g, double sigma1sq, double sigma2sq, double mn) {
  if (!(sigma1sq > 0.0) || !(sigma2sq > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "zero-variance input");
  }
  if (!(mn > 0.0)) throw Error(ErrorCode::InvalidArgument, "pixel count must be positive");
  return f * (1.0 / (mn * sigma2sq)) + g * (1.0 / (mn * sigma1sq));
}

double DerivativeSystem::row_x(double x, double y) const {
  const auto& a = alpha;
  return a[0] * x * y * y + a[1] * x * y + a[2] * y * y + a[3] * y + a[4] * x + a[5];
}

double DerivativeSystem::row_y(double x, double y) const {
  const auto& b = beta;
  return b[0] * x * x * y + b[1] * x * y + b[2] * x * x + b[3] * x + b[4] * y + b[5];
}

double DerivativeSystem::relative_residual(double x, double y) const {
  const auto& a = alpha;
  const auto& b = beta;
  const double ax = std::abs(x), ay = std::abs(y);
  const double scale_x = std::abs(a[0]) * ax * ay * ay + std::abs(a[1]) * ax * ay +
                         std::abs(a[2]) * ay * ay + std::abs(a[3]) * ay +
                         std::abs(a[4]) * ax + std::abs(a[5]);
  const double scale_y = std::abs(b[0]) * ax * ax * ay + std::abs(b[1]) * ax * ay +
                         std::abs(b[2]) * ax * ax + std::abs(b[3]) * ax +
                         std::abs(b[4]) * ay + std::abs(b[5]);
  const double rx = scale_x > 0.0 ? std::abs(row_x(x, y)) / scale_x : 0.0;
  const double ry = scale_y > 0.0 ? std::abs(row_y(x, y)) / scale_y : 0.0;
  return std::max(rx, ry);
}

DerivativeSystem derivative_system(const PolyXY& ci) {
  auto c = [&](int i, int j) { return ci.coeff(i, j); };
  DerivativeSystem s;
  s.alpha = {2.0 * c(2, 2), 2.0 * c(2, 1), c(1, 2), c(1, 1), 2.0 * c(2, 0), c(1, 0)};
  s.beta = {2.0 * c(2, 2), 2.0 * c(1, 2), c(2, 1), c(1, 1), 2.0 * c(0, 2), c(0, 1)};
  return s;
}

namespace {

// Dense univariate polynomials, lowest degree first.
using Coeffs = std::vector<double>;

Coeffs multiply(const Coeffs& p, const Coeffs& q) {
  Coeffs out(p.size() + q.size() - 1, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < q.size(); ++j) out[i + j] += p[i] * q[j];
  }
  return out;
}

void accumulate(Coeffs& into, const Coeffs& p, double s) {
  if (into.size() < p.size()) into.resize(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) into[i] += s * p[i];
}

double max_abs(const std::array<double, 6>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double QuinticReduction::denominator_at(double y) const {
  return (denominator[0] * y + denominator[1]) * y + denominator[2];
}

double QuinticReduction::x_at(double y) const {
  return -((numerator[0] * y + numerator[1]) * y + numerator[2]) / denominator_at(y);
}

QuinticReduction reduce_to_quintic(const DerivativeSystem& sys) {
  const auto& a = sys.alpha;
  const auto& b = sys.beta;
  const double scale = std::max(max_abs(a), max_abs(b));
  if (scale == 0.0) throw Error(ErrorCode::DegenerateSystem, "both stationarity rows vanish");
  QuinticReduction red;
  red.numerator = {a[2], a[3], a[5]};
  red.denominator = {a[0], a[1], a[4]};
  if (std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[4])}) <= 1e-14 * scale) {
    throw Error(ErrorCode::DegenerateSystem, "x coefficient of the first row vanishes");
  }

  // Row two as x^2 (b1 y + b3) + x (b2 y + b4) + (b5 y + b6); with x = -P/Q,
  // multiplying by Q^2 gives P^2 (b1 y + b3) - P Q (b2 y + b4) + Q^2 (b5 y + b6).
  const Coeffs p{a[5], a[3], a[2]};
  const Coeffs q{a[4], a[1], a[0]};
  Coeffs sum;
  accumulate(sum, multiply(multiply(p, p), {b[2], b[0]}), 1.0);
  accumulate(sum, multiply(multiply(p, q), {b[3], b[1]}), -1.0);
  accumulate(sum, multiply(multiply(q, q), {b[5], b[4]}), 1.0);
  sum.resize(6, 0.0);
  for (int k = 0; k < 6; ++k) red.quintic.a[k] = sum[5 - k];
  return red;
}

std::vector<StationaryPoint> stationary_points(const DerivativeSystem& sys) {
  const QuinticReduction red = reduce_to_quintic(sys);
  const double alpha_scale = max_abs(sys.alpha);
  const double quintic_scale = red.quintic.max_abs_coeff();
  const double sys_scale = std::max(alpha_scale, max_abs(sys.beta));
  if (quintic_scale <= 1e-14 * sys_scale * sys_scale * sys_scale) {
    throw Error(ErrorCode::DegenerateSystem, "eliminated quintic vanishes identically");
  }
  std::vector<StationaryPoint> out;
  for (double y : solve_quintic(red.quintic)) {
    if (std::abs(red.denominator_at(y)) < 1e-12 * alpha_scale) continue;
    const double x = red.x_at(y);
    if (!std::isfinite(x)) continue;
    if (sys.relative_residual(x, y) >= 1e-8) continue;
    out.push_back({x, y});
  }
  return out;
}

CiAmScore model_cross_variance(GrayView i1, GrayView i2, RealShift d) {
  if (i1.rows != i2.rows || i1.cols != i2.cols) {
    throw Error(ErrorCode::DimensionMismatch, "images must have identical dimensions");
  }
  const GrayView c1 = interior(i1);
  const GrayView c2 = interior(i2);
  const double var1 = image_stats(c1).variance;
  const double var2 = image_stats(c2).variance;
  if (var1 == 0.0 || var2 == 0.0) throw Error(ErrorCode::ZeroVariance, "zero-variance input");
  const RealImage i2_moved = shift_bilinear(i2, d);   // i2 sampled at p - d
  const RealImage i1_moved = shift_bilinear(i1, -d);  // i1 sampled at p + d
  return {interactive_variance(c1, interior(i2_moved.view())) / var2 +
          interactive_variance(c2, interior(i1_moved.view())) / var1};
}

namespace {

// Centered objectives for all four quadrant configurations of `varying`,
// grouped by `constant`, in one sweep; entry k belongs to kQuadrants[k].
// Forms of 8-bit images are integral, so per-level moments are exact.
std::array<PolyXY, 4> quadrant_objectives(GrayView constant, GrayView varying) {
  __extension__ using Wide = __int128;
  struct LevelMoments {
    std::int64_t sum[4][4];
    std::int64_t prod[4][10];
  };
  constexpr int kPairs[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1},
                                 {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}};
  const int r_end = constant.rows - 1;
  const int c_end = constant.cols - 1;

  std::array<std::int64_t, 256> count{};
  std::vector<LevelMoments> moments(256, LevelMoments{});
  for (int r = 1; r < r_end; ++r) {
    const std::uint8_t* level = constant.row(r);
    const std::uint8_t* up = varying.row(r - 1);
    const std::uint8_t* mid = varying.row(r);
    const std::uint8_t* down = varying.row(r + 1);
    for (int c = 1; c < c_end; ++c) {
      const std::int64_t p00 = mid[c];
      LevelMoments& m = moments[level[c]];
      ++count[level[c]];
      for (int k = 0; k < 4; ++k) {
        const int sx = sign_x(kQuadrants[k]);
        const std::uint8_t* next = sign_y(kQuadrants[k]) > 0 ? down : up;
        const std::int64_t p01 = mid[c + sx];
        const std::int64_t p10 = next[c];
        const std::int64_t p11 = next[c + sx];
        const std::int64_t w[4] = {p11 - p01 - p10 + p00, p01 - p00, p10 - p00, p00};
        for (int i = 0; i < 4; ++i) m.sum[k][i] += w[i];
        for (int t = 0; t < 10; ++t) m.prod[k][t] += w[kPairs[t][0]] * w[kPairs[t][1]];
      }
    }
  }

  std::array<std::array<std::array<double, 4>, 4>, 4> s{};
  for (int n = 0; n < 256; ++n) {
    if (count[n] == 0) continue;
    const LevelMoments& m = moments[n];
    for (int k = 0; k < 4; ++k) {
      for (int t = 0; t < 10; ++t) {
        const int i = kPairs[t][0];
        const int j = kPairs[t][1];
        const Wide centered = static_cast<Wide>(count[n]) * m.prod[k][t] -
                                  static_cast<Wide>(m.sum[k][i]) * m.sum[k][j];
        s[k][i][j] += static_cast<double>(centered) / static_cast<double>(count[n]);
      }
    }
  }

  std::array<PolyXY, 4> out;
  for (int k = 0; k < 4; ++k) out[k] = scatter_to_poly(s[k]);
  return out;
}

int quadrant_index(Quadrant q) { return static_cast<int>(q); }

}  // namespace

std::array<PolyXY, 4> quadrant_ci_polys(GrayView i1, GrayView i2) {
  if (i1.rows != i2.rows || i1.cols != i2.cols) {
    throw Error(ErrorCode::DimensionMismatch, "images must have identical dimensions");
  }
  require_interior(i1);
  const GrayView c1 = interior(i1);
  const GrayView c2 = interior(i2);
  const double var1 = image_stats(c1).variance;
  const double var2 = image_stats(c2).variance;
  const double mn = static_cast<double>(c1.pixel_count());
  const std::array<PolyXY, 4> f = quadrant_objectives(i1, i2);
  const std::array<PolyXY, 4> g = quadrant_objectives(i2, i1);
  std::array<PolyXY, 4> out;
  for (Quadrant q : kQuadrants) {
    out[quadrant_index(q)] =
        ci_poly(f[quadrant_index(opposite(q))], g[quadrant_index(q)], var1, var2, mn);
  }
  return out;
}

PolyXY quadrant_ci_poly(GrayView i1, GrayView i2, Quadrant q) {
  return quadrant_ci_polys(i1, i2)[quadrant_index(q)];
}

namespace {

// Stationary points in canonical coordinates; falls back to eliminating y
// when eliminating x is degenerate.
std::vector<StationaryPoint> canonical_stationary_points(const PolyXY& ci,
                                                         std::vector<std::string>& notes,
                                                         Quadrant q) {
  try {
    return stationary_points(derivative_system(ci));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSystem) throw;
    notes.push_back(std::string("quadrant ") + quadrant_name(q) + ": " + e.what() +
                    "; eliminating y instead");
  }
  try {
    std::vector<StationaryPoint> pts = stationary_points(derivative_system(ci.transposed()));
    for (auto& p : pts) std::swap(p.x, p.y);
    return pts;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSystem) throw;
    notes.push_back(std::string("quadrant ") + quadrant_name(q) + ": " + e.what());
  }
  return {};
}

// Minimizer of c0 + c1 t + c2 t^2, when it is a proper minimum.
std::optional<double> edge_minimum(double c1, double c2) {
  if (!(c2 > 0.0)) return std::nullopt;
  return -c1 / (2.0 * c2);
}

}  // namespace

FractionalShift subpixel_register(GrayView i1, GrayView i2, const SubpixelOptions& options,
                                  SubpixelTrace* trace) {
  if (i1.rows != i2.rows || i1.cols != i2.cols) {
    throw Error(ErrorCode::DimensionMismatch, "images must have identical dimensions");
  }
  if (i1.rows < 4 || i1.cols < 4) {
    throw Error(ErrorCode::TooSmall, "subpixel registration needs at least 4x4 pixels");
  }
  const double var1 = image_stats(interior(i1)).variance;
  const double var2 = image_stats(interior(i2)).variance;
  if (var1 == 0.0 || var2 == 0.0) throw Error(ErrorCode::ZeroVariance, "zero-variance input");

  SubpixelTrace local;
  if (var1 < options.low_texture_variance || var2 < options.low_texture_variance) {
    FractionalShift out;
    out.low_texture = true;
    out.score = cross_variance(interior(i1), interior(i2));
    local.notes.push_back("low texture; returning zero shift");
    if (trace != nullptr) *trace = std::move(local);
    return out;
  }

  const double lo = options.acceptance_band;
  const double hi = 1.0 - options.acceptance_band;
  auto inside = [&](double t) { return t > lo && t < hi; };

  const std::array<PolyXY, 4> polys = quadrant_ci_polys(i1, i2);
  for (Quadrant q : kQuadrants) {
    const int sx = sign_x(q);
    const int sy = sign_y(q);
    const PolyXY& ci = polys[static_cast<int>(q)];
    for (const auto& p : canonical_stationary_points(ci, local.notes, q)) {
      if (inside(p.x) && inside(p.y)) {
        local.candidates.push_back({sx * p.x, sy * p.y, q, "interior", {}});
      } else if (std::abs(p.x - lo) < 1e-3 || std::abs(p.y - lo) < 1e-3 ||
                 std::abs(p.x - hi) < 1e-3 || std::abs(p.y - hi) < 1e-3) {
        local.notes.push_back(std::string("quadrant ") + quadrant_name(q) +
                              ": stationary point near the band boundary discarded");
      }
    }
    if (options.edge_candidates) {
      // Along v = 0 the objective is c00 + c10 u + c20 u^2, and symmetrically for u = 0.
      if (auto u = edge_minimum(ci.coeff(1, 0), ci.coeff(2, 0)); u && inside(*u)) {
        local.candidates.push_back({sx * *u, 0.0, q, "edge", {}});
      }
      if (auto v = edge_minimum(ci.coeff(0, 1), ci.coeff(0, 2)); v && inside(*v)) {
        local.candidates.push_back({0.0, sy * *v, q, "edge", {}});
      }
    }
  }
  local.candidates.push_back({0.0, 0.0, std::nullopt, "origin", {}});

  // Adjacent quadrants share their edges, so edge minima usually repeat.
  std::vector<SubpixelCandidate> unique;
  for (auto& c : local.candidates) {
    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const SubpixelCandidate& u) {
      return std::abs(u.x - c.x) < 1e-9 && std::abs(u.y - c.y) < 1e-9;
    });
    if (!seen) unique.push_back(std::move(c));
  }
  local.candidates = std::move(unique);

  // Within its quadrant the polynomial is the model CI itself, so candidates
  // are scored without resampling.
  const SubpixelCandidate* best = nullptr;
  for (auto& c : local.candidates) {
    const PolyXY& ci = polys[static_cast<int>(c.quadrant.value_or(Quadrant::I))];
    c.score = {std::max(0.0, ci(std::abs(c.x), std::abs(c.y)))};
    if (best == nullptr || c.score.better_than(best->score)) best = &c;
  }
  FractionalShift out{best->x, best->y, best->score, false};
  if (trace != nullptr) *trace = std::move(local);
  return out;
}

RegistrationResult full_register(const GrayImage& reference, const GrayImage& moving,
                                 const RegisterOptions& options) {
  if (image_stats(reference).variance == 0.0 || image_stats(moving).variance == 0.0) {
    throw Error(ErrorCode::ZeroVariance, "zero-variance input");
  }
  const int min_dim = std::min(moving.rows(), moving.cols());
  const int margin = options.search_margin >= 0 ? options.search_margin
                                                : std::max(4, min_dim / 8);
  const int trows = moving.rows() - 2 * margin;
  const int tcols = moving.cols() - 2 * margin;
  if (trows < 8 || tcols < 8) {
    throw Error(ErrorCode::TooSmall, "moving image too small for the search margin");
  }
  if (trows > reference.rows() || tcols > reference.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "reference smaller than the moving template");
  }
  const GrayImage tmpl = crop(moving, margin, margin, trows, tcols);

  RegistrationResult result;
  SearchCounters counters;
  result.integer = coarse_register(tmpl, reference, options.coarse, &counters);
  result.am_evaluations = counters.evaluations;

  // moving(p) ~ reference(p - t)
  const int t_row = margin - result.integer.dr;
  const int t_col = margin - result.integer.dc;
  result.integer_shift = {static_cast<double>(t_col), static_cast<double>(t_row)};

  const int trim = std::max(0, options.overlap_trim);
  const int row_lo = std::max(0, t_row) + trim;
  const int row_hi = std::min(moving.rows(), reference.rows() + t_row) - trim;
  const int col_lo = std::max(0, t_col) + trim;
  const int col_hi = std::min(moving.cols(), reference.cols() + t_col) - trim;
  if (row_hi - row_lo < 8 || col_hi - col_lo < 8) {
    throw Error(ErrorCode::TooSmall, "common region after integer alignment is too small");
  }
  const GrayImage mov_crop = crop(moving, row_lo, col_lo, row_hi - row_lo, col_hi - col_lo);
  const GrayImage ref_crop =
      crop(reference, row_lo - t_row, col_lo - t_col, row_hi - row_lo, col_hi - col_lo);

  result.fractional = subpixel_register(mov_crop, ref_crop, options.subpixel);
  result.total = result.integer_shift + result.fractional.as_shift();
  result.score = result.fractional.score;
  return result;
}

}  // namespace amreg
