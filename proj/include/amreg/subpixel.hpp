#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "amreg/alignment_metric.hpp"
#include "amreg/image.hpp"
#include "amreg/polynomial.hpp"
#include "amreg/pyramid_search.hpp"

namespace amreg {

/// Sign pattern of a fractional shift (x horizontal, y vertical):
/// I (+,+), II (-,+), III (-,-), IV (+,-).
enum class Quadrant { I, II, III, IV };

inline constexpr std::array<Quadrant, 4> kQuadrants{Quadrant::I, Quadrant::II, Quadrant::III,
                                                    Quadrant::IV};

Quadrant opposite(Quadrant q);
int sign_x(Quadrant q);
int sign_y(Quadrant q);
const char* quadrant_name(Quadrant q);

/// Interpolated intensity a*u*v + b*u + c*v + d at canonical offsets
/// u, v in [0, 1]; u runs along the quadrant's column sign, v along its row sign.
struct BilinearForm {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double operator()(double u, double v) const { return a * u * v + b * u + c * v + d; }
};

/// Per-pixel bilinear forms for one quadrant, covering every pixel whose
/// quadrant neighbours exist: an (M-1)x(N-1) block of the image.
class BilinearCoeffGrid {
 public:
  BilinearCoeffGrid(Quadrant q, int row0, int col0, int rows, int cols,
                    std::vector<BilinearForm> forms);

  Quadrant quadrant() const { return quadrant_; }
  int row0() const { return row0_; }
  int col0() const { return col0_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool contains(int r, int c) const {
    return r >= row0_ && r < row0_ + rows_ && c >= col0_ && c < col0_ + cols_;
  }
  /// Form at image pixel (r, c).
  const BilinearForm& at(int r, int c) const {
    return forms_[static_cast<std::size_t>(r - row0_) * cols_ + (c - col0_)];
  }

 private:
  Quadrant quadrant_;
  int row0_;
  int col0_;
  int rows_;
  int cols_;
  std::vector<BilinearForm> forms_;
};

BilinearCoeffGrid bilinear_coeff_grid(GrayView image, Quadrant q);

/// Sum over grey levels n of `constant`, and over the interior pixels
/// (outer one-pixel frame excluded) at level n, of (form - level mean form)^2,
/// as a polynomial in the grid's canonical offsets (u, v). Dividing by the
/// interior pixel count gives the interactive variance of the interpolated
/// raster grouped by `constant`.
PolyXY centered_objective(GrayView constant, const BilinearCoeffGrid& grid);

/// CI(u, v) = f / (mn * sigma2sq) + g / (mn * sigma1sq).
PolyXY ci_poly(const PolyXY& f, const PolyXY& g, double sigma1sq, double sigma2sq, double mn);

/// Gradient of a PolyXY written as
///   alpha . (x y^2, x y, y^2, y, x, 1) = 0
///   beta  . (x^2 y, x y, x^2, x, y, 1) = 0
struct DerivativeSystem {
  std::array<double, 6> alpha{};
  std::array<double, 6> beta{};

  double row_x(double x, double y) const;
  double row_y(double x, double y) const;
  /// Residual of each row relative to the sum of its term magnitudes.
  double relative_residual(double x, double y) const;
};

DerivativeSystem derivative_system(const PolyXY& ci);

/// Elimination of x: x = -(alpha3 y^2 + alpha4 y + alpha6) / (alpha1 y^2 + alpha2 y + alpha5),
/// substituted into the second row and multiplied by the squared denominator.
struct QuinticReduction {
  QuinticPoly quintic;
  std::array<double, 3> numerator{};    // alpha3, alpha4, alpha6
  std::array<double, 3> denominator{};  // alpha1, alpha2, alpha5

  double denominator_at(double y) const;
  double x_at(double y) const;
};

/// Throws DegenerateSystem when the denominator or both rows vanish identically.
QuinticReduction reduce_to_quintic(const DerivativeSystem& sys);

struct StationaryPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Real stationary points of the system: roots of the quintic whose
/// denominator is not (numerically) zero and whose residual is below 1e-8.
std::vector<StationaryPoint> stationary_points(const DerivativeSystem& sys);

struct FractionalShift {
  double x = 0.0;
  double y = 0.0;
  CiAmScore score;
  bool low_texture = false;

  RealShift as_shift() const { return {x, y}; }
};

struct SubpixelCandidate {
  double x = 0.0;
  double y = 0.0;
  std::optional<Quadrant> quadrant;  // empty for the (0, 0) fallback
  std::string origin;                // "interior", "edge" or "origin"
  CiAmScore score;
};

struct SubpixelOptions {
  /// Canonical roots must satisfy band < u, v < 1 - band.
  double acceptance_band = 1e-6;
  /// Either interior variance below this returns (0, 0) flagged low-texture.
  double low_texture_variance = 1.0;
  /// Also minimize along the quadrant edges u = 0 and v = 0.
  bool edge_candidates = true;
};

/// Diagnostics of one subpixel solve.
struct SubpixelTrace {
  std::vector<SubpixelCandidate> candidates;
  std::vector<std::string> notes;
};

/// CI of the model at shift d, computed on explicitly interpolated rasters:
/// i2 sampled at p - d grouped by i1, and i1 sampled at p + d grouped by i2,
/// over the interior, normalized by the unshifted interior variances.
CiAmScore model_cross_variance(GrayView i1, GrayView i2, RealShift d);

/// The CI polynomial of one quadrant configuration in canonical (u, v):
/// i1 interpolated in quadrant q, i2 in the opposite quadrant.
PolyXY quadrant_ci_poly(GrayView i1, GrayView i2, Quadrant q);

/// quadrant_ci_poly for every quadrant, indexed in kQuadrants order.
std::array<PolyXY, 4> quadrant_ci_polys(GrayView i1, GrayView i2);

/// Fractional displacement d of i1's content relative to i2
/// (i1 ~ shift_bilinear(i2, d)), with |x|, |y| < 1, chosen as the candidate
/// of highest am among all quadrant stationary points and the origin.
FractionalShift subpixel_register(GrayView i1, GrayView i2, const SubpixelOptions& options = {},
                                  SubpixelTrace* trace = nullptr);

struct RegisterOptions {
  CoarseOptions coarse;
  SubpixelOptions subpixel;
  /// Template border cut from the moving image for the integer search;
  /// negative selects max(4, min(rows, cols) / 8).
  int search_margin = -1;
  /// Pixels trimmed from each side of the integer-aligned common region.
  int overlap_trim = 4;
};

struct RegistrationResult {
  IntegerShift integer;  // placement of the moving template in the reference
  RealShift integer_shift;
  FractionalShift fractional;
  RealShift total;
  CiAmScore score;
  std::size_t am_evaluations = 0;
};

/// Translation of `moving` relative to `reference`: shifting `moving` by
/// -total aligns it to `reference` (moving ~ shift_bilinear(reference, total)).
RegistrationResult full_register(const GrayImage& reference, const GrayImage& moving,
                                 const RegisterOptions& options = {});

}  // namespace amreg
