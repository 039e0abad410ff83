#pragma once

#include <array>
#include <vector>

namespace amreg {

/// Bivariate polynomial sum c[i][j] x^i y^j with 0 <= i, j <= 2.
class PolyXY {
 public:
  PolyXY() = default;
  explicit PolyXY(const std::array<std::array<double, 3>, 3>& coeffs) : c_(coeffs) {}

  double& coeff(int i, int j) { return c_[i][j]; }
  double coeff(int i, int j) const { return c_[i][j]; }

  double operator()(double x, double y) const;
  double d_dx(double x, double y) const;
  double d_dy(double x, double y) const;

  /// p(sx * x, sy * y) for signs sx, sy in {-1, +1}.
  PolyXY reflected(int sx, int sy) const;
  /// p(y, x).
  PolyXY transposed() const;

  PolyXY& operator+=(const PolyXY& other);
  PolyXY& operator*=(double s);
  friend PolyXY operator+(PolyXY a, const PolyXY& b) { return a += b; }
  friend PolyXY operator*(PolyXY a, double s) { return a *= s; }

  double max_abs_coeff() const;
  bool operator==(const PolyXY&) const = default;

 private:
  std::array<std::array<double, 3>, 3> c_{};
};

/// Coefficients of a univariate polynomial of degree <= 5, highest first:
/// a[0] y^5 + a[1] y^4 + ... + a[5].
struct QuinticPoly {
  std::array<double, 6> a{};

  double operator()(double y) const;
  double derivative(double y) const;
  double max_abs_coeff() const;
  /// Degree after dropping leading coefficients that are exactly zero;
  /// -1 for the zero polynomial.
  int degree() const;
};

/// All real roots, ascending, with duplicates merged. Leading coefficients
/// that vanish relative to the largest one reduce the degree explicitly.
/// Throws ZeroPolynomial when every coefficient is zero.
std::vector<double> solve_quintic(const QuinticPoly& p);

}  // namespace amreg
