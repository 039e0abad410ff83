#include "amreg/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "amreg/image.hpp"

namespace amreg {

double PolyXY::operator()(double x, double y) const {
  double acc = 0.0;
  for (int i = 2; i >= 0; --i) {
    acc = acc * x + ((c_[i][2] * y + c_[i][1]) * y + c_[i][0]);
  }
  return acc;
}

double PolyXY::d_dx(double x, double y) const {
  auto row = [&](int i) { return (c_[i][2] * y + c_[i][1]) * y + c_[i][0]; };
  return 2.0 * row(2) * x + row(1);
}

double PolyXY::d_dy(double x, double y) const {
  auto row = [&](int i) { return 2.0 * c_[i][2] * y + c_[i][1]; };
  return (row(2) * x + row(1)) * x + row(0);
}

PolyXY PolyXY::reflected(int sx, int sy) const {
  PolyXY out = *this;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const bool flip = ((sx < 0) && (i % 2 == 1)) != ((sy < 0) && (j % 2 == 1));
      if (flip) out.c_[i][j] = -out.c_[i][j];
    }
  }
  return out;
}

PolyXY PolyXY::transposed() const {
  PolyXY out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.c_[j][i] = c_[i][j];
  }
  return out;
}

PolyXY& PolyXY::operator+=(const PolyXY& other) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c_[i][j] += other.c_[i][j];
  }
  return *this;
}

PolyXY& PolyXY::operator*=(double s) {
  for (auto& row : c_) {
    for (double& v : row) v *= s;
  }
  return *this;
}

double PolyXY::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& row : c_) {
    for (double v : row) m = std::max(m, std::abs(v));
  }
  return m;
}

double QuinticPoly::operator()(double y) const {
  double acc = 0.0;
  for (double c : a) acc = acc * y + c;
  return acc;
}

double QuinticPoly::derivative(double y) const {
  double acc = 0.0;
  for (int k = 0; k < 5; ++k) acc = acc * y + a[k] * (5 - k);
  return acc;
}

double QuinticPoly::max_abs_coeff() const {
  double m = 0.0;
  for (double c : a) m = std::max(m, std::abs(c));
  return m;
}

int QuinticPoly::degree() const {
  for (int k = 0; k < 6; ++k) {
    if (a[k] != 0.0) return 5 - k;
  }
  return -1;
}

namespace {

constexpr double kLeadingTolerance = 1e-13;
constexpr double kImagTolerance = 1e-7;

double eval(const std::vector<double>& c, double y) {
  double acc = 0.0;
  for (double v : c) acc = acc * y + v;
  return acc;
}

double eval_derivative(const std::vector<double>& c, double y) {
  const int n = static_cast<int>(c.size()) - 1;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) acc = acc * y + c[k] * (n - k);
  return acc;
}

// Sum of |term| magnitudes, the natural scale for a residual at y.
double term_scale(const std::vector<double>& c, double y) {
  double acc = 0.0;
  for (double v : c) acc = acc * std::abs(y) + std::abs(v);
  return acc;
}

double polish(const std::vector<double>& c, double y) {
  double best = y;
  double best_res = std::abs(eval(c, y));
  for (int it = 0; it < 8 && best_res > 0.0; ++it) {
    const double d = eval_derivative(c, y);
    if (d == 0.0) break;
    y -= eval(c, y) / d;
    const double res = std::abs(eval(c, y));
    if (!(res < best_res)) break;
    best = y;
    best_res = res;
  }
  return best;
}

}  // namespace

std::vector<double> solve_quintic(const QuinticPoly& p) {
  const double scale = p.max_abs_coeff();
  if (scale == 0.0) throw Error(ErrorCode::ZeroPolynomial, "quintic has no nonzero coefficient");

  // Normalize, then drop leading coefficients that are negligible.
  std::vector<double> c;
  for (double v : p.a) {
    if (c.empty() && std::abs(v) <= kLeadingTolerance * scale) continue;
    c.push_back(v / scale);
  }
  const int degree = static_cast<int>(c.size()) - 1;

  std::vector<double> roots;
  if (degree == 1) {
    roots.push_back(-c[1] / c[0]);
  } else if (degree == 2) {
    const double disc = c[1] * c[1] - 4.0 * c[0] * c[2];
    if (disc >= 0.0) {
      const double q = -0.5 * (c[1] + std::copysign(std::sqrt(disc), c[1]));
      if (q != 0.0) {
        roots.push_back(q / c[0]);
        roots.push_back(c[2] / q);
      } else {
        roots.push_back(0.0);  // c[1] == c[2] == 0
      }
    }
  } else if (degree >= 3) {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (int k = 0; k < degree; ++k) companion(0, k) = -c[k + 1] / c[0];
    for (int k = 1; k < degree; ++k) companion(k, k - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    const auto& ev = solver.eigenvalues();
    for (int k = 0; k < degree; ++k) {
      if (std::abs(ev[k].imag()) <= kImagTolerance) roots.push_back(ev[k].real());
    }
  }

  std::vector<double> accepted;
  for (double r : roots) {
    r = polish(c, r);
    const double res = std::abs(eval(c, r));
    // Normalized coefficients have max magnitude 1.
    if (res < 1e-9 || res < 1e-9 * term_scale(c, r)) accepted.push_back(r);
  }
  std::sort(accepted.begin(), accepted.end());
  std::vector<double> merged;
  for (double r : accepted) {
    if (merged.empty() || std::abs(r - merged.back()) > 1e-9 * std::max(1.0, std::abs(r))) {
      merged.push_back(r);
    }
  }
  return merged;
}

}  // namespace amreg
