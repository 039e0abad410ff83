#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "amreg/alignment_metric.hpp"
#include "amreg/eval.hpp"
#include "amreg/pgm.hpp"
#include "amreg/polynomial.hpp"
#include "amreg/pyramid_search.hpp"
#include "amreg/sequence.hpp"
#include "amreg/subpixel.hpp"
#include "support.hpp"

using namespace amreg;
using testing::random_image;
using testing::rel_diff;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome sub_pixel_accuracy() {
  std::vector<double> fractions;
  for (int k = 1; k <= 9; ++k) fractions.push_back(k / 10.0);
  const SweepReport rep = accuracy_sweep(procedural_texture(396, 396, 1), fractions);
  const double ex = rep.max_abs_err_x(), ey = rep.max_abs_err_y();
  return {ex <= 0.05 && ey <= 0.05, fmt("max abs error x=%.4f y=%.4f over 81 shifts", ex, ey)};
}

Outcome worked_example() {
  const ShiftedPair p = make_shifted_pair(procedural_texture(256, 256, 2),
                                          {{1.2, 0.9}, 0.0, 0, SynthMode::DirectBilinear});
  const RegistrationResult r = full_register(p.reference, p.moving);
  const double ex = std::abs(r.total.dx - 1.2), ey = std::abs(r.total.dy - 0.9);
  return {ex <= 0.05 && ey <= 0.05, fmt("recovered (%.4f, %.4f)", r.total.dx, r.total.dy)};
}

Outcome oracle_equivalence() {
  int agree = 0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shift(-0.9, 0.9);
  std::uniform_int_distribution<int> size(40, 46);
  for (int k = 0; k < 100; ++k) {
    const int n = size(rng);
    const RealShift d{shift(rng), shift(rng)};
    const ShiftedPair p = make_shifted_pair(procedural_texture(n, n, 1000 + k),
                                            {d, 0.0, 0, SynthMode::DirectBilinear});
    const FractionalShift s = subpixel_register(p.reference, p.moving);
    const RealShift g = grid_oracle(p.reference, p.moving, 0.005);
    if (std::abs(s.x - g.dx) <= 0.01 && std::abs(s.y - g.dy) <= 0.01) ++agree;
  }
  return {agree >= 95, fmt("%.0f of 100 cases within 0.01 of the grid oracle", agree)};
}

Outcome noise_robustness() {
  const std::vector<double> sigmas{0.0, 3.0};
  const auto rows = noise_sweep(procedural_texture(256, 256, 4), sigmas, 10);
  const double r0 = std::max(rows[0].rmse_x, rows[0].rmse_y);
  const double r3 = std::max(rows[1].rmse_x, rows[1].rmse_y);
  return {r0 <= 0.03 && r3 <= 0.1, fmt("rmse sigma=0: %.4f, sigma=3: %.4f (10 trials)", r0, r3)};
}

Outcome timing_shape() {
  const std::vector<int> sizes{100, 1000};
  const auto rows = timing_bench(sizes);
  const double t100 = rows[0].seconds_median, t1000 = rows[1].seconds_median;
  const double ratio = t1000 / t100;
  return {t1000 <= 5.0 && ratio <= 100.0,
          fmt("t(100)=%.4fs t(1000)=%.4fs ratio=%.1f", t100, t1000, ratio)};
}

Outcome de_flicker() {
  const int size = 128, margin = 8, frames = 50;
  const GrayImage scene = procedural_texture(size + 2 * margin, size + 2 * margin, 6);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> whole(-3, 3);
  std::uniform_real_distribution<double> frac(-0.5, 0.5);
  std::vector<GrayImage> seq;
  for (int t = 0; t < frames; ++t) {
    const RealShift j{whole(rng) + frac(rng), whole(rng) + frac(rng)};
    seq.push_back(crop(quantize(shift_bilinear(scene, j).view()), margin, margin, size, size));
  }
  const TranslationTrack raw = align_sequence(seq, AlignMode::First);
  const TranslationTrack residual = align_sequence(stabilize(seq, raw), AlignMode::First);
  const JitterReport before = jitter_variance(raw);
  const JitterReport after = jitter_variance(residual);
  return {after.variance_x <= 0.05 && after.variance_y <= 0.05,
          fmt("raw variance %.3f, residual variance x=%.4f y=%.4f px^2", before.variance_x + before.variance_y,
              after.variance_x, after.variance_y)};
}

std::array<double, 6> expand(const std::vector<double>& roots,
                             const std::vector<std::pair<double, double>>& quadratics) {
  std::vector<double> poly{1.0};
  auto mul = [&](const std::vector<double>& f) {
    std::vector<double> out(poly.size() + f.size() - 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      for (std::size_t j = 0; j < f.size(); ++j) out[i + j] += poly[i] * f[j];
    }
    poly = out;
  };
  for (double r : roots) mul({1.0, -r});
  for (auto [p, q] : quadratics) mul({1.0, p, q});
  std::array<double, 6> a{};
  std::copy(poly.begin(), poly.end(), a.begin() + (6 - static_cast<long>(poly.size())));
  return a;
}

Outcome property_suites() {
  const int trials = 1000;
  std::vector<std::string> failed;
  auto suite = [&](const char* name, const std::function<bool(int)>& trial) {
    for (int k = 0; k < trials; ++k) {
      if (!trial(k)) {
        failed.push_back(std::string(name) + " (trial " + std::to_string(k) + ")");
        return;
      }
    }
  };

  suite("am symmetry", [](int k) {
    const int rows = 6 + k % 11, cols = 6 + (k * 7) % 13;
    const GrayImage a = random_image(rows, cols, 2 * k, 0, 1 + k % 255);
    const GrayImage b = random_image(rows, cols, 2 * k + 1);
    const double ab = cross_variance(a, b).ci, ba = cross_variance(b, a).ci;
    return ab >= 0.0 && rel_diff(ab, ba) <= 1e-12;
  });

  suite("relabeling invariance", [](int k) {
    const GrayImage a = random_image(12, 10, 5000 + k, 0, 40);
    const GrayImage b = random_image(12, 10, 9000 + k);
    std::vector<int> perm(256);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(k));
    GrayImage relabeled = a;
    for (auto& px : relabeled.pixels()) px = static_cast<std::uint8_t>(perm[px]);
    return rel_diff(interactive_variance(a, b), interactive_variance(relabeled, b)) <= 1e-12;
  });

  suite("ci poly at the origin", [](int k) {
    const GrayImage a = random_image(8 + k % 9, 8 + k % 7, 20000 + k);
    const GrayImage b = random_image(a.rows(), a.cols(), 30000 + k, 0, 1 + k % 255);
    const double ci = cross_variance(interior(a), interior(b)).ci;
    const auto polys = quadrant_ci_polys(a, b);
    return std::all_of(polys.begin(), polys.end(), [&](const PolyXY& p) { return rel_diff(p(0.0, 0.0), ci) <= 1e-9; });
  });

  suite("polyxy gradients", [](int k) {
    std::mt19937_64 rng(40000 + k);
    std::uniform_real_distribution<double> u(-5.0, 5.0), pt(-1.0, 1.0);
    PolyXY p;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) p.coeff(i, j) = u(rng);
    }
    const double x = pt(rng), y = pt(rng), h = 1e-5;
    const double fx = (p(x + h, y) - p(x - h, y)) / (2 * h);
    const double fy = (p(x, y + h) - p(x, y - h)) / (2 * h);
    return std::abs(p.d_dx(x, y) - fx) <= 1e-6 * std::max(1.0, std::abs(fx)) &&
           std::abs(p.d_dy(x, y) - fy) <= 1e-6 * std::max(1.0, std::abs(fy));
  });

  suite("quintic residuals", [](int k) {
    std::mt19937_64 rng(50000 + k);
    std::uniform_real_distribution<double> root(-2.0, 2.0), coef(-2.0, 2.0);
    const int reals = 1 + 2 * (k % 3);
    std::vector<double> rs;
    while (static_cast<int>(rs.size()) < reals) {
      const double r = root(rng);
      if (std::all_of(rs.begin(), rs.end(), [&](double o) { return std::abs(o - r) > 0.05; })) rs.push_back(r);
    }
    std::vector<std::pair<double, double>> quads;
    for (int q = 0; q < (5 - reals) / 2; ++q) {
      const double p = coef(rng);
      quads.push_back({p, p * p / 4.0 + 0.1 + std::abs(coef(rng))});
    }
    QuinticPoly q;
    q.a = expand(rs, quads);
    const std::vector<double> got = solve_quintic(q);
    if (got.size() != rs.size()) return false;
    return std::all_of(got.begin(), got.end(),
                       [&](double y) { return std::abs(q(y)) < 1e-9 * q.max_abs_coeff(); });
  });

  suite("pgm round trip", [](int k) {
    const GrayImage img = random_image(1 + k % 37, 1 + (k * 13) % 41, 60000 + k);
    return decode_pgm(encode_pgm(img)) == img;
  });

  suite("pyramid dimension law", [](int k) {
    std::mt19937_64 rng(70000 + k);
    std::uniform_int_distribution<int> dim(8, 200);
    const int tr = dim(rng), tc = dim(rng);
    const int depth = pyramid_depth(tr, tc);
    const int m = std::min(tr, tc);
    if ((m >> (depth - 1)) < 8 || (depth < 31 && (m >> depth) >= 8)) return false;
    const GrayImage search = random_image(tr + k % 17, tc + k % 23, k);
    const Pyramid p = build_pyramid(search, {tr, tc});
    int rows = search.rows(), cols = search.cols();
    for (const auto& level : p.levels) {
      if (level.rows() != rows || level.cols() != cols) return false;
      rows = (rows + 1) / 2;
      cols = (cols + 1) / 2;
    }
    return p.depth() == depth;
  });

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GrayImage search = procedural_texture(512, 512, 80 + seed);
    const int r = static_cast<int>(37 + seed * 91), c = static_cast<int>(401 - seed * 67);
    SearchCounters counters;
    const IntegerShift s = coarse_register(crop(search, r, c, 64, 64), search, {}, &counters);
    if (s.dr != r || s.dc != c || counters.evaluations > 0.05 * counters.exhaustive) {
      failed.push_back("pyramid sparsity (seed " + std::to_string(seed) + ")");
    }
  }

  std::string detail = failed.empty() ? "all 7 suites passed (1000 trials each)" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"1 sub-pixel accuracy", sub_pixel_accuracy}, {"2 worked example", worked_example},
      {"3 oracle equivalence", oracle_equivalence}, {"4 noise robustness", noise_robustness},
      {"5 timing shape", timing_shape},             {"6 de-flicker", de_flicker},
      {"7 property suites", property_suites},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
