#include <doctest.h>

#include <random>

#include "amreg/alignment_metric.hpp"
#include "amreg/eval.hpp"
#include "amreg/subpixel.hpp"
#include "support.hpp"

using namespace amreg;
using testing::make_gray;
using testing::random_image;
using testing::rel_diff;

namespace {

GrayImage textured(int rows, int cols, std::uint64_t seed) {
  return procedural_texture(rows, cols, seed);
}

ShiftedPair direct_pair(int size, RealShift d, std::uint64_t seed, double sigma = 0.0) {
  return make_shifted_pair(textured(size, size, seed), {d, sigma, seed, SynthMode::DirectBilinear});
}

}  // namespace

TEST_CASE("quadrant signs") {
  CHECK(opposite(Quadrant::I) == Quadrant::III);
  CHECK(opposite(Quadrant::II) == Quadrant::IV);
  CHECK(opposite(Quadrant::III) == Quadrant::I);
  CHECK(opposite(Quadrant::IV) == Quadrant::II);
  CHECK(sign_x(Quadrant::II) == -1);
  CHECK(sign_y(Quadrant::II) == 1);
  CHECK(sign_x(Quadrant::IV) == 1);
  CHECK(sign_y(Quadrant::IV) == -1);
}

TEST_CASE("bilinear coefficient grid") {
  const GrayImage sq = make_gray(2, 2, {0, 100, 100, 200});
  const BilinearCoeffGrid g = bilinear_coeff_grid(sq, Quadrant::I);
  REQUIRE(g.rows() == 1);
  REQUIRE(g.cols() == 1);
  const BilinearForm f = g.at(0, 0);
  CHECK(f.a == 0.0);
  CHECK(f.b == 100.0);
  CHECK(f.c == 100.0);
  CHECK(f.d == 0.0);

  const BilinearCoeffGrid flat = bilinear_coeff_grid(GrayImage(5, 6, 33), Quadrant::III);
  CHECK(flat.rows() == 4);
  CHECK(flat.cols() == 5);
  for (int r = 1; r < 5; ++r) {
    for (int c = 1; c < 6; ++c) {
      const BilinearForm& h = flat.at(r, c);
      CHECK(h.a == 0.0);
      CHECK(h.b == 0.0);
      CHECK(h.c == 0.0);
      CHECK(h.d == 33.0);
    }
  }

  const GrayImage img = random_image(7, 9, 1);
  for (Quadrant q : kQuadrants) {
    const BilinearCoeffGrid grid = bilinear_coeff_grid(img, q);
    const int sx = sign_x(q), sy = sign_y(q);
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 9; ++c) {
        if (!grid.contains(r, c)) continue;
        const BilinearForm& form = grid.at(r, c);
        CHECK(form(0.0, 0.0) == img(r, c));
        CHECK(form(1.0, 0.0) == doctest::Approx(img(r, c + sx)));
        CHECK(form(0.0, 1.0) == doctest::Approx(img(r + sy, c)));
        CHECK(form(0.3, 0.6) ==
              doctest::Approx(testing::naive_sample(img, r + sy * 0.6, c + sx * 0.3)));
      }
    }
  }
  CHECK_THROWS_AS(bilinear_coeff_grid(GrayImage(1, 4), Quadrant::I), Error);
}

TEST_CASE("centered objective") {
  const GrayImage flat(6, 6, 10);
  const PolyXY zero = centered_objective(flat, bilinear_coeff_grid(GrayImage(6, 6, 90), Quadrant::I));
  CHECK(zero == PolyXY{});

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GrayImage a = random_image(14, 12, seed, 0, 20);
    const GrayImage b = random_image(14, 12, seed + 40);
    for (Quadrant q : kQuadrants) {
      const PolyXY f = centered_objective(a, bilinear_coeff_grid(b, q));
      const double mn = 12.0 * 10.0;
      const double iv = interactive_variance(interior(a), interior(b));
      CHECK(rel_diff(f(0.0, 0.0) / mn, iv) <= 1e-9);
      // Against the naive interpolated raster at an interior offset.
      const double u = 0.35, v = 0.7;
      const GrayImage ca = crop(a, 1, 1, 12, 10);
      const double naive = testing::naive_iv(ca, [&](int r, int c) {
        return testing::naive_sample(b, r + 1 + sign_y(q) * v, c + 1 + sign_x(q) * u);
      });
      CHECK(rel_diff(f(u, v) / mn, naive) <= 1e-9);
    }
  }
  CHECK_THROWS_AS(centered_objective(GrayImage(2, 2), bilinear_coeff_grid(GrayImage(2, 2), Quadrant::I)),
                  Error);
}

TEST_CASE("ci poly") {
  PolyXY f;
  f.coeff(1, 1) = 6.0;
  const PolyXY scaled = ci_poly(f, PolyXY{}, 5.0, 2.0, 3.0);
  CHECK(scaled.coeff(1, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(ci_poly(f, f, 0.0, 1.0, 4.0), Error);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ShiftedPair p = direct_pair(40, {0.4, -0.2}, seed);
    for (Quadrant q : kQuadrants) {
      const PolyXY ci = quadrant_ci_poly(p.moving, p.reference, q);
      CHECK(rel_diff(ci(0.0, 0.0), cross_variance(interior(p.moving), interior(p.reference)).ci) <= 1e-9);
      const double x = 0.25 * sign_x(q), y = 0.25 * sign_y(q);
      CHECK(rel_diff(ci(0.25, 0.25), testing::naive_model_ci(p.moving, p.reference, x, y)) <= 1e-9);
      CHECK(rel_diff(ci(0.25, 0.25), model_cross_variance(p.moving, p.reference, {x, y}).ci) <= 1e-9);
    }
    const auto all = quadrant_ci_polys(p.moving, p.reference);
    CHECK(all[2] == quadrant_ci_poly(p.moving, p.reference, Quadrant::III));
  }
}

TEST_CASE("subpixel register on identical images") {
  const GrayImage img = textured(50, 50, 3);
  const FractionalShift s = subpixel_register(img, img);
  CHECK(s.x == 0.0);
  CHECK(s.y == 0.0);
  CHECK(s.score.perfect());
}

TEST_CASE("subpixel register recovers a (0.3, 0.4) shift") {
  const ShiftedPair p = direct_pair(400, {0.3, 0.4}, 1);
  REQUIRE(p.reference.rows() == 394);
  SubpixelTrace trace;
  const FractionalShift s = subpixel_register(p.reference, p.moving, {}, &trace);
  CHECK(std::abs(s.x + 0.3) <= 0.05);
  CHECK(std::abs(s.y + 0.4) <= 0.05);
  CHECK(std::abs(s.x) < 1.0);
  CHECK(std::abs(s.y) < 1.0);
  CHECK_FALSE(trace.candidates.empty());
  CHECK(trace.candidates.back().origin == "origin");

  // Grid oracle on a central window of the same pair.
  const GrayImage a = crop(p.reference, 170, 170, 48, 48);
  const GrayImage b = crop(p.moving, 170, 170, 48, 48);
  const FractionalShift local = subpixel_register(a, b);
  const RealShift grid = grid_oracle(a, b, 0.005);
  CHECK(std::abs(local.x - grid.dx) <= 0.01);
  CHECK(std::abs(local.y - grid.dy) <= 0.01);
}

TEST_CASE("accepted root matches Newton refinement of the model") {
  const ShiftedPair p = direct_pair(44, {0.3, 0.4}, 9);
  const GrayImage& i1 = p.reference;
  const GrayImage& i2 = p.moving;
  SubpixelTrace trace;
  const FractionalShift s = subpixel_register(i1, i2, {}, &trace);
  REQUIRE(s.x < 0.0);
  REQUIRE(s.y < 0.0);

  const RealShift seed = grid_oracle(i1, i2, 0.005);
  auto f = [&](double x, double y) { return testing::naive_model_ci(i1, i2, x, y); };
  double x = seed.dx, y = seed.dy;
  const double h = 1e-3;
  for (int it = 0; it < 20; ++it) {
    const double gx = (f(x + h, y) - f(x - h, y)) / (2 * h);
    const double gy = (f(x, y + h) - f(x, y - h)) / (2 * h);
    const double hxx = (f(x + h, y) - 2 * f(x, y) + f(x - h, y)) / (h * h);
    const double hyy = (f(x, y + h) - 2 * f(x, y) + f(x, y - h)) / (h * h);
    const double hxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) /
                       (4 * h * h);
    const double det = hxx * hyy - hxy * hxy;
    const double step_x = (hyy * gx - hxy * gy) / det;
    const double step_y = (hxx * gy - hxy * gx) / det;
    x -= step_x;
    y -= step_y;
    if (std::abs(step_x) + std::abs(step_y) < 1e-12) break;
  }
  CHECK(std::abs(s.x - x) <= 1e-6);
  CHECK(std::abs(s.y - y) <= 1e-6);
}

TEST_CASE("returned shift never loses to the origin") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    const ShiftedPair p = direct_pair(40, {u(rng), u(rng)}, 200 + seed, 1.0);
    const FractionalShift s = subpixel_register(p.reference, p.moving);
    const double origin = model_cross_variance(p.reference, p.moving, {0.0, 0.0}).ci;
    const double chosen = model_cross_variance(p.reference, p.moving, s.as_shift()).ci;
    CHECK(chosen <= origin * (1 + 1e-9));
    CHECK(std::abs(s.x) < 1.0);
    CHECK(std::abs(s.y) < 1.0);
  }
}

TEST_CASE("low texture guard") {
  GrayImage img(20, 20, 100);
  img(5, 5) = 101;
  const FractionalShift s = subpixel_register(img, img);
  CHECK(s.low_texture);
  CHECK(s.x == 0.0);
  CHECK(s.y == 0.0);
  CHECK_THROWS_AS(subpixel_register(GrayImage(20, 20, 5), img), Error);
  CHECK_THROWS_AS(subpixel_register(img, GrayImage(20, 21, 5)), Error);
  CHECK_THROWS_AS(subpixel_register(GrayImage(3, 3, 5), GrayImage(3, 3, 5)), Error);
}

TEST_CASE("full register examples") {
  SUBCASE("total (1.2, 0.9)") {
    const ShiftedPair p = direct_pair(200, {1.2, 0.9}, 2);
    const RegistrationResult r = full_register(p.reference, p.moving);
    CHECK(std::abs(r.total.dx - 1.2) <= 0.05);
    CHECK(std::abs(r.total.dy - 0.9) <= 0.05);
    CHECK(r.total.dx == r.integer_shift.dx + r.fractional.x);
    CHECK(r.total.dy == r.integer_shift.dy + r.fractional.y);
  }
  SUBCASE("total (3.37, -2.61) supersampled") {
    const GrayImage base = textured(524, 524, 5);
    const ShiftedPair p = make_shifted_pair(base, {{3.37, -2.61}, 0.0, 0, SynthMode::SupersampleDecimate});
    CHECK(p.reference.rows() == 252);
    const RegistrationResult r = full_register(p.reference, p.moving);
    CHECK(std::abs(r.total.dx - 3.37) <= 0.05);
    CHECK(std::abs(r.total.dy + 2.61) <= 0.05);
  }
  SUBCASE("identity") {
    const GrayImage img = textured(120, 100, 6);
    const RegistrationResult r = full_register(img, img);
    CHECK(r.total.dx == 0.0);
    CHECK(r.total.dy == 0.0);
    CHECK(r.score.perfect());
  }
  SUBCASE("too small") {
    const GrayImage img = textured(12, 12, 6);
    CHECK_THROWS_AS(full_register(img, img), Error);
  }
}
