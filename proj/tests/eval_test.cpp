#include <doctest.h>

#include <algorithm>
#include <cstdint>

#include "amreg/eval.hpp"
#include "support.hpp"

using namespace amreg;

namespace {

std::uint64_t fnv1a(const GrayImage& img) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t px : img.pixels()) {
    h ^= px;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

TEST_CASE("procedural texture is deterministic") {
  const GrayImage a = procedural_texture(64, 80, 1);
  CHECK(a == procedural_texture(64, 80, 1));
  CHECK_FALSE(a == procedural_texture(64, 80, 2));
  CHECK(fnv1a(a) == 11118538190419796354ull);
  const ImageStats s = image_stats(a);
  CHECK(s.variance > 100.0);
  const auto [lo, hi] = std::minmax_element(a.pixels().begin(), a.pixels().end());
  CHECK(*lo >= 16);
  CHECK(*hi <= 240);
  CHECK_THROWS_AS(procedural_texture(0, 5, 1), Error);
}

TEST_CASE("shifted pair construction") {
  const GrayImage base = procedural_texture(60, 60, 3);
  const ShiftedPair zero = make_shifted_pair(base, {{0.0, 0.0}, 0.0, 0, SynthMode::DirectBilinear});
  CHECK(zero.reference == zero.moving);
  CHECK(zero.reference.rows() == 56);

  const ShiftedPair whole = make_shifted_pair(base, {{2.0, 1.0}, 0.0, 0, SynthMode::DirectBilinear});
  REQUIRE(whole.reference.rows() == 52);
  for (int r = 1; r < whole.moving.rows(); ++r) {
    for (int c = 2; c < whole.moving.cols(); ++c) CHECK(whole.moving(r, c) == whole.reference(r - 1, c - 2));
  }

  const ShiftedPair noisy = make_shifted_pair(base, {{0.0, 0.0}, 3.0, 9, SynthMode::DirectBilinear});
  CHECK_FALSE(noisy.reference == noisy.moving);
  CHECK(noisy.reference == make_shifted_pair(base, {{0.0, 0.0}, 3.0, 9, SynthMode::DirectBilinear}).reference);

  const ShiftedPair half = make_shifted_pair(base, {{0.5, 0.5}, 0.0, 0, SynthMode::SupersampleDecimate});
  CHECK(half.reference.rows() <= 30);
  CHECK(half.truth == RealShift{0.5, 0.5});
}

TEST_CASE("grid oracle") {
  const GrayImage img = procedural_texture(40, 40, 4);
  const RealShift same = grid_oracle(img, img, 0.05);
  CHECK(same.dx == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(same.dy == doctest::Approx(0.0).epsilon(1e-12));

  const ShiftedPair p = make_shifted_pair(procedural_texture(44, 44, 5),
                                          {{0.3, 0.4}, 0.0, 0, SynthMode::DirectBilinear});
  const RealShift d = grid_oracle(p.reference, p.moving, 0.05);
  CHECK(std::abs(d.dx + 0.3) <= 0.05);
  CHECK(std::abs(d.dy + 0.4) <= 0.05);
  CHECK_THROWS_AS(grid_oracle(img, img, 0.0), Error);
}

TEST_CASE("accuracy sweep") {
  const GrayImage base = procedural_texture(200, 200, 6);
  const std::vector<double> fractions{0.0, 0.5};
  const SweepReport rep = accuracy_sweep(base, fractions);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.rows[0].tx == 1.0);
  CHECK(rep.rows[0].abs_err_x <= 0.01);
  CHECK(rep.rows[0].abs_err_y <= 0.01);
  CHECK(rep.max_abs_err_x() <= 0.05);
  CHECK(rep.max_abs_err_y() <= 0.05);
  CHECK(sweep_to_csv(rep).rfind("tx,ty,ex,ey,abs_err_x,abs_err_y\n1.000000,1.000000,", 0) == 0);
  CHECK(sweep_to_json(rep).find("\"abs_err_y\"") != std::string::npos);
}

TEST_CASE("a larger base does not hurt accuracy") {
  const std::vector<double> fractions{0.2, 0.7};
  const SweepReport small = accuracy_sweep(procedural_texture(396, 396, 7), fractions);
  const SweepReport large = accuracy_sweep(procedural_texture(800, 800, 7), fractions);
  CHECK(std::max(large.max_abs_err_x(), large.max_abs_err_y()) <=
        std::max(small.max_abs_err_x(), small.max_abs_err_y()) + 0.01);
}

TEST_CASE("noise sweep") {
  const GrayImage base = procedural_texture(120, 120, 8);
  const std::vector<double> sigmas{0.0, 2.0};
  const auto a = noise_sweep(base, sigmas, 5);
  const auto b = noise_sweep(base, sigmas, 5);
  REQUIRE(a.size() == 2);
  CHECK(a[0].rmse_x == b[0].rmse_x);
  CHECK(a[1].rmse_y == b[1].rmse_y);
  CHECK(a[1].trials == 5);
  CHECK(a[0].rmse_x <= 0.05);
  CHECK(noise_to_csv(a).rfind("sigma,rmse_x,rmse_y,trials\n0.000000,", 0) == 0);
  CHECK(noise_to_json(a).find("\"trials\": 5") != std::string::npos);
  CHECK_THROWS_AS(noise_sweep(base, sigmas, 0), Error);
}

TEST_CASE("timing bench") {
  const std::vector<int> sizes{100, 300};
  const auto rows = timing_bench(sizes);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].dim == 100);
  CHECK(rows[0].seconds_median > 0.0);
  CHECK(rows[1].am_evals > rows[0].am_evals);
  CHECK(timing_to_csv(rows).rfind("dim,seconds_median,am_evals\n100,", 0) == 0);
  CHECK(timing_to_json(rows).find("\"am_evals\"") != std::string::npos);
}
