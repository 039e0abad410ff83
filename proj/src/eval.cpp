#include "amreg/eval.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "amreg/alignment_metric.hpp"
#include "amreg/format.hpp"

namespace amreg {

namespace {

double lattice_uniform(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

}  // namespace

GrayImage procedural_texture(int rows, int cols, std::uint64_t seed,
                             const TextureOptions& options) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::TooSmall, "texture needs positive size");
  std::mt19937_64 engine(seed);
  std::vector<double> acc(static_cast<std::size_t>(rows) * cols, 0.0);
  double amplitude = 1.0;
  for (int period : options.periods) {
    if (period < 1) throw Error(ErrorCode::InvalidArgument, "octave period must be positive");
    const int lr = rows / period + 2;
    const int lc = cols / period + 2;
    std::vector<double> lattice(static_cast<std::size_t>(lr) * lc);
    for (double& v : lattice) v = lattice_uniform(engine);
    for (int r = 0; r < rows; ++r) {
      const int gr = r / period;
      const double fr = smoothstep(static_cast<double>(r % period) / period);
      for (int c = 0; c < cols; ++c) {
        const int gc = c / period;
        const double fc = smoothstep(static_cast<double>(c % period) / period);
        auto at = [&](int i, int j) { return lattice[static_cast<std::size_t>(i) * lc + j]; };
        const double top = at(gr, gc) + fc * (at(gr, gc + 1) - at(gr, gc));
        const double bottom = at(gr + 1, gc) + fc * (at(gr + 1, gc + 1) - at(gr + 1, gc));
        acc[static_cast<std::size_t>(r) * cols + c] += amplitude * (top + fr * (bottom - top));
      }
    }
    amplitude *= options.persistence;
  }
  const auto [mn, mx] = std::minmax_element(acc.begin(), acc.end());
  const double span = *mx - *mn;
  GrayImage out(rows, cols);
  auto px = out.pixels();
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double t = span > 0.0 ? (acc[i] - *mn) / span : 0.5;
    px[i] = static_cast<std::uint8_t>(
        std::clamp(std::round(options.low + t * (options.high - options.low)), 0.0, 255.0));
  }
  return out;
}

const char* synth_mode_name(SynthMode mode) {
  return mode == SynthMode::DirectBilinear ? "direct" : "supersample";
}

SynthMode parse_synth_mode(const std::string& name) {
  if (name == "direct") return SynthMode::DirectBilinear;
  if (name == "supersample") return SynthMode::SupersampleDecimate;
  throw Error(ErrorCode::InvalidArgument, "unknown synth mode '" + name + "'");
}

ShiftedPair make_shifted_pair(const GrayImage& base, const SynthCase& c) {
  const double reach = std::max(std::abs(c.shift.dx), std::abs(c.shift.dy));
  ShiftedPair pair{base, base, c.shift};
  if (c.mode == SynthMode::DirectBilinear) {
    const int margin = static_cast<int>(std::ceil(reach)) + 2;
    const int h = base.rows() - 2 * margin;
    const int w = base.cols() - 2 * margin;
    if (h < 8 || w < 8) throw Error(ErrorCode::TooSmall, "base too small for the shift margin");
    pair.reference = crop(base, margin, margin, h, w);
    pair.moving = crop(quantize(shift_bilinear(base, c.shift)), margin, margin, h, w);
  } else {
    int margin = static_cast<int>(std::ceil(2.0 * reach)) + 2;
    margin += margin % 2;
    const int h = base.rows() - 2 * margin;
    const int w = base.cols() - 2 * margin;
    if (h < 16 || w < 16) throw Error(ErrorCode::TooSmall, "base too small for the shift margin");
    const RealImage fine = to_real(base);
    const RealImage moved = shift_bilinear(base, {2.0 * c.shift.dx, 2.0 * c.shift.dy});
    pair.reference = quantize(downsample(crop(fine, margin, margin, h, w)));
    pair.moving = quantize(downsample(crop(moved, margin, margin, h, w)));
  }
  if (c.sigma > 0.0) {
    pair.reference = add_gaussian_noise(pair.reference, c.sigma, c.seed);
    pair.moving = add_gaussian_noise(pair.moving, c.sigma, c.seed + 1);
  }
  return pair;
}

namespace {

// Interactive variance of `source` sampled at p + offset, grouped by the
// grey levels of `grouping`, over the interior of both images.
double sampled_group_variance(GrayView grouping, GrayView source, double off_row,
                              double off_col) {
  const double fr = std::floor(off_row);
  const double fc = std::floor(off_col);
  const double wr = off_row - fr;
  const double wc = off_col - fc;
  const int ir = static_cast<int>(fr);
  const int ic = static_cast<int>(fc);
  const double w00 = (1.0 - wr) * (1.0 - wc);
  const double w01 = (1.0 - wr) * wc;
  const double w10 = wr * (1.0 - wc);
  const double w11 = wr * wc;

  const int rows = grouping.rows;
  const int cols = grouping.cols;
  std::vector<double> values(static_cast<std::size_t>(rows - 2) * (cols - 2));
  std::array<double, 256> sum{};
  std::array<int, 256> count{};
  std::size_t k = 0;
  for (int r = 1; r < rows - 1; ++r) {
    const std::uint8_t* g = grouping.row(r);
    const std::uint8_t* s0 = source.row(r + ir);
    const std::uint8_t* s1 = source.row(r + ir + 1);
    for (int c = 1; c < cols - 1; ++c, ++k) {
      const int cc = c + ic;
      const double v = w00 * s0[cc] + w01 * s0[cc + 1] + w10 * s1[cc] + w11 * s1[cc + 1];
      values[k] = v;
      sum[g[c]] += v;
      ++count[g[c]];
    }
  }
  for (int n = 0; n < 256; ++n) {
    if (count[n] > 0) sum[n] /= count[n];
  }
  double sq = 0.0;
  k = 0;
  for (int r = 1; r < rows - 1; ++r) {
    const std::uint8_t* g = grouping.row(r);
    for (int c = 1; c < cols - 1; ++c, ++k) {
      const double dev = values[k] - sum[g[c]];
      sq += dev * dev;
    }
  }
  return sq / static_cast<double>(values.size());
}

}  // namespace

RealShift grid_oracle(GrayView i1, GrayView i2, double step) {
  if (!(step > 0.0 && step <= 0.1)) {
    throw Error(ErrorCode::InvalidArgument, "grid step must lie in (0, 0.1]");
  }
  if (i1.rows != i2.rows || i1.cols != i2.cols) {
    throw Error(ErrorCode::DimensionMismatch, "images must have identical dimensions");
  }
  if (i1.rows < 4 || i1.cols < 4) throw Error(ErrorCode::TooSmall, "oracle needs 4x4 pixels");
  const double var1 = image_stats(interior(i1)).variance;
  const double var2 = image_stats(interior(i2)).variance;
  if (var1 == 0.0 || var2 == 0.0) throw Error(ErrorCode::ZeroVariance, "zero-variance input");

  const int n = static_cast<int>(std::ceil(1.0 / step - 1e-9));
  RealShift best;
  double best_ci = std::numeric_limits<double>::infinity();
  for (int kx = -(n - 1); kx <= n - 1; ++kx) {
    const double x = kx * step;
    for (int ky = -(n - 1); ky <= n - 1; ++ky) {
      const double y = ky * step;
      // i2 read at p - d grouped by i1; i1 read at p + d grouped by i2.
      const double ci = sampled_group_variance(i1, i2, -y, -x) / var2 +
                        sampled_group_variance(i2, i1, y, x) / var1;
      if (ci < best_ci) {
        best_ci = ci;
        best = {x, y};
      }
    }
  }
  return best;
}

double SweepReport::max_abs_err_x() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.abs_err_x);
  return m;
}

double SweepReport::max_abs_err_y() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.abs_err_y);
  return m;
}

SweepReport accuracy_sweep(const GrayImage& base, std::span<const double> fractions,
                           const SweepOptions& options) {
  SweepReport report;
  for (double fx : fractions) {
    for (double fy : fractions) {
      if (!(fx >= 0.0 && fx < 1.0 && fy >= 0.0 && fy < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "sweep fractions must lie in [0, 1)");
      }
      SynthCase c;
      c.shift = {options.integer_offset + fx, options.integer_offset + fy};
      c.mode = options.mode;
      const ShiftedPair pair = make_shifted_pair(base, c);
      const RegistrationResult r = full_register(pair.reference, pair.moving, options.registration);
      report.rows.push_back({c.shift.dx, c.shift.dy, r.total.dx, r.total.dy,
                             std::abs(r.total.dx - c.shift.dx), std::abs(r.total.dy - c.shift.dy)});
    }
  }
  return report;
}

std::vector<NoiseRow> noise_sweep(const GrayImage& base, std::span<const double> sigmas,
                                  int trials, const NoiseOptions& options) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
  std::vector<NoiseRow> rows;
  const double shift = options.integer_offset + options.fraction;
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    double sq_x = 0.0, sq_y = 0.0;
    for (int t = 0; t < trials; ++t) {
      SynthCase c;
      c.shift = {shift, shift};
      c.sigma = sigmas[s];
      c.mode = options.mode;
      c.seed = options.seed + 1000 * s + 2 * static_cast<std::uint64_t>(t);
      const ShiftedPair pair = make_shifted_pair(base, c);
      const RegistrationResult r = full_register(pair.reference, pair.moving, options.registration);
      sq_x += (r.total.dx - shift) * (r.total.dx - shift);
      sq_y += (r.total.dy - shift) * (r.total.dy - shift);
    }
    rows.push_back({sigmas[s], std::sqrt(sq_x / trials), std::sqrt(sq_y / trials), trials});
  }
  return rows;
}

std::vector<TimingRow> timing_bench(std::span<const int> sizes, const TimingOptions& options) {
  if (options.runs < 1) throw Error(ErrorCode::InvalidArgument, "runs must be positive");
  std::vector<TimingRow> rows;
  for (int dim : sizes) {
    if (dim < 16) throw Error(ErrorCode::TooSmall, "benchmark size must be at least 16");
    SynthCase c;
    c.shift = options.shift;
    const int margin = static_cast<int>(std::ceil(std::max(std::abs(c.shift.dx),
                                                           std::abs(c.shift.dy)))) + 2;
    const GrayImage base = procedural_texture(dim + 2 * margin, dim + 2 * margin,
                                              options.seed + static_cast<std::uint64_t>(dim));
    const ShiftedPair pair = make_shifted_pair(base, c);
    std::size_t evals = full_register(pair.reference, pair.moving, options.registration)
                            .am_evaluations;  // warm-up, untimed
    std::vector<double> seconds;
    for (int run = 0; run < options.runs; ++run) {
      const auto start = std::chrono::steady_clock::now();
      const RegistrationResult r = full_register(pair.reference, pair.moving, options.registration);
      const auto stop = std::chrono::steady_clock::now();
      seconds.push_back(std::chrono::duration<double>(stop - start).count());
      evals = r.am_evaluations;
    }
    std::sort(seconds.begin(), seconds.end());
    const std::size_t mid = seconds.size() / 2;
    const double median = seconds.size() % 2 == 1 ? seconds[mid]
                                                   : 0.5 * (seconds[mid - 1] + seconds[mid]);
    rows.push_back({dim, median, evals});
  }
  return rows;
}

std::string sweep_to_csv(const SweepReport& report) {
  std::string out = "tx,ty,ex,ey,abs_err_x,abs_err_y\n";
  for (const auto& r : report.rows) {
    out += fixed6(r.tx) + "," + fixed6(r.ty) + "," + fixed6(r.ex) + "," + fixed6(r.ey) + "," +
           fixed6(r.abs_err_x) + "," + fixed6(r.abs_err_y) + "\n";
  }
  return out;
}

std::string sweep_to_json(const SweepReport& report) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    arr.push_back({{"tx", round6(r.tx)},
                   {"ty", round6(r.ty)},
                   {"ex", round6(r.ex)},
                   {"ey", round6(r.ey)},
                   {"abs_err_x", round6(r.abs_err_x)},
                   {"abs_err_y", round6(r.abs_err_y)}});
  }
  return arr.dump(2) + "\n";
}

std::string noise_to_csv(std::span<const NoiseRow> rows) {
  std::string out = "sigma,rmse_x,rmse_y,trials\n";
  for (const auto& r : rows) {
    out += fixed6(r.sigma) + "," + fixed6(r.rmse_x) + "," + fixed6(r.rmse_y) + "," +
           std::to_string(r.trials) + "\n";
  }
  return out;
}

std::string noise_to_json(std::span<const NoiseRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"sigma", round6(r.sigma)},
                   {"rmse_x", round6(r.rmse_x)},
                   {"rmse_y", round6(r.rmse_y)},
                   {"trials", r.trials}});
  }
  return arr.dump(2) + "\n";
}

std::string timing_to_csv(std::span<const TimingRow> rows) {
  std::string out = "dim,seconds_median,am_evals\n";
  for (const auto& r : rows) {
    out += std::to_string(r.dim) + "," + fixed6(r.seconds_median) + "," +
           std::to_string(r.am_evals) + "\n";
  }
  return out;
}

std::string timing_to_json(std::span<const TimingRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"dim", r.dim},
                   {"seconds_median", round6(r.seconds_median)},
                   {"am_evals", r.am_evals}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace amreg
