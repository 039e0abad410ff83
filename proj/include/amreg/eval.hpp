#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amreg/image.hpp"
#include "amreg/subpixel.hpp"

namespace amreg {

struct TextureOptions {
  /// Lattice spacing of each value-noise octave, in pixels.
  std::vector<int> periods{32, 16, 8, 4};
  /// Amplitude ratio between successive octaves.
  double persistence = 0.6;
  /// Output grey range.
  double low = 16.0;
  double high = 240.0;
};

/// Seeded multi-octave value noise with cubic (smoothstep) interpolation.
GrayImage procedural_texture(int rows, int cols, std::uint64_t seed,
                             const TextureOptions& options = {});

enum class SynthMode { DirectBilinear, SupersampleDecimate };

const char* synth_mode_name(SynthMode mode);
SynthMode parse_synth_mode(const std::string& name);

struct SynthCase {
  RealShift shift;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  SynthMode mode = SynthMode::DirectBilinear;
};

struct ShiftedPair {
  GrayImage reference;
  GrayImage moving;
  RealShift truth;  // moving ~ shift_bilinear(reference, truth)
};

/// Builds a reference/moving pair with a known translation.
/// DirectBilinear shifts the base bilinearly and crops a margin of
/// ceil(max |shift|) + 2 from every side. SupersampleDecimate treats the base
/// as a 2x raster: it shifts it by 2 * shift, crops, and keeps every other
/// pixel, so outputs are about half the base size. Noise with the case sigma
/// is added to both images (seeds `seed` and `seed + 1`).
ShiftedPair make_shifted_pair(const GrayImage& base, const SynthCase& c);

/// Exhaustive minimizer of the cross variance over shifts on the grid
/// {-1 + step, ..., 1 - step}^2, evaluated on explicitly interpolated rasters.
/// Same sign convention as subpixel_register: i1 ~ shift_bilinear(i2, d).
RealShift grid_oracle(GrayView i1, GrayView i2, double step);

struct SweepRow {
  double tx = 0.0;
  double ty = 0.0;
  double ex = 0.0;
  double ey = 0.0;
  double abs_err_x = 0.0;
  double abs_err_y = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;

  double max_abs_err_x() const;
  double max_abs_err_y() const;
};

struct SweepOptions {
  SynthMode mode = SynthMode::DirectBilinear;
  /// Whole-pixel part added to every fractional shift.
  int integer_offset = 1;
  RegisterOptions registration;
};

/// full_register over every (fx, fy) pair of `fractions`.
SweepReport accuracy_sweep(const GrayImage& base, std::span<const double> fractions,
                           const SweepOptions& options = {});

struct NoiseRow {
  double sigma = 0.0;
  double rmse_x = 0.0;
  double rmse_y = 0.0;
  int trials = 0;
};

struct NoiseOptions {
  SynthMode mode = SynthMode::DirectBilinear;
  int integer_offset = 1;
  double fraction = 0.5;
  std::uint64_t seed = 1;
  RegisterOptions registration;
};

/// RMSE of the recovered shift for each noise level over seeded trials.
std::vector<NoiseRow> noise_sweep(const GrayImage& base, std::span<const double> sigmas,
                                  int trials, const NoiseOptions& options = {});

struct TimingRow {
  int dim = 0;
  double seconds_median = 0.0;
  std::size_t am_evals = 0;
};

struct TimingOptions {
  int runs = 5;
  std::uint64_t seed = 7;
  RealShift shift{1.3, 0.6};
  RegisterOptions registration;
};

/// Median wall-clock of full_register on textured dim x dim pairs, after one
/// untimed warm-up run per size.
std::vector<TimingRow> timing_bench(std::span<const int> sizes, const TimingOptions& options = {});

std::string sweep_to_csv(const SweepReport& report);
std::string sweep_to_json(const SweepReport& report);
std::string noise_to_csv(std::span<const NoiseRow> rows);
std::string noise_to_json(std::span<const NoiseRow> rows);
std::string timing_to_csv(std::span<const TimingRow> rows);
std::string timing_to_json(std::span<const TimingRow> rows);

}  // namespace amreg
