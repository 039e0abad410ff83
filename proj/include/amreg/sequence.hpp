#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amreg/alignment_metric.hpp"
#include "amreg/image.hpp"
#include "amreg/subpixel.hpp"

namespace amreg {

enum class AlignMode { First, Previous };

struct TrackEntry {
  int frame = 0;
  RealShift shift;  // applying -shift aligns the frame to frame 0
  CiAmScore score;
  std::optional<std::string> flag;
};

struct TranslationTrack {
  std::vector<TrackEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::vector<double> dx() const;
  std::vector<double> dy() const;
};

/// Registers every frame against frame 0 (First) or against its
/// predecessor with accumulation (Previous). A frame whose registration
/// fails keeps the preceding frame's shift and carries the error name as flag.
TranslationTrack align_sequence(std::span<const GrayImage> frames, AlignMode mode,
                                const RegisterOptions& options = {});

/// Frame t shifted by -shift_t and re-quantized.
std::vector<GrayImage> stabilize(std::span<const GrayImage> frames, const TranslationTrack& track);
/// Frame t shifted by +shift_t and re-quantized.
std::vector<GrayImage> restore(std::span<const GrayImage> frames, const TranslationTrack& track);

struct JitterReport {
  double variance_x = 0.0;
  double variance_y = 0.0;
};

JitterReport jitter_variance(std::span<const double> dx, std::span<const double> dy);
JitterReport jitter_variance(const TranslationTrack& track);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Per-frame Euclidean distance between matched points and ground truth.
std::vector<double> offset_series(std::span<const Point2> points, std::span<const Point2> truth);

/// Peak signal-to-noise ratio in dB over the pixels at least `margin` away
/// from every border; infinity for identical regions.
double interior_psnr(GrayView a, GrayView b, int margin);

// Track files: JSON array of {"frame", "dx", "dy", "am", "flag"} objects, with
// am either a number or "perfect"; CSV with header "frame,dx,dy,am,flag".
std::string track_to_json(const TranslationTrack& track);
std::string track_to_csv(const TranslationTrack& track);
TranslationTrack track_from_json(const std::string& text);
TranslationTrack track_from_csv(const std::string& text);
/// Format chosen by extension: ".csv" is CSV, anything else JSON.
void save_track(const TranslationTrack& track, const std::filesystem::path& path);
TranslationTrack load_track(const std::filesystem::path& path);

/// "frame_000042.pgm"
std::string frame_filename(int index);
/// Loads every *.pgm in the directory, sorted by the number in the name.
std::vector<GrayImage> load_frames(const std::filesystem::path& dir);
void save_frames(std::span<const GrayImage> frames, const std::filesystem::path& dir);

}  // namespace amreg
