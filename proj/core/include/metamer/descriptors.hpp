#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "metamer/image.hpp"

namespace metamer {

enum class Descriptor { Coarseness, Contrast, Directionality, LineLikeness, Roughness, Regularity };

inline constexpr int kDescriptorCount = 6;

const char* to_string(Descriptor d);

struct DescriptorConfig {
  std::vector<int> window_sizes{32, 64, 128};
  int windows_per_size = 100;
  double variance_floor = 1e-5;
  double contrast_epsilon = 1e-4;
  int orientation_bins = 16;
  int scales = 6;
  std::uint64_t rng_seed = 0;

  /// Throws InvalidArgument; window sizes must fit inside width x height.
  void validate(int width, int height) const;
};

struct DescriptorVector {
  std::array<double, kDescriptorCount> values{};

  double& operator[](Descriptor d) { return values[static_cast<std::size_t>(d)]; }
  double operator[](Descriptor d) const { return values[static_cast<std::size_t>(d)]; }
};

/// Calibrated value = (raw - shift) / scale, clamped to [0, 1].
struct Calibration {
  std::string corpus = "intrinsic";
  double directionality_norm = 0.0;  // entropy divisor in 1 - 10^(e / norm)
  std::array<double, kDescriptorCount> shift{};
  std::array<double, kDescriptorCount> scale{};

  /// Constants from each raw descriptor's attainable range; used when no corpus calibration is given.
  static Calibration intrinsic(const DescriptorConfig& cfg);
  void validate() const;
};

// Building blocks. All take a luminance plane and treat it as periodic.

/// Mean over pixels of 10^s*, s* the finest scale maximizing the 2-orientation band response.
double coarseness_raw(const Plane& lum, int scales);

/// Mean over scales and pixels of |R_s - R_{s+1}| / (R_{s+1} + eps) on an undecimated
/// binomial (a trous) pyramid. Requires lum >= 0.
double contrast_raw(const Plane& lum, double epsilon, int scales);

/// Per-scale orientation histograms (unit mass) of pixels whose 2-orientation gradient
/// magnitude reaches mean - stddev. An empty histogram means no pixel qualified.
std::vector<std::vector<double>> orientation_histograms(const Plane& lum, int bins, int scales);

/// Natural-log entropy of a unit-mass histogram.
double entropy(const std::vector<double>& histogram);

/// 1 - 10^(entropy / norm).
double directionality_from_entropy(double entropy, double norm);

/// log10 of the mean analytic-band magnitude over 6 orientations and all scales, floored at 1e-12.
double roughness_raw(const Plane& lum, int scales);

struct WindowSample {
  int x = 0;
  int y = 0;
  bool kept = false;     // luminance variance reached the floor
  bool oriented = false; // some scale had an orientation histogram
  double entropy = 0.0;  // minimum over scales
  double coarseness = 0.0;
  double contrast = 0.0;
  double roughness = 0.0;
};

/// Everything that does not depend on calibration constants.
struct DescriptorMeasurements {
  bool flat = false;  // no bandpass energy
  double coarseness = 0.0;
  double contrast = 0.0;
  double roughness = 0.0;
  bool oriented = false;
  double entropy_min = 0.0;
  std::vector<int> window_sizes;
  std::vector<std::vector<WindowSample>> line_windows;        // entropy only
  std::vector<std::vector<WindowSample>> regularity_windows;  // all fields
};

/// Top-left corners for `count` windows of `size`, uniform and reproducible per (stream, size).
std::vector<std::pair<int, int>> window_corners(int width, int height, int size, int count, std::uint64_t seed,
                                                Descriptor stream);

DescriptorMeasurements measure_descriptors(const Plane& lum, const DescriptorConfig& cfg);

struct DescriptorResult {
  DescriptorVector raw;
  DescriptorVector calibrated;
  std::array<bool, kDescriptorCount> degenerate{};  // defined as 0 by convention
  bool clamped = false;                             // some calibrated value fell outside [0, 1]
  double line_mean_max = 0.0;                       // max over sizes of mean windowed directionality
  std::array<double, 4> sigma_min{};                // coarseness, contrast, directionality, roughness
};

DescriptorResult evaluate_descriptors(const DescriptorMeasurements& m, const Calibration& calib);

/// Luminance of `img` (any color space) then measure + evaluate.
DescriptorResult compute_descriptors(const ImageBuffer& img, const DescriptorConfig& cfg, const Calibration& calib);
DescriptorResult compute_descriptors(const Plane& lum, const DescriptorConfig& cfg, const Calibration& calib);

/// Min/max over the corpus. Regularity combines the other descriptors' calibrated window
/// values, so it is fitted after them. Throws InvalidArgument naming a descriptor whose
/// corpus range is zero.
Calibration calibrate(const std::vector<DescriptorMeasurements>& corpus, const DescriptorConfig& cfg,
                      const std::string& corpus_id);
Calibration calibrate(const std::vector<Plane>& corpus, const DescriptorConfig& cfg, const std::string& corpus_id);

void write_calibration(const std::string& path, const Calibration& calib);
Calibration read_calibration(const std::string& path);

struct DescriptorRow {
  std::string image;
  DescriptorVector values;
};

void write_descriptor_csv(std::ostream& out, const std::vector<DescriptorRow>& rows);

}  // namespace metamer
