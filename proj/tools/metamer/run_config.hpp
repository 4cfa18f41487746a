#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "metamer/descriptors.hpp"
#include "metamer/pooling.hpp"
#include "metamer/pyramid.hpp"
#include "metamer/synthesis.hpp"

namespace metamer::cli {

/// Every knob the tool exposes, addressable by a flat key. Defaults are the library's.
struct RunConfig {
  PyramidConfig pyramid;

  std::string pooling = "uniform";  // uniform | global | gaze
  double region_diameter = 32.0;
  double eccentricity_rate = 0.5;
  double spacing_fraction = 0.25;
  double gaze_x = 0.0;
  double gaze_y = 0.0;
  double fovea_radius = 0.0;  // pixels; 0 derives it from the viewing geometry
  double warped_diameter = 16.0;
  double screen_width_px = 1920.0;
  double field_of_view_deg = 29.0;
  double fovea_deg = 1.7;
  std::string edge_fill = "replicate";

  SynthesisConfig synthesis;
  DescriptorConfig descriptors;
  std::uint64_t rng_seed = 0;

  std::string input;
  std::string output;
  std::string trace;
  std::string seed_from;
  std::string calibration;

  /// Sets one key; throws InvalidArgument on an unknown key or a malformed value.
  void set(const std::string& key, const std::string& value);
  /// Reads `key = value` lines; `#` starts a comment.
  void load(const std::filesystem::path& path);

  static std::vector<std::string> keys();

  double effective_fovea_radius() const;
  PoolingGeometry geometry() const;
  /// Synthesis and descriptor configs with the shared rng seed fanned out.
  SynthesisConfig synthesis_config() const;
  DescriptorConfig descriptor_config() const;
};

/// "X,Y" -> pair; throws InvalidArgument.
std::pair<double, double> parse_pair(const std::string& text, char sep = ',');

}  // namespace metamer::cli
