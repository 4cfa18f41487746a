#pragma once

#include <vector>

#include "metamer/image.hpp"
#include "metamer/statistics.hpp"

namespace metamer {

/// Global is a single region covering the whole image with uniform weights
/// (used for the gradient harness and small texture runs).
enum class PoolingMode { Uniform, GazeCentric, Global };

const char* to_string(PoolingMode mode);

struct PoolingGeometry {
  PoolingMode mode = PoolingMode::Uniform;
  double region_diameter = 32.0;     // Uniform: pixels
  double eccentricity_rate = 0.5;    // GazeCentric: diameter = rate * eccentricity
  double spacing_fraction = 0.25;
  double gaze_x = 0.0;               // GazeCentric
  double gaze_y = 0.0;
  double fovea_radius = 56.0;        // GazeCentric: pixels, left unpooled
  double warped_diameter = 16.0;     // GazeCentric: minimum warped-space diameter, samples

  static PoolingGeometry uniform(double diameter, double spacing = 0.25);
  static PoolingGeometry global();
  static PoolingGeometry gaze_centric(double gx, double gy, double rate, double fovea_radius,
                                      double spacing = 0.25);

  void validate() const;
  /// Lattice stride in pixels of the pooling domain (Uniform).
  int step() const;
};

/// Radius in pixels of a fovea spanning `fovea_diameter_deg` for a display `screen_width_px`
/// wide covering `field_of_view_deg` horizontally.
double fovea_radius_pixels(double screen_width_px, double field_of_view_deg, double fovea_diameter_deg = 1.7);

/// Unnormalized radial profile: 1 up to diameter/4, squared-cosine falloff to 0 at diameter/2.
double pooling_profile(double r, double diameter);

/// Sampled kernel, (2R+1)^2 with the center at (R, R), normalized to unit sum.
Plane pooling_kernel(double diameter);

struct PooledEntry {
  StatisticKind kind;
  Plane values;
};

struct PooledStatistics {
  PoolingGeometry geometry;
  int source_width = 0;   // dimensions of the pooling domain (warped image for gaze)
  int source_height = 0;
  std::vector<PooledEntry> entries;
};

/// Pooled dimensions for a pooling domain of width x height.
std::pair<int, int> pooled_shape(const PoolingGeometry& geom, int width, int height);

/// Blur-and-sample of a plane that lives on a coarser grid (level_w x level_h) as if it had
/// first been bilinearly upsampled (resize_circular) to full_w x full_h. The composite is
/// precomputed as per-phase stencils on the coarse grid.
class LevelPooler {
 public:
  LevelPooler(const PoolingGeometry& geom, int full_w, int full_h, int level_w, int level_h);

  int pooled_width() const { return static_cast<int>(ax_.start.size()); }
  int pooled_height() const { return static_cast<int>(ay_.start.size()); }
  int level_width() const { return level_w_; }
  int level_height() const { return level_h_; }

  Plane apply(const Plane& z) const;
  /// Adds the adjoint of apply() applied to `grad` into `out` (level-sized).
  void accumulate_adjoint(const Plane& grad, Plane& out) const;

 private:
  // The level plane is read through a circularly padded copy so every stencil row is a
  // contiguous run.
  struct Axis {
    std::vector<int> start;      // first padded index read by each lattice coordinate
    std::vector<int> key_index;  // phase class of each lattice coordinate
    int pad_lo = 0;              // padded index 0 maps to level index -pad_lo
    int padded = 0;
  };
  struct Stencil {
    int rows = 0;
    int cols = 0;
    std::vector<double> w;
    std::vector<int> col_begin;  // nonzero column range per row
    std::vector<int> col_end;
  };

  Plane pad(const Plane& z) const;

  int level_w_, level_h_;
  Axis ax_, ay_;
  std::vector<Stencil> stencils_;  // [key_y * n_key_x + key_x]
  int n_key_x_ = 0;
};

/// Circular convolution with pooling_kernel sampled on the lattice (Uniform or Global).
Plane pool_plane(const Plane& stat, const PoolingGeometry& geom);
PooledStatistics pool(const StatisticSet& stats, const PoolingGeometry& geom);

}  // namespace metamer
