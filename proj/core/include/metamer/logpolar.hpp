#pragma once

#include <utility>

#include "metamer/image.hpp"
#include "metamer/pooling.hpp"

namespace metamer {

/// How warped samples that fall outside the source image are filled.
enum class EdgeFill { Replicate, Zero };

/// Log-polar map around the gaze point. Columns carry u = k*ln(e / fovea_radius)
/// (eccentricity e; pixels inside the fovea map to u = 0), rows carry the azimuth
/// v = k*(phi + pi), circular. A region of diameter rate*e at eccentricity e maps to a
/// disk of roughly k*rate samples, so k is chosen to make that diameter at least
/// geom.warped_diameter. Both warped dimensions are rounded up to multiples of `align`.
class LogPolarMap {
 public:
  LogPolarMap(const PoolingGeometry& geom, int image_width, int image_height, int align = 1);

  const PoolingGeometry& geometry() const { return geom_; }
  int image_width() const { return image_w_; }
  int image_height() const { return image_h_; }
  int radial_samples() const { return radial_; }    // warped width
  int azimuth_samples() const { return azimuth_; }  // warped height
  double radial_scale() const { return k_; }
  double max_eccentricity() const { return e_max_; }
  /// Constant warped-space pooling diameter.
  double warped_diameter() const { return k_ * geom_.eccentricity_rate; }
  /// Uniform geometry that pools the warped image.
  PoolingGeometry warped_geometry() const;

  std::pair<double, double> to_warped(double x, double y) const;
  std::pair<double, double> to_image(double u, double v) const;

 private:
  PoolingGeometry geom_;
  int image_w_, image_h_;
  int radial_ = 0, azimuth_ = 0;
  double k_ = 0.0;
  double e_max_ = 0.0;
};

Plane logpolar_warp(const Plane& img, const LogPolarMap& map, EdgeFill fill = EdgeFill::Replicate);
Plane logpolar_unwarp(const Plane& warped, const LogPolarMap& map);
ImageBuffer logpolar_warp(const ImageBuffer& img, const LogPolarMap& map, EdgeFill fill = EdgeFill::Replicate);
ImageBuffer logpolar_unwarp(const ImageBuffer& warped, const LogPolarMap& map);

/// Convenience overloads that derive the map from the image size.
Plane logpolar_warp(const Plane& img, const PoolingGeometry& geom, EdgeFill fill = EdgeFill::Replicate);

/// Uniform pooling of warped-space statistics at the map's warped diameter; the result
/// records the gaze-centric geometry.
PooledStatistics pool_gaze(const StatisticSet& warped_stats, const LogPolarMap& map);

/// Weight of the original image in the foveal copy-blend: 1 inside the fovea, linear
/// ramp to 0 over [fovea_radius, 1.1 * fovea_radius].
double fovea_blend_weight(double eccentricity, double fovea_radius);

}  // namespace metamer
