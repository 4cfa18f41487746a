#include "metamer/logpolar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "metamer/error.hpp"

namespace metamer {

namespace {

constexpr double kPi = std::numbers::pi;

int round_up(int v, int align) { return ((v + align - 1) / align) * align; }

double sample_bilinear(const Plane& img, double x, double y, EdgeFill fill) {
  const double max_x = img.width - 1, max_y = img.height - 1;
  if (fill == EdgeFill::Zero && (x < 0.0 || y < 0.0 || x > max_x || y > max_y)) return 0.0;
  x = std::clamp(x, 0.0, max_x);
  y = std::clamp(y, 0.0, max_y);
  const int x0 = std::min(static_cast<int>(x), img.width - 1);
  const int y0 = std::min(static_cast<int>(y), img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
  const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

}  // namespace

LogPolarMap::LogPolarMap(const PoolingGeometry& geom, int image_width, int image_height, int align)
    : geom_(geom), image_w_(image_width), image_h_(image_height) {
  if (geom.mode != PoolingMode::GazeCentric) throw InvalidArgument("log-polar map needs gaze-centric geometry");
  geom.validate();
  if (image_width < 1 || image_height < 1) throw InvalidArgument("empty image");
  if (align < 1) throw InvalidArgument("alignment must be >= 1");
  const double gx = geom.gaze_x, gy = geom.gaze_y;
  if (gx < 0.0 || gy < 0.0 || gx > image_width - 1 || gy > image_height - 1)
    throw InvalidArgument("gaze (" + std::to_string(gx) + ", " + std::to_string(gy) + ") outside image " +
                          std::to_string(image_width) + "x" + std::to_string(image_height));
  for (double cx : {0.0, image_width - 1.0})
    for (double cy : {0.0, image_height - 1.0}) e_max_ = std::max(e_max_, std::hypot(cx - gx, cy - gy));
  if (!(e_max_ > geom.fovea_radius))
    throw InvalidArgument("fovea radius " + std::to_string(geom.fovea_radius) + " covers the whole image");

  const double k_min = geom.warped_diameter / geom.eccentricity_rate;
  azimuth_ = round_up(static_cast<int>(std::ceil(2.0 * kPi * k_min - 1e-9)), align);
  k_ = azimuth_ / (2.0 * kPi);
  const int radial_min = static_cast<int>(std::ceil(k_ * std::log(e_max_ / geom.fovea_radius))) + 1;
  const int diameter_min = static_cast<int>(std::ceil(warped_diameter()));
  radial_ = round_up(std::max(radial_min, diameter_min), align);
}

PoolingGeometry LogPolarMap::warped_geometry() const {
  PoolingGeometry g;
  g.mode = PoolingMode::Uniform;
  g.region_diameter = warped_diameter();
  g.spacing_fraction = geom_.spacing_fraction;
  return g;
}

std::pair<double, double> LogPolarMap::to_warped(double x, double y) const {
  const double dx = x - geom_.gaze_x, dy = y - geom_.gaze_y;
  const double e = std::hypot(dx, dy);
  const double u = e <= geom_.fovea_radius ? 0.0 : k_ * std::log(e / geom_.fovea_radius);
  const double v = k_ * (std::atan2(dy, dx) + kPi);
  return {u, v};
}

std::pair<double, double> LogPolarMap::to_image(double u, double v) const {
  const double e = geom_.fovea_radius * std::exp(u / k_);
  const double phi = v / k_ - kPi;
  return {geom_.gaze_x + e * std::cos(phi), geom_.gaze_y + e * std::sin(phi)};
}

Plane logpolar_warp(const Plane& img, const LogPolarMap& map, EdgeFill fill) {
  if (img.width != map.image_width() || img.height != map.image_height())
    throw InvalidArgument("logpolar_warp: image size does not match the map");
  Plane out(map.radial_samples(), map.azimuth_samples());
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u) {
      const auto [x, y] = map.to_image(u, v);
      out(u, v) = sample_bilinear(img, x, y, fill);
    }
  return out;
}

Plane logpolar_warp(const Plane& img, const PoolingGeometry& geom, EdgeFill fill) {
  return logpolar_warp(img, LogPolarMap(geom, img.width, img.height), fill);
}

Plane logpolar_unwarp(const Plane& warped, const LogPolarMap& map) {
  if (warped.width != map.radial_samples() || warped.height != map.azimuth_samples())
    throw InvalidArgument("logpolar_unwarp: warped size does not match the map");
  const int nu = warped.width, nv = warped.height;
  Plane out(map.image_width(), map.image_height());
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      auto [u, v] = map.to_warped(x, y);
      u = std::clamp(u, 0.0, static_cast<double>(nu - 1));
      const int u0 = std::min(static_cast<int>(u), nu - 1);
      const int u1 = std::min(u0 + 1, nu - 1);
      const double fu = u - u0;
      const double vf = std::floor(v);
      const double fv = v - vf;
      int v0 = static_cast<int>(vf) % nv;
      if (v0 < 0) v0 += nv;
      const int v1 = (v0 + 1) % nv;
      const double a = warped(u0, v0) * (1.0 - fu) + warped(u1, v0) * fu;
      const double b = warped(u0, v1) * (1.0 - fu) + warped(u1, v1) * fu;
      out(x, y) = a * (1.0 - fv) + b * fv;
    }
  return out;
}

ImageBuffer logpolar_warp(const ImageBuffer& img, const LogPolarMap& map, EdgeFill fill) {
  std::vector<Plane> planes;
  for (int c = 0; c < img.channels(); ++c) planes.push_back(logpolar_warp(img.plane(c), map, fill));
  return ImageBuffer::from_planes(planes, img.space());
}

ImageBuffer logpolar_unwarp(const ImageBuffer& warped, const LogPolarMap& map) {
  std::vector<Plane> planes;
  for (int c = 0; c < warped.channels(); ++c) planes.push_back(logpolar_unwarp(warped.plane(c), map));
  return ImageBuffer::from_planes(planes, warped.space());
}

PooledStatistics pool_gaze(const StatisticSet& warped_stats, const LogPolarMap& map) {
  if (warped_stats.width != map.radial_samples() || warped_stats.height != map.azimuth_samples())
    throw InvalidArgument("pool_gaze: statistics were not computed on the warped image");
  PooledStatistics out = pool(warped_stats, map.warped_geometry());
  out.geometry = map.geometry();
  return out;
}

double fovea_blend_weight(double eccentricity, double fovea_radius) {
  const double band = 0.1 * fovea_radius;
  if (eccentricity <= fovea_radius) return 1.0;
  if (eccentricity >= fovea_radius + band) return 0.0;
  return 1.0 - (eccentricity - fovea_radius) / band;
}

}  // namespace metamer
