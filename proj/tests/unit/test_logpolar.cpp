#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "metamer/error.hpp"
#include "metamer/logpolar.hpp"

using namespace metamer;

namespace {

PoolingGeometry center_geom(int n, double fovea = 32.0) {
  return PoolingGeometry::gaze_centric((n - 1) / 2.0, (n - 1) / 2.0, 0.5, fovea);
}

// RMS of (a - b) over the annulus [2 r_f, 0.9 e_max], relative to the range of a.
double annulus_rms(const Plane& a, const Plane& b, const LogPolarMap& map) {
  const auto& g = map.geometry();
  double s = 0.0, lo = 1e300, hi = -1e300;
  std::size_t n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      const double e = std::hypot(x - g.gaze_x, y - g.gaze_y);
      lo = std::min(lo, a(x, y));
      hi = std::max(hi, a(x, y));
      if (e < 2 * g.fovea_radius || e > 0.9 * map.max_eccentricity()) continue;
      s += (a(x, y) - b(x, y)) * (a(x, y) - b(x, y));
      ++n;
    }
  return std::sqrt(s / static_cast<double>(n)) / (hi - lo);
}

}  // namespace

TEST(LogPolar, PointOnPositiveXAxis) {
  const LogPolarMap map(center_geom(256), 256, 256);
  const double k = map.radial_scale();
  const auto& g = map.geometry();
  for (double e : {40.0, 60.0, 100.0}) {
    const auto [u, v] = map.to_warped(g.gaze_x + e, g.gaze_y);
    EXPECT_NEAR(u, k * std::log(e / g.fovea_radius), 1e-12);
    EXPECT_NEAR(v, map.azimuth_samples() / 2.0, 1e-9);
  }
}

TEST(LogPolar, OctaveIsKLog2) {
  const LogPolarMap map(center_geom(256), 256, 256);
  const auto& g = map.geometry();
  const auto a = map.to_warped(g.gaze_x + 40 * std::cos(1.0), g.gaze_y + 40 * std::sin(1.0));
  const auto b = map.to_warped(g.gaze_x + 80 * std::cos(1.0), g.gaze_y + 80 * std::sin(1.0));
  EXPECT_NEAR(b.first - a.first, map.radial_scale() * std::log(2.0), 1e-12);
  EXPECT_NEAR(b.second, a.second, 1e-12);
}

TEST(LogPolar, WarpedDiameterAndAlignment) {
  const LogPolarMap map(center_geom(512, 56), 512, 512, 64);
  EXPECT_GE(map.warped_diameter(), 16.0);
  EXPECT_EQ(map.radial_samples() % 64, 0);
  EXPECT_EQ(map.azimuth_samples() % 64, 0);
  EXPECT_NEAR(map.radial_scale() * 2.0 * std::numbers::pi, map.azimuth_samples(), 1e-9);
  const auto [u, v] = map.to_warped(0, 0);
  EXPECT_LE(u, map.radial_samples() - 1);
  EXPECT_GE(v, 0.0);
}

TEST(LogPolar, InverseMapRoundTrips) {
  const LogPolarMap map(center_geom(200), 200, 200);
  for (double x : {10.0, 150.0, 199.0})
    for (double y : {3.0, 120.0}) {
      const auto [u, v] = map.to_warped(x, y);
      const auto [x2, y2] = map.to_image(u, v);
      EXPECT_NEAR(x2, x, 1e-9);
      EXPECT_NEAR(y2, y, 1e-9);
    }
}

TEST(LogPolar, MonotoneInEccentricity) {
  const LogPolarMap map(center_geom(256), 256, 256);
  const auto& g = map.geometry();
  double prev = -1.0;
  for (double e = g.fovea_radius + 0.5; e < 120; e += 0.5) {
    const double u = map.to_warped(g.gaze_x, g.gaze_y + e).first;
    EXPECT_GT(u, prev);
    prev = u;
  }
  EXPECT_EQ(map.to_warped(g.gaze_x + 5, g.gaze_y).first, 0.0);
}

TEST(LogPolar, ConstantRoundTripExact) {
  const LogPolarMap map(center_geom(128, 20), 128, 128);
  const Plane c = fixtures::constant(128, 128, 0.42);
  const Plane back = logpolar_unwarp(logpolar_warp(c, map), map);
  for (double v : back.data) EXPECT_NEAR(v, 0.42, 1e-6);
}

TEST(LogPolar, SmoothRoundTrip) {
  const Plane img = fixtures::smooth_image(512, 512, 3);
  const LogPolarMap map(center_geom(512, 56), 512, 512, 64);
  const Plane back = logpolar_unwarp(logpolar_warp(img, map), map);
  const double err = annulus_rms(img, back, map);
  EXPECT_LE(err, 0.02);
  RecordProperty("relative_rms", std::to_string(err));
}

TEST(LogPolar, AzimuthSeamIsContinuous) {
  // Unwarp of a warped field that varies smoothly in azimuth shows no seam jump across
  // the -x axis, where v wraps.
  const LogPolarMap map(center_geom(256), 256, 256);
  Plane w(map.radial_samples(), map.azimuth_samples());
  for (int v = 0; v < w.height; ++v)
    for (int u = 0; u < w.width; ++u) w(u, v) = std::cos(2 * std::numbers::pi * v / w.height);
  const Plane img = logpolar_unwarp(w, map);
  const auto& g = map.geometry();
  const int x = static_cast<int>(g.gaze_x) - 80;
  const int y0 = static_cast<int>(std::floor(g.gaze_y)), y1 = y0 + 1;
  EXPECT_NEAR(img(x, y0), img(x, y1), 0.01);
  EXPECT_NEAR(img(x, y0), 1.0, 0.01);
}

TEST(LogPolar, GazeOutsideImageRejected) {
  EXPECT_THROW(LogPolarMap(PoolingGeometry::gaze_centric(300, 10, 0.5, 20), 256, 256), InvalidArgument);
  EXPECT_THROW(LogPolarMap(PoolingGeometry::gaze_centric(-1, 10, 0.5, 20), 256, 256), InvalidArgument);
  EXPECT_THROW(LogPolarMap(PoolingGeometry::gaze_centric(10, 10, 0.5, 2000), 256, 256), InvalidArgument);
}

TEST(LogPolar, CornerGazeZeroFillLeavesOutsideEmpty) {
  const auto geom = PoolingGeometry::gaze_centric(0, 0, 0.5, 20);
  const LogPolarMap map(geom, 128, 128);
  const Plane w = logpolar_warp(fixtures::constant(128, 128, 1.0), map, EdgeFill::Zero);
  int zeros = 0, ones = 0;
  for (int v = 0; v < w.height; ++v)
    for (int u = 0; u < w.width; ++u) {
      const auto [x, y] = map.to_image(u, v);
      const bool inside = x >= 0 && y >= 0 && x <= 127 && y <= 127;
      if (inside) {
        EXPECT_NEAR(w(u, v), 1.0, 1e-12);
        ++ones;
      } else {
        EXPECT_EQ(w(u, v), 0.0);
        ++zeros;
      }
    }
  EXPECT_GT(ones, 0);
  EXPECT_GT(zeros, ones);  // only one quadrant lies inside
}

TEST(PoolGaze, ConstantAndShape) {
  const LogPolarMap map(center_geom(256), 256, 256, 8);
  StatisticSet set;
  set.width = map.radial_samples();
  set.height = map.azimuth_samples();
  set.entries.push_back({StatisticKind{}, fixtures::constant(set.width, set.height, 0.8)});
  const auto pooled = pool_gaze(set, map);
  EXPECT_EQ(pooled.geometry.mode, PoolingMode::GazeCentric);
  const auto [pw, ph] = pooled_shape(map.warped_geometry(), set.width, set.height);
  EXPECT_EQ(pooled.entries[0].values.width, pw);
  EXPECT_EQ(pooled.entries[0].values.height, ph);
  for (double v : pooled.entries[0].values.data) EXPECT_NEAR(v, 0.8, 1e-9);
}

TEST(FoveaBlend, Ramp) {
  EXPECT_EQ(fovea_blend_weight(10, 50), 1.0);
  EXPECT_EQ(fovea_blend_weight(50, 50), 1.0);
  EXPECT_NEAR(fovea_blend_weight(52.5, 50), 0.5, 1e-12);
  EXPECT_EQ(fovea_blend_weight(55, 50), 0.0);
}
