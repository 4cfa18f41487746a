#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "metamer/error.hpp"
#include "metamer/pooling.hpp"
#include "metamer/resample.hpp"

using namespace metamer;

namespace {

// Independent profile: plateau to d/4, cos^2 falloff to d/2.
double profile(double r, double d) {
  if (r <= d / 4) return 1.0;
  if (r >= d / 2) return 0.0;
  const double t = (r - d / 4) / (d / 4);
  return std::pow(std::cos(std::numbers::pi / 2 * t), 2);
}

double profile_sum(double d) {
  const int r = static_cast<int>(std::ceil(d / 2));
  double s = 0.0;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x) s += profile(std::hypot(x, y), d);
  return s;
}

// Circular convolution with the kernel, sampled every `step` pixels.
Plane brute_pool(const Plane& img, double d, int step) {
  const int r = static_cast<int>(std::ceil(d / 2));
  const double norm = profile_sum(d);
  const int pw = (img.width + step - 1) / step, ph = (img.height + step - 1) / step;
  Plane out(pw, ph);
  for (int j = 0; j < ph; ++j)
    for (int i = 0; i < pw; ++i) {
      double s = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int x = ((i * step + dx) % img.width + img.width) % img.width;
          const int y = ((j * step + dy) % img.height + img.height) % img.height;
          s += profile(std::hypot(dx, dy), d) * img(x, y);
        }
      out(i, j) = s / norm;
    }
  return out;
}

}  // namespace

TEST(PoolingKernel, UnitSumAndSupport) {
  for (double d : {4.0, 7.0, 8.0, 16.0, 32.0, 33.5, 64.0}) {
    const Plane k = pooling_kernel(d);
    double s = 0.0;
    for (double v : k.data) s += v;
    EXPECT_NEAR(s, 1.0, 1e-9);
    const int c = k.width / 2;
    for (int y = 0; y < k.height; ++y)
      for (int x = 0; x < k.width; ++x) {
        const double r = std::hypot(x - c, y - c);
        if (r >= d / 2) EXPECT_EQ(k(x, y), 0.0);
        EXPECT_LE(k(x, y), k(c, c));
        EXPECT_NEAR(k(x, y), profile(r, d) / profile_sum(d), 1e-15);
      }
  }
  EXPECT_THROW(pooling_kernel(3.9), InvalidArgument);
}

TEST(PoolingKernel, RadialMonotone) {
  EXPECT_EQ(pooling_profile(0.0, 32), 1.0);
  double prev = 2.0;
  for (double r = 0.0; r <= 17.0; r += 0.25) {
    const double v = pooling_profile(r, 32);
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Pooling, ConstantFieldPreserved) {
  for (double d : {8.0, 16.0, 32.0, 64.0}) {
    const Plane out = pool_plane(fixtures::constant(128, 96, 0.37), PoolingGeometry::uniform(d));
    for (double v : out.data) EXPECT_NEAR(v, 0.37, 1e-9);
  }
}

TEST(Pooling, PooledShape) {
  const Plane out = pool_plane(fixtures::constant(128, 128, 1.0), PoolingGeometry::uniform(32));
  EXPECT_EQ(out.width, 16);
  EXPECT_EQ(out.height, 16);
  EXPECT_EQ(pooled_shape(PoolingGeometry::uniform(32), 130, 100), std::make_pair(17, 13));
  EXPECT_EQ(pooled_shape(PoolingGeometry::uniform(10, 0.25), 100, 100), std::make_pair(34, 34));  // step 3
}

TEST(Pooling, ImpulseRecoversKernel) {
  const double d = 20.0;
  Plane img(64, 64);
  img(21, 30) = 1.0;
  const auto geom = PoolingGeometry::uniform(d);
  const int step = geom.step();
  const Plane out = pool_plane(img, geom);
  const double norm = profile_sum(d);
  for (int j = 0; j < out.height; ++j)
    for (int i = 0; i < out.width; ++i) {
      const double r = std::hypot(21 - i * step, 30 - j * step);
      EXPECT_NEAR(out(i, j), profile(r, d) / norm, 1e-15);
    }
}

TEST(Pooling, MatchesBruteForce) {
  const Plane img = fixtures::uniform_noise(80, 64, 3);
  for (double d : {8.0, 13.0, 32.0}) {
    const auto geom = PoolingGeometry::uniform(d);
    const Plane a = pool_plane(img, geom), b = brute_pool(img, d, geom.step());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], 1e-12);
  }
}

TEST(Pooling, Linear) {
  const Plane s1 = fixtures::uniform_noise(64, 64, 1), s2 = fixtures::uniform_noise(64, 64, 2);
  Plane mix(64, 64);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = 1.5 * s1.data[i] - 0.25 * s2.data[i];
  const auto geom = PoolingGeometry::uniform(16);
  const Plane a = pool_plane(s1, geom), b = pool_plane(s2, geom), m = pool_plane(mix, geom);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(m.data[i], 1.5 * a.data[i] - 0.25 * b.data[i], 1e-14);
}

TEST(Pooling, DiameterLargerThanImageFails) {
  EXPECT_THROW(pool_plane(fixtures::constant(32, 64, 1.0), PoolingGeometry::uniform(40)), InvalidArgument);
  EXPECT_THROW(PoolingGeometry::uniform(32, 0.0), InvalidArgument);
  EXPECT_THROW(PoolingGeometry::uniform(32, 1.5), InvalidArgument);
}

TEST(Pooling, LatticeOverlap) {
  // With spacing 1/4, each pixel lies inside >= 4 region disks (radius d/2, closed) per
  // axis; pixels exactly on a lattice point see the two outermost ones at zero weight,
  // so at least 3 regions carry positive weight everywhere.
  const double d = 32.0;
  const int step = PoolingGeometry::uniform(d).step();
  const int n = 128;
  for (int x = 0; x < n; ++x) {
    int closed = 0, positive = 0;
    for (int p = 0; p < n; p += step) {
      int dist = std::abs(x - p);
      dist = std::min(dist, n - dist);
      if (dist <= d / 2) ++closed;
      if (pooling_profile(dist, d) > 0.0) ++positive;
    }
    EXPECT_GE(closed, 4) << x;
    EXPECT_GE(positive, x % step == 0 ? 3 : 4) << x;
  }
}

TEST(Pooling, GlobalIsMean) {
  const Plane img = fixtures::uniform_noise(24, 20, 4);
  const Plane out = pool_plane(img, PoolingGeometry::global());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out.data[0], img.mean(), 1e-14);
}

TEST(LevelPooler, EqualsUpsampleThenPool) {
  const auto geom = PoolingGeometry::uniform(16);
  const int fw = 100, fh = 72;
  for (auto [lw, lh] : {std::pair{100, 72}, {50, 36}, {25, 18}, {13, 9}, {7, 5}}) {
    const Plane z = fixtures::uniform_noise(lw, lh, static_cast<std::uint64_t>(lw));
    const Plane direct = pool_plane(resize_circular(z, fw, fh), geom);
    const Plane fused = LevelPooler(geom, fw, fh, lw, lh).apply(z);
    ASSERT_EQ(direct.size(), fused.size());
    for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(fused.data[i], direct.data[i], 1e-13) << lw;
  }
}

TEST(LevelPooler, GlobalEqualsUpsampledMean) {
  const Plane z = fixtures::uniform_noise(5, 3, 9);
  const Plane up = resize_circular(z, 16, 12);
  const Plane fused = LevelPooler(PoolingGeometry::global(), 16, 12, 5, 3).apply(z);
  EXPECT_NEAR(fused.data[0], up.mean(), 1e-14);
}

TEST(LevelPooler, AdjointIdentity) {
  const auto geom = PoolingGeometry::uniform(12);
  const LevelPooler p(geom, 60, 44, 15, 11);
  const Plane z = fixtures::uniform_noise(15, 11, 1, -1, 1);
  const Plane g = fixtures::uniform_noise(p.pooled_width(), p.pooled_height(), 2, -1, 1);
  const Plane fz = p.apply(z);
  Plane back;
  p.accumulate_adjoint(g, back);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < fz.size(); ++i) lhs += fz.data[i] * g.data[i];
  for (std::size_t i = 0; i < z.size(); ++i) rhs += z.data[i] * back.data[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(Pool, StatisticSetKeepsCatalog) {
  StatisticSet set;
  set.width = 64;
  set.height = 64;
  StatisticKind k;
  set.entries.push_back({k, fixtures::constant(64, 64, 2.0)});
  k.tag = StatTag::MagMean;
  set.entries.push_back({k, fixtures::constant(64, 64, 3.0)});
  const auto pooled = pool(set, PoolingGeometry::uniform(32));
  ASSERT_EQ(pooled.entries.size(), 2u);
  EXPECT_EQ(pooled.entries[1].kind.tag, StatTag::MagMean);
  for (double v : pooled.entries[1].values.data) EXPECT_NEAR(v, 3.0, 1e-12);
  EXPECT_EQ(pooled.entries[0].values.width, 8);
}

TEST(Geometry, FoveaFromViewingGeometry) {
  EXPECT_NEAR(fovea_radius_pixels(1920, 29), 0.85 * 1920 / 29, 1e-12);
  EXPECT_THROW(fovea_radius_pixels(0, 29), InvalidArgument);
  EXPECT_THROW(PoolingGeometry::gaze_centric(10, 10, 0.0, 20), InvalidArgument);
  EXPECT_THROW(PoolingGeometry::gaze_centric(10, 10, 0.5, 0.5), InvalidArgument);
}
