#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "metamer/pyramid.hpp"
#include "metamer/statistics.hpp"

using namespace metamer;

namespace {

Plane roll(const Plane& p, int dx, int dy) {
  Plane out = p;
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) out((x + dx) % p.width, (y + dy) % p.height) = p(x, y);
  return out;
}

// Horizontal 16-pixel line centred in a 128x128 field.
Plane segment_fixture() {
  Plane p = fixtures::constant(128, 128, 0.0);
  for (int x = 56; x < 72; ++x) p(x, 64) = 1.0;
  return p;
}

// Endpoint and mid-segment end-stop response for the horizontal band at scale 1,
// evaluated directly from the magnitude with an integer shift along x.
struct SegmentResponse {
  double endpoint;
  double middle;
  double outside;  // largest response farther than 4 samples from both endpoints
};

SegmentResponse segment_response(const Plane& mag) {
  // Band-resolution coordinates: the segment spans x in [28, 36) on row 32.
  auto es = [&](int x, int y) {
    const double d = mag(x, y) - mag((x + 1) % mag.width, y);  // shift of one sample along -x
    return d * d;
  };
  SegmentResponse r{0.0, 0.0, 0.0};
  for (int y = 0; y < mag.height; ++y)
    for (int x = 0; x < mag.width; ++x) {
      const double v = es(x, y);
      const bool near_end = (std::abs(x - 28) <= 4 || std::abs(x - 36) <= 4) && std::abs(y - 32) <= 4;
      if (near_end) r.endpoint = std::max(r.endpoint, v);
      else r.outside = std::max(r.outside, v);
    }
  r.middle = std::max(es(31, 32), es(32, 32));
  return r;
}

}  // namespace

TEST(Catalog, CountsMatchEnumeration) {
  PyramidConfig cfg;
  EXPECT_EQ(statistic_count(cfg, false), 259u);
  EXPECT_EQ(statistic_catalog(cfg, false).size(), 259u);
  EXPECT_EQ(statistic_count(cfg, true), 993u);
  EXPECT_EQ(statistic_catalog(cfg, true).size(), 993u);
  cfg.scales = 4;
  cfg.orientations = 4;
  EXPECT_EQ(statistic_count(cfg, false), 97u);
  EXPECT_EQ(statistic_catalog(cfg, false).size(), 97u);
}

TEST(Catalog, CountFormula) {
  for (int s = 3; s <= 7; ++s)
    for (int k = 2; k <= 8; ++k) {
      PyramidConfig cfg;
      cfg.scales = s;
      cfg.orientations = k;
      const std::size_t so = static_cast<std::size_t>(s * k);
      const std::size_t per = 1 + so + so + static_cast<std::size_t>(s * k * (k - 1) / 2) +
                              2 * static_cast<std::size_t>((s - 1) * k) + so;
      EXPECT_EQ(statistic_count(cfg, false), per);
      EXPECT_EQ(statistic_count(cfg, true), 3 * per + 2 * 3 * so);
      EXPECT_EQ(statistic_catalog(cfg, true).size(), 3 * per + 2 * 3 * so);
    }
}

TEST(Catalog, EntriesAreUniqueAndValid) {
  PyramidConfig cfg;
  const auto cat = statistic_catalog(cfg, true);
  std::set<std::string> labels;
  for (const auto& k : cat) {
    labels.insert(k.label() + "/" + (k.is_cross_color() ? to_string(k.pair) : to_string(k.channel)));
    EXPECT_GE(k.scale, 0);
    EXPECT_LT(k.scale, cfg.scales);
    if (k.tag == StatTag::XOrientCorr) EXPECT_LT(k.orientation, k.orientation2);
    if (k.tag == StatTag::XScaleMagCorr || k.tag == StatTag::XScalePhaseCorr) EXPECT_LT(k.scale, cfg.scales - 1);
    EXPECT_EQ(k.is_cross_color(), k.channel == Channel::None);
  }
  EXPECT_EQ(labels.size(), cat.size());
}

TEST(Statistics, ConstantImage) {
  const double c = 0.4;
  const auto set = compute_statistics(fixtures::gray(fixtures::constant(128, 128, c)), PyramidConfig{});
  ASSERT_EQ(set.entries.size(), 259u);
  for (const auto& e : set.entries) {
    ASSERT_EQ(e.image.width, 128);
    ASSERT_EQ(e.image.height, 128);
    if (e.kind.tag == StatTag::PixelMean)
      for (double v : e.image.data) EXPECT_NEAR(v, c, 1e-12);
    else
      EXPECT_LE(fixtures::max_abs(e.image), 1e-9) << e.kind.label();
  }
}

TEST(Statistics, CatalogOrderIndependentOfContent) {
  PyramidConfig cfg;
  cfg.scales = 3;
  cfg.orientations = 4;
  const auto a = compute_statistics(fixtures::gray(fixtures::uniform_noise(32, 32, 1)), cfg);
  const auto b = compute_statistics(fixtures::gray(fixtures::natural_image(32, 32, 2)), cfg);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) EXPECT_EQ(a.entries[i].kind, b.entries[i].kind);
}

TEST(Statistics, FiniteAndNonNegativeMagnitudeTerms) {
  const Plane r = fixtures::natural_image(64, 64, 1), g = fixtures::natural_image(64, 64, 2),
              b = fixtures::natural_image(64, 64, 3);
  const auto set = compute_statistics(fixtures::rgb(r, g, b), PyramidConfig{});
  ASSERT_EQ(set.entries.size(), 993u);
  for (const auto& e : set.entries) {
    for (double v : e.image.data) ASSERT_TRUE(std::isfinite(v));
    if (e.kind.is_magnitude_derived())
      for (double v : e.image.data) ASSERT_GE(v, 0.0) << e.kind.label();
  }
}

TEST(Statistics, RawMomentsRecoverVariance) {
  const Plane img = fixtures::natural_image(128, 128, 5);
  const PyramidConfig cfg;
  const auto set = compute_statistics(fixtures::gray(img), cfg);
  const auto pyr = build_pyramid(img, cfg);
  for (const auto& e : set.entries) {
    if (e.kind.tag != StatTag::MagMean) continue;
    const auto s = static_cast<std::size_t>(e.kind.scale), o = static_cast<std::size_t>(e.kind.orientation);
    const auto it = std::find_if(set.entries.begin(), set.entries.end(), [&](const StatisticEntry& x) {
      return x.kind.tag == StatTag::MagSecondMoment && x.kind.scale == e.kind.scale &&
             x.kind.orientation == e.kind.orientation;
    });
    ASSERT_NE(it, set.entries.end());
    const Plane& m = pyr.magnitude[s][o];
    const double mean = m.mean();
    double var = 0.0;
    for (double v : m.data) var += (v - mean) * (v - mean);
    var /= static_cast<double>(m.size());
    const double mu = e.image.mean();
    EXPECT_NEAR(it->image.mean() - mu * mu, var, 1e-9);
  }
}

TEST(Statistics, GlobalMeansShiftInvariantOnDecimationGrid) {
  const Plane img = fixtures::natural_image(256, 256, 6);
  const auto a = compute_statistics(fixtures::gray(img), PyramidConfig{});
  const auto b = compute_statistics(fixtures::gray(roll(img, 64, 192)), PyramidConfig{});
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const double ma = a.entries[i].image.mean(), mb = b.entries[i].image.mean();
    EXPECT_NEAR(mb, ma, 1e-6 * std::max(std::abs(ma), 1e-12)) << a.entries[i].kind.label();
  }
}

TEST(Statistics, EnergyMeansShiftInvariantForAnyShift) {
  // Band energy is a Parseval quantity, so its mean is invariant for arbitrary shifts.
  const Plane img = fixtures::natural_image(256, 256, 7);
  const auto a = compute_statistics(fixtures::gray(img), PyramidConfig{});
  const auto b = compute_statistics(fixtures::gray(roll(img, 5, 11)), PyramidConfig{});
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto tag = a.entries[i].kind.tag;
    if (tag != StatTag::PixelMean && tag != StatTag::MagSecondMoment) continue;
    const double ma = a.entries[i].image.mean(), mb = b.entries[i].image.mean();
    EXPECT_NEAR(mb, ma, 1e-6 * std::abs(ma)) << a.entries[i].kind.label();
  }
}

TEST(Statistics, CrossColorTermsOfGrayImageFollowChannels) {
  // A gray RGB image has zero opponent planes, so every cross-color term vanishes.
  const Plane p = fixtures::natural_image(64, 64, 3);
  const auto set = compute_statistics(fixtures::rgb(p, p, p), PyramidConfig{});
  for (const auto& e : set.entries)
    if (e.kind.is_cross_color()) EXPECT_LE(fixtures::max_abs(e.image), 1e-9);
}

TEST(EndStop, ConstantMagnitudeGivesZero) {
  const Plane out = end_stop_image(fixtures::constant(16, 16, 2.0), 1.0, 0.7);
  EXPECT_LE(fixtures::max_abs(out), 1e-15);
}

TEST(EndStop, EdgeAngleIsPerpendicularToTuning) {
  EXPECT_NEAR(edge_angle(0, 6), std::numbers::pi / 2, 1e-15);
  EXPECT_NEAR(edge_angle(3, 6), std::numbers::pi, 1e-15);
}

TEST(EndStop, InfiniteEdgeHasNoResponse) {
  Plane edge(128, 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) edge(x, y) = x >= 32 && x < 96 ? 1.0 : 0.0;
  const PyramidConfig cfg;
  const auto pyr = build_pyramid(edge, cfg);
  for (int s = 0; s < cfg.scales; ++s) {
    const Plane& m = pyr.magnitude[static_cast<std::size_t>(s)][0];
    double e = 0.0;
    for (double v : m.data) e += v * v;
    const Plane es = end_stop_image(m, cfg.end_stop_shift, edge_angle(0, cfg.orientations));
    double sum = 0.0;
    for (double v : es.data) sum += v;
    EXPECT_LE(sum, 1e-6 * e) << "scale " << s;
  }
}

TEST(EndStop, SegmentEndpointsDominate) {
  const PyramidConfig cfg;
  const auto pyr = build_pyramid(segment_fixture(), cfg);
  const Plane& m = pyr.magnitude[1][3];
  const Plane es = end_stop_image(m, cfg.end_stop_shift, edge_angle(3, cfg.orientations));
  const SegmentResponse oracle = segment_response(m);
  // Library output matches the direct evaluation.
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      const double d = m(x, y) - m((x + 1) % m.width, y);
      ASSERT_NEAR(es(x, y), d * d, 1e-15);
    }
  EXPECT_GE(oracle.endpoint, 10.0 * oracle.middle);
  EXPECT_GE(oracle.endpoint, 10.0 * oracle.outside);
  RecordProperty("endpoint_to_middle", std::to_string(oracle.endpoint / oracle.middle));
}
