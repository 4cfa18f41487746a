#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "metamer/error.hpp"
#include "metamer/image.hpp"
#include "metamer/png_io.hpp"

using namespace metamer;

namespace {

std::filesystem::path tmp_dir() {
  std::filesystem::path p = METAMER_TEST_TMP;
  std::filesystem::create_directories(p);
  return p;
}

// Standard sRGB electro-optical transfer, written out independently.
double reference_decode(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

ImageBuffer pixel(double r, double g, double b) {
  ImageBuffer img(1, 1, 3, ColorSpace::LinearRGB);
  img.channel(0)[0] = r;
  img.channel(1)[0] = g;
  img.channel(2)[0] = b;
  return img;
}

}  // namespace

TEST(Srgb, EndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(srgb_decode(1.0), 1.0);
  EXPECT_DOUBLE_EQ(srgb_decode(0.0), 0.0);
  const double expected = reference_decode(128.0 / 255.0);
  EXPECT_NEAR(expected, 0.2158, 1e-4);
  EXPECT_NEAR(srgb_decode(128.0 / 255.0), expected, 1e-12);
}

TEST(Srgb, EncodeInvertsDecode) {
  for (double v = 0.0; v <= 1.0; v += 0.01) EXPECT_NEAR(srgb_encode(srgb_decode(v)), v, 1e-12);
}

TEST(Luminance, PrimariesAndWhite) {
  EXPECT_NEAR(to_luminance(pixel(1, 1, 1)).channel(0)[0], 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(to_luminance(pixel(1, 0, 0)).channel(0)[0], 0.2126);
  EXPECT_DOUBLE_EQ(to_luminance(pixel(0, 1, 0)).channel(0)[0], 0.7152);
  EXPECT_DOUBLE_EQ(to_luminance(pixel(0, 0, 1)).channel(0)[0], 0.0722);
}

TEST(Luminance, WeightedSumEverywhere) {
  const auto img = fixtures::rgb(fixtures::uniform_noise(9, 7, 1), fixtures::uniform_noise(9, 7, 2),
                                 fixtures::uniform_noise(9, 7, 3));
  const auto y = to_luminance(img);
  for (std::size_t i = 0; i < img.plane_size(); ++i)
    EXPECT_DOUBLE_EQ(y.channel(0)[i],
                     0.2126 * img.channel(0)[i] + 0.7152 * img.channel(1)[i] + 0.0722 * img.channel(2)[i]);
}

TEST(Luminance, RejectsWrongSpace) {
  EXPECT_THROW(to_luminance(fixtures::gray(fixtures::constant(2, 2, 0.5))), InvalidArgument);
}

TEST(Opponent, GrayAxisHasNoOpponentSignal) {
  for (double v : {0.0, 0.01, 0.2, 0.5, 0.9, 1.0}) {
    const auto o = to_opponent(pixel(v, v, v));
    EXPECT_NEAR(o.red_green.data[0], 0.0, 1e-6) << v;
    EXPECT_NEAR(o.blue_yellow.data[0], 0.0, 1e-6) << v;
  }
}

TEST(Opponent, WhiteIsTopOfAchromaticRange) {
  const auto o = to_opponent(pixel(1, 1, 1));
  EXPECT_NEAR(o.achromatic.data[0], 1.0, 1e-9);
  EXPECT_NEAR(o.red_green.data[0], 0.0, 1e-9);
  EXPECT_NEAR(o.blue_yellow.data[0], 0.0, 1e-9);
}

TEST(Opponent, RedIsPositiveOnRedGreenAxis) {
  EXPECT_GT(to_opponent(pixel(1, 0, 0)).red_green.data[0], 0.0);
  EXPECT_LT(to_opponent(pixel(0, 1, 0)).red_green.data[0], 0.0);
  EXPECT_GT(to_opponent(pixel(1, 1, 0)).blue_yellow.data[0], 0.0);
}

TEST(Opponent, AchromaticMonotoneInLuminance) {
  double prev = -1.0;
  for (double v = 0.0; v <= 1.0; v += 0.05) {
    const double a = to_opponent(pixel(v, v, v)).achromatic.data[0];
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(Opponent, LinearTestModeIsLinear) {
  const auto a = fixtures::rgb(fixtures::uniform_noise(5, 4, 1), fixtures::uniform_noise(5, 4, 2),
                               fixtures::uniform_noise(5, 4, 3));
  const auto b = fixtures::rgb(fixtures::uniform_noise(5, 4, 4), fixtures::uniform_noise(5, 4, 5),
                               fixtures::uniform_noise(5, 4, 6));
  const double alpha = 0.3;
  ImageBuffer mix(5, 4, 3, ColorSpace::LinearRGB);
  for (std::size_t i = 0; i < mix.data().size(); ++i)
    mix.data()[i] = alpha * a.data()[i] + (1 - alpha) * b.data()[i];
  const auto oa = to_opponent(a, OpponentMode::LinearTest);
  const auto ob = to_opponent(b, OpponentMode::LinearTest);
  const auto om = to_opponent(mix, OpponentMode::LinearTest);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 20; ++i)
      EXPECT_NEAR(om.channel(c).data[i], alpha * oa.channel(c).data[i] + (1 - alpha) * ob.channel(c).data[i], 1e-12);
}

TEST(Opponent, AdjointMatchesFiniteDifferences) {
  const auto img = fixtures::rgb(fixtures::uniform_noise(3, 2, 7, 0.05, 0.95), fixtures::uniform_noise(3, 2, 8, 0.05, 0.95),
                                 fixtures::uniform_noise(3, 2, 9, 0.05, 0.95));
  OpponentImage w;
  w.achromatic = fixtures::uniform_noise(3, 2, 10, -1, 1);
  w.red_green = fixtures::uniform_noise(3, 2, 11, -1, 1);
  w.blue_yellow = fixtures::uniform_noise(3, 2, 12, -1, 1);
  for (auto mode : {OpponentMode::Lab, OpponentMode::LinearTest}) {
    auto f = [&](const ImageBuffer& x) {
      const auto o = to_opponent(x, mode);
      double s = 0.0;
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 6; ++i) s += o.channel(c).data[i] * w.channel(c).data[i];
      return s;
    };
    const auto g = opponent_adjoint(img, w, mode);
    for (std::size_t k = 0; k < img.data().size(); ++k) {
      ImageBuffer p = img, m = img;
      p.data()[k] += 1e-6;
      m.data()[k] -= 1e-6;
      const double fd = (f(p) - f(m)) / 2e-6;
      EXPECT_NEAR(g.data()[k], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Png, RoundTripWithinQuantization) {
  const auto img = fixtures::rgb(fixtures::uniform_noise(17, 11, 1), fixtures::uniform_noise(17, 11, 2),
                                 fixtures::uniform_noise(17, 11, 3));
  const auto path = tmp_dir() / "roundtrip.png";
  save_image(img, path);
  const auto back = load_image(path);
  ASSERT_EQ(back.space(), ColorSpace::LinearRGB);
  ASSERT_EQ(back.channels(), 3);
  // Half a 16-bit code in the encoded domain, mapped through the steepest slope of the
  // decode curve (1/12.92 near black, 2.4/1.055 near white).
  const double bound = 0.5 / 65535.0 * (2.4 / 1.055) + 1e-12;
  for (std::size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(back.data()[i], img.data()[i], bound);
}

TEST(Png, Loads8BitGray) {
  // 3x1 8-bit grayscale PNG holding 0, 128, 255.
  static const unsigned char bytes[] = {
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d, 0x49, 0x48, 0x44, 0x52, 0x00, 0x00,
      0x00, 0x03, 0x00, 0x00, 0x00, 0x01, 0x08, 0x00, 0x00, 0x00, 0x00, 0x3e, 0x8b, 0x4b, 0x68, 0x00, 0x00, 0x00,
      0x0c, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0x68, 0xf8, 0x0f, 0x00, 0x02, 0x03, 0x01, 0x80, 0x24,
      0x61, 0xf5, 0x97, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82};
  const auto path = tmp_dir() / "g8.png";
  {
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
  }
  const auto img = load_image(path);
  ASSERT_EQ(img.space(), ColorSpace::Gray);
  ASSERT_EQ(img.width(), 3);
  EXPECT_DOUBLE_EQ(img.channel(0)[0], 0.0);
  EXPECT_NEAR(img.channel(0)[1], reference_decode(128.0 / 255.0), 1e-12);
  EXPECT_DOUBLE_EQ(img.channel(0)[2], 1.0);
}

TEST(Png, ClampsOnSave) {
  ImageBuffer img(2, 1, 1, ColorSpace::Gray);
  img.channel(0)[0] = 1.2;
  img.channel(0)[1] = -0.1;
  const auto path = tmp_dir() / "clamp.png";
  save_image(img, path);
  const auto back = load_image(path);
  EXPECT_DOUBLE_EQ(back.channel(0)[0], 1.0);
  EXPECT_DOUBLE_EQ(back.channel(0)[1], 0.0);
}

TEST(Png, RejectsNonFinite) {
  ImageBuffer img(1, 1, 1, ColorSpace::Gray);
  img.channel(0)[0] = std::nan("");
  EXPECT_THROW(save_image(img, tmp_dir() / "nan.png"), InvalidArgument);
}

TEST(Png, MissingFileIsDescriptive) {
  try {
    load_image("/nonexistent/file.png");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/file.png"), std::string::npos);
  }
}

TEST(Png, GarbageFileRejected) {
  const auto path = tmp_dir() / "garbage.png";
  {
    std::ofstream os(path);
    os << "not a png";
  }
  EXPECT_THROW(load_image(path), IoError);
}
