#include "metamer/image.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "metamer/error.hpp"

namespace metamer {

const char* to_string(ColorSpace space) {
  switch (space) {
    case ColorSpace::sRGB8: return "sRGB8";
    case ColorSpace::LinearRGB: return "linearRGB";
    case ColorSpace::Opponent: return "opponent";
    case ColorSpace::Gray: return "gray";
  }
  return "unknown";
}

Plane::Plane(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

double Plane::mean() const {
  if (data.empty()) return 0.0;
  return std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
}

ComplexPlane::ComplexPlane(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h) {}

ImageBuffer::ImageBuffer(int width, int height, int channels, ColorSpace space)
    : width_(width), height_(height), channels_(channels), space_(space) {
  if (width <= 0 || height <= 0) throw InvalidArgument("image dimensions must be positive");
  if (channels < 1 || channels > 3) throw InvalidArgument("image must have 1 to 3 channels");
  data_.assign(static_cast<std::size_t>(width) * height * channels, 0.0);
}

ImageBuffer ImageBuffer::from_planes(const std::vector<Plane>& planes, ColorSpace space) {
  if (planes.empty()) throw InvalidArgument("from_planes: no planes");
  ImageBuffer img(planes[0].width, planes[0].height, static_cast<int>(planes.size()), space);
  for (int c = 0; c < img.channels(); ++c) {
    const Plane& p = planes[static_cast<std::size_t>(c)];
    if (p.width != img.width() || p.height != img.height())
      throw InvalidArgument("from_planes: plane dimensions differ");
    std::copy(p.data.begin(), p.data.end(), img.channel(c).begin());
  }
  return img;
}

std::span<double> ImageBuffer::channel(int c) {
  return std::span<double>(data_).subspan(static_cast<std::size_t>(c) * plane_size(), plane_size());
}

std::span<const double> ImageBuffer::channel(int c) const {
  return std::span<const double>(data_).subspan(static_cast<std::size_t>(c) * plane_size(), plane_size());
}

Plane ImageBuffer::plane(int c) const {
  Plane p(width_, height_);
  auto src = channel(c);
  std::copy(src.begin(), src.end(), p.data.begin());
  return p;
}

const Plane& OpponentImage::channel(int c) const {
  return c == 0 ? achromatic : (c == 1 ? red_green : blue_yellow);
}

Plane& OpponentImage::channel(int c) {
  return c == 0 ? achromatic : (c == 1 ? red_green : blue_yellow);
}

double srgb_decode(double v) {
  if (v <= 0.04045) return v / 12.92;
  return std::pow((v + 0.055) / 1.055, 2.4);
}

double srgb_encode(double v) {
  if (v <= 0.0031308) return 12.92 * v;
  return 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

namespace {

void require_linear_rgb(const ImageBuffer& img, const char* what) {
  if (img.space() != ColorSpace::LinearRGB || img.channels() != 3)
    throw InvalidArgument(std::string(what) + ": expected a 3-channel linearRGB image, got " +
                          to_string(img.space()));
}

// linear sRGB (D65) -> XYZ
constexpr std::array<std::array<double, 3>, 3> kRgbToXyz{{
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
}};

// White point taken as the row sums so that gray maps exactly onto the L* axis.
constexpr double kWhiteX = 0.4124564 + 0.3575761 + 0.1804375;
constexpr double kWhiteY = 0.2126729 + 0.7151522 + 0.0721750;
constexpr double kWhiteZ = 0.0193339 + 0.1191920 + 0.9503041;

constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) {
  if (t > kDelta * kDelta * kDelta) return std::cbrt(t);
  return t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_prime(double t) {
  if (t > kDelta * kDelta * kDelta) {
    double c = std::cbrt(t);
    return 1.0 / (3.0 * c * c);
  }
  return 1.0 / (3.0 * kDelta * kDelta);
}

}  // namespace

ImageBuffer to_luminance(const ImageBuffer& img) {
  require_linear_rgb(img, "to_luminance");
  ImageBuffer out(img.width(), img.height(), 1, ColorSpace::Gray);
  auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
  auto y = out.channel(0);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
  return out;
}

OpponentImage to_opponent(const ImageBuffer& img, OpponentMode mode) {
  require_linear_rgb(img, "to_opponent");
  const int w = img.width(), h = img.height();
  OpponentImage out{Plane(w, h), Plane(w, h), Plane(w, h)};
  auto r = img.channel(0), g = img.channel(1), b = img.channel(2);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (mode == OpponentMode::LinearTest) {
      out.achromatic.data[i] = kLumaR * r[i] + kLumaG * g[i] + kLumaB * b[i];
      out.red_green.data[i] = r[i] - g[i];
      out.blue_yellow.data[i] = 0.5 * (r[i] + g[i]) - b[i];
      continue;
    }
    const double x = kRgbToXyz[0][0] * r[i] + kRgbToXyz[0][1] * g[i] + kRgbToXyz[0][2] * b[i];
    const double yy = kRgbToXyz[1][0] * r[i] + kRgbToXyz[1][1] * g[i] + kRgbToXyz[1][2] * b[i];
    const double z = kRgbToXyz[2][0] * r[i] + kRgbToXyz[2][1] * g[i] + kRgbToXyz[2][2] * b[i];
    const double fx = lab_f(x / kWhiteX), fy = lab_f(yy / kWhiteY), fz = lab_f(z / kWhiteZ);
    out.achromatic.data[i] = (116.0 * fy - 16.0) / 100.0;
    out.red_green.data[i] = 500.0 * (fx - fy) / 128.0;
    out.blue_yellow.data[i] = 200.0 * (fy - fz) / 128.0;
  }
  return out;
}

ImageBuffer opponent_adjoint(const ImageBuffer& rgb, const OpponentImage& grad, OpponentMode mode) {
  require_linear_rgb(rgb, "opponent_adjoint");
  ImageBuffer out(rgb.width(), rgb.height(), 3, ColorSpace::LinearRGB);
  auto r = rgb.channel(0), g = rgb.channel(1), b = rgb.channel(2);
  auto gr = out.channel(0), gg = out.channel(1), gb = out.channel(2);
  const auto& ga = grad.achromatic.data;
  const auto& grg = grad.red_green.data;
  const auto& gby = grad.blue_yellow.data;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (mode == OpponentMode::LinearTest) {
      gr[i] = kLumaR * ga[i] + grg[i] + 0.5 * gby[i];
      gg[i] = kLumaG * ga[i] - grg[i] + 0.5 * gby[i];
      gb[i] = kLumaB * ga[i] - gby[i];
      continue;
    }
    const double x = kRgbToXyz[0][0] * r[i] + kRgbToXyz[0][1] * g[i] + kRgbToXyz[0][2] * b[i];
    const double yy = kRgbToXyz[1][0] * r[i] + kRgbToXyz[1][1] * g[i] + kRgbToXyz[1][2] * b[i];
    const double z = kRgbToXyz[2][0] * r[i] + kRgbToXyz[2][1] * g[i] + kRgbToXyz[2][2] * b[i];
    const double g_fx = 500.0 / 128.0 * grg[i];
    const double g_fy = 1.16 * ga[i] - 500.0 / 128.0 * grg[i] + 200.0 / 128.0 * gby[i];
    const double g_fz = -200.0 / 128.0 * gby[i];
    const double gx = g_fx * lab_f_prime(x / kWhiteX) / kWhiteX;
    const double gy = g_fy * lab_f_prime(yy / kWhiteY) / kWhiteY;
    const double gz = g_fz * lab_f_prime(z / kWhiteZ) / kWhiteZ;
    gr[i] = kRgbToXyz[0][0] * gx + kRgbToXyz[1][0] * gy + kRgbToXyz[2][0] * gz;
    gg[i] = kRgbToXyz[0][1] * gx + kRgbToXyz[1][1] * gy + kRgbToXyz[2][1] * gz;
    gb[i] = kRgbToXyz[0][2] * gx + kRgbToXyz[1][2] * gy + kRgbToXyz[2][2] * gz;
  }
  return out;
}

}  // namespace metamer
