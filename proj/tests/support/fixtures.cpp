#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "metamer/fft.hpp"

namespace fixtures {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void rescale(Plane& p, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(p.data.begin(), p.data.end());
  const double a = *mn, b = *mx;
  for (double& v : p.data) v = lo + (hi - lo) * (v - a) / (b - a);
}
}  // namespace

Plane natural_image(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  metamer::Fft2d fft(width, height);
  metamer::Spectrum spec(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double fx = metamer::signed_frequency(x, width) / static_cast<double>(width);
      const double fy = metamer::signed_frequency(y, height) / static_cast<double>(height);
      const double f = std::hypot(fx, fy);
      const double amp = f == 0.0 ? 0.0 : 1.0 / f;
      spec[static_cast<std::size_t>(y) * width + x] = {amp * gauss(rng), amp * gauss(rng)};
    }
  fft.inverse(spec);
  Plane p(width, height);
  for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = spec[i].real();
  rescale(p, 0.0, 1.0);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 6; ++k) {
    const double cx = u(rng) * width, cy = u(rng) * height;
    const double rx = (0.05 + 0.15 * u(rng)) * width, ry = (0.05 + 0.15 * u(rng)) * height;
    const double level = u(rng);
    const bool box = k % 2 == 1;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        const double d = box ? std::max(std::abs(dx), std::abs(dy)) : std::hypot(dx, dy);
        const double a = 1.0 / (1.0 + std::exp((d - 1.0) * 12.0));
        p(x, y) = (1.0 - 0.8 * a) * p(x, y) + 0.8 * a * level;
      }
  }
  rescale(p, 0.05, 0.95);
  return p;
}

Plane smooth_image(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane p(width, height);
  for (int k = 0; k < 4; ++k) {
    const double ang = u(rng) * kTwoPi;
    const double wavelength = (0.3 + 0.4 * u(rng)) * std::max(width, height);
    const double phase = u(rng) * kTwoPi;
    const double kx = std::cos(ang) / wavelength, ky = std::sin(ang) / wavelength;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) p(x, y) += std::sin(kTwoPi * (kx * x + ky * y) + phase);
  }
  rescale(p, 0.0, 1.0);
  return p;
}

Plane grating(int width, int height, double fx, double fy, double amp) {
  Plane p(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) p(x, y) = 0.5 + amp * std::cos(kTwoPi * (fx * x + fy * y));
  return p;
}

Plane uniform_noise(int width, int height, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Plane p(width, height);
  for (double& v : p.data) v = u(rng);
  return p;
}

Plane checkerboard(int width, int height, int cell, double lo, double hi) {
  Plane p(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) p(x, y) = ((x / cell + y / cell) % 2 == 0) ? hi : lo;
  return p;
}

Plane constant(int width, int height, double v) {
  Plane p(width, height);
  std::fill(p.data.begin(), p.data.end(), v);
  return p;
}

Plane box_blur(const Plane& p, int radius) {
  Plane out(p.width, p.height);
  const double norm = 1.0 / ((2.0 * radius + 1) * (2.0 * radius + 1));
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      double s = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
          s += p((x + dx + p.width) % p.width, (y + dy + p.height) % p.height);
      out(x, y) = s * norm;
    }
  return out;
}

Plane block_noise(int width, int height, int cell, std::uint64_t seed) {
  const int bw = (width + cell - 1) / cell, bh = (height + cell - 1) / cell;
  const Plane coarse = uniform_noise(bw, bh, seed);
  Plane p(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) p(x, y) = coarse(x / cell, y / cell);
  return p;
}

ImageBuffer gray(const Plane& p) { return ImageBuffer::from_planes({p}, metamer::ColorSpace::Gray); }

ImageBuffer rgb(const Plane& r, const Plane& g, const Plane& b) {
  return ImageBuffer::from_planes({r, g, b}, metamer::ColorSpace::LinearRGB);
}

double rms(const Plane& a, const Plane& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

double max_abs(const Plane& p) {
  double m = 0.0;
  for (double v : p.data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace fixtures
