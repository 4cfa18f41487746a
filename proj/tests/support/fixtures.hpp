#pragma once

#include <cstdint>

#include "metamer/image.hpp"

namespace fixtures {

using metamer::ImageBuffer;
using metamer::Plane;

/// Natural-looking test image: 1/f random-phase noise plus a few soft-edged shapes,
/// scaled to [0.05, 0.95].
Plane natural_image(int width, int height, std::uint64_t seed);

/// Smooth image without edges (sum of a few long-wavelength sinusoids), in [0, 1].
Plane smooth_image(int width, int height, std::uint64_t seed);

/// 0.5 + amp * cos(2 pi (fx x + fy y)), with (fx, fy) in cycles per pixel.
Plane grating(int width, int height, double fx, double fy, double amp = 0.4);
Plane uniform_noise(int width, int height, std::uint64_t seed, double lo = 0.0, double hi = 1.0);
Plane checkerboard(int width, int height, int cell, double lo = 0.1, double hi = 0.9);
Plane constant(int width, int height, double v);
/// Circular box blur with a (2r+1)^2 window.
Plane box_blur(const Plane& p, int radius);
/// Nearest-neighbour magnification of a random field: blocks of `cell` pixels.
Plane block_noise(int width, int height, int cell, std::uint64_t seed);

ImageBuffer gray(const Plane& p);
ImageBuffer rgb(const Plane& r, const Plane& g, const Plane& b);

double rms(const Plane& a, const Plane& b);
double max_abs(const Plane& p);

}  // namespace fixtures
