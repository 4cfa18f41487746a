#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace metamer {

enum class ColorSpace { sRGB8, LinearRGB, Opponent, Gray };

const char* to_string(ColorSpace space);

/// Single real-valued raster, row-major.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0);

  double& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
  double mean() const;
};

/// Single complex-valued raster, row-major.
struct ComplexPlane {
  int width = 0;
  int height = 0;
  std::vector<std::complex<double>> data;

  ComplexPlane() = default;
  ComplexPlane(int w, int h);

  std::complex<double>& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const std::complex<double>& operator()(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return data.size(); }
};

/// Planar floating-point image with 1..3 channels and a color-space tag.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(int width, int height, int channels, ColorSpace space);

  static ImageBuffer from_planes(const std::vector<Plane>& planes, ColorSpace space);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  ColorSpace space() const { return space_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }

  std::span<double> channel(int c);
  std::span<const double> channel(int c) const;
  Plane plane(int c) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  ColorSpace space_ = ColorSpace::Gray;
  std::vector<double> data_;
};

/// Achromatic, red-green and blue-yellow planes.
struct OpponentImage {
  Plane achromatic;
  Plane red_green;
  Plane blue_yellow;

  const Plane& channel(int c) const;
  Plane& channel(int c);
};

/// Lab is the standard transform; LinearTest swaps in a fixed linear matrix so
/// linearity properties can be checked.
enum class OpponentMode { Lab, LinearTest };

double srgb_decode(double encoded);
double srgb_encode(double linear);

ImageBuffer to_luminance(const ImageBuffer& img);
OpponentImage to_opponent(const ImageBuffer& img, OpponentMode mode = OpponentMode::Lab);

/// Pulls a gradient on the opponent planes back to linear RGB at the point `rgb`.
ImageBuffer opponent_adjoint(const ImageBuffer& rgb, const OpponentImage& grad,
                             OpponentMode mode = OpponentMode::Lab);

inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

}  // namespace metamer
