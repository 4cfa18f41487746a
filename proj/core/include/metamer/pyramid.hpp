#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "metamer/fft.hpp"
#include "metamer/image.hpp"

namespace metamer {

struct PyramidConfig {
  int scales = 6;
  int orientations = 6;
  double end_stop_shift = 1.0;  // samples at band resolution

  /// Throws InvalidArgument unless scales >= 3, orientations >= 2 and the image
  /// admits `scales` dyadic levels.
  void validate(int width, int height) const;
};

/// Fourier-domain window functions shared by every filter bank in the library.
/// Frequencies are in radians per sample of the level they are evaluated on.
namespace filters {

/// 1 below pi/4, raised-cosine (in log2 r) down to 0 at pi/2.
double lowpass_radial(double r);
/// Complement of lowpass_radial: lowpass^2 + highpass^2 == 1.
double highpass_radial(double r);
/// Normalizer making sum_o (alpha cos^(K-1))^2 == 1 for K orientations.
double angular_normalization(int orientations);
/// Frequency-domain direction of band o; the band responds to edges at this angle + pi/2.
double orientation_angle(int o, int orientations);
/// (-i)^(K-1): makes the real part of each complex band the (K-1)th-derivative steerable filter.
std::complex<double> quadrature_phase(int orientations);
/// Real steerable response alpha cos^(K-1)(theta - theta_o) (without the quadrature phase).
double steerable_window(double theta, int o, int orientations);
/// One-sided window of the complex band: 2 * steerable_window on the half-plane where
/// cos(theta - theta_o) > 0, zero elsewhere.
double analytic_window(double theta, int o, int orientations);

}  // namespace filters

struct LevelShape {
  int width;
  int height;
  std::size_t size() const { return static_cast<std::size_t>(width) * height; }
};

/// Shapes of band levels 0..scales-1 followed by the lowpass residual level.
std::vector<LevelShape> level_shapes(int width, int height, int scales);

using BandStack = std::vector<std::vector<ComplexPlane>>;  // [scale][orientation]

struct SteerablePyramid {
  PyramidConfig config;
  int width = 0;
  int height = 0;
  BandStack bands;
  std::vector<std::vector<Plane>> magnitude;
  BandStack phase_doubled;
  Plane highpass;
  Plane lowpass;
};

/// Precomputed filter bank and FFT plans for one image size.
class PyramidPlan {
 public:
  PyramidPlan(int width, int height, PyramidConfig cfg);

  const PyramidConfig& config() const { return cfg_; }
  const std::vector<LevelShape>& shapes() const { return shapes_; }
  int width() const { return shapes_.front().width; }
  int height() const { return shapes_.front().height; }

  /// Oriented complex bands only (residuals skipped).
  BandStack analyze(const Plane& img) const;
  /// Re(M^H g) where M maps the image to the complex bands: the gradient of a real
  /// loss with respect to the image given its gradient (d/dRe + i d/dIm) on each band.
  Plane analyze_adjoint(const BandStack& grad) const;

  SteerablePyramid build(const Plane& img) const;
  Plane reconstruct(const SteerablePyramid& pyr) const;

 private:
  struct Level {
    LevelShape shape;
    Fft2d fft;
    std::vector<double> lowpass;                  // L(r)
    std::vector<double> highpass;                 // H(r)
    std::vector<std::vector<double>> band;        // H(r) * analytic window, per orientation
    std::vector<std::pair<std::size_t, std::size_t>> crop;  // (this-level bin, next-level bin)
    double crop_gain = 1.0;                       // N_{s+1} / N_s
  };

  void to_next_level(const Spectrum& y, std::size_t s, Spectrum& next) const;

  PyramidConfig cfg_;
  std::vector<LevelShape> shapes_;
  std::vector<double> lowpass0_;   // L(r/2) on the full-resolution grid
  std::vector<double> highpass0_;  // H(r/2)
  std::vector<Level> levels_;
  Fft2d residual_fft_;
  std::complex<double> phase_;
};

SteerablePyramid build_pyramid(const Plane& plane, const PyramidConfig& cfg);
Plane reconstruct(const SteerablePyramid& pyr);

/// band^2 / |band|, zero where |band| == 0.
ComplexPlane phase_double(const ComplexPlane& band);
Plane magnitude(const ComplexPlane& band);

/// Full-resolution (undecimated) complex bands of the same filter family; exact
/// circular-shift equivariance at every scale. No minimum-size constraint.
BandStack undecimated_bands(const Plane& plane, int scales, int orientations);

/// Same bands, handed to `fn(s, o, band)` one at a time so only one is alive.
void for_each_undecimated_band(const Plane& plane, int scales, int orientations,
                               const std::function<void(int, int, const ComplexPlane&)>& fn);

}  // namespace metamer
