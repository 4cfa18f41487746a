#include "metamer/pyramid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "metamer/error.hpp"

namespace metamer {

using std::numbers::pi;

void PyramidConfig::validate(int width, int height) const {
  if (scales < 3) throw InvalidArgument("pyramid: scales must be >= 3");
  if (orientations < 2) throw InvalidArgument("pyramid: orientations must be >= 2");
  if (!(end_stop_shift > 0.0)) throw InvalidArgument("pyramid: end_stop_shift must be positive");
  const long need = 1L << scales;
  if (width < need || height < need)
    throw InvalidArgument("pyramid: image " + std::to_string(width) + "x" + std::to_string(height) +
                          " is too small for " + std::to_string(scales) + " scales (needs >= " +
                          std::to_string(need) + " pixels per side)");
}

namespace filters {

double lowpass_radial(double r) {
  if (r <= pi / 4) return 1.0;
  if (r >= pi / 2) return 0.0;
  return std::cos(pi / 2 * std::log2(4 * r / pi));
}

double highpass_radial(double r) {
  if (r <= pi / 4) return 0.0;
  if (r >= pi / 2) return 1.0;
  return std::cos(pi / 2 * std::log2(2 * r / pi));
}

double angular_normalization(int k) {
  // 2^(K-1) (K-1)! / sqrt(K (2(K-1))!), evaluated in log space.
  const double n = k - 1;
  const double log_alpha = n * std::log(2.0) + std::lgamma(n + 1) - 0.5 * (std::log(static_cast<double>(k)) + std::lgamma(2 * n + 1));
  return std::exp(log_alpha);
}

double orientation_angle(int o, int k) { return pi * o / k; }

std::complex<double> quadrature_phase(int k) {
  switch ((k - 1) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, -1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, 1.0};
  }
}

double steerable_window(double theta, int o, int k) {
  const double c = std::cos(theta - orientation_angle(o, k));
  return angular_normalization(k) * std::pow(c, k - 1);
}

double analytic_window(double theta, int o, int k) {
  const double c = std::cos(theta - orientation_angle(o, k));
  if (c <= 0.0) return 0.0;
  return 2.0 * angular_normalization(k) * std::pow(c, k - 1);
}

}  // namespace filters

std::vector<LevelShape> level_shapes(int width, int height, int scales) {
  std::vector<LevelShape> shapes;
  int w = width, h = height;
  for (int s = 0; s <= scales; ++s) {
    shapes.push_back({w, h});
    w = (w + 1) / 2;
    h = (h + 1) / 2;
  }
  return shapes;
}

namespace {

struct Polar {
  double r;
  double theta;
};

// Polar coordinates of every DFT bin on a w x h grid, frequencies scaled by `gain`.
std::vector<Polar> polar_grid(int w, int h, double gain) {
  std::vector<Polar> g(static_cast<std::size_t>(w) * h);
  for (int ky = 0; ky < h; ++ky) {
    const double fy = 2 * pi * signed_frequency(ky, h) / h * gain;
    for (int kx = 0; kx < w; ++kx) {
      const double fx = 2 * pi * signed_frequency(kx, w) / w * gain;
      g[static_cast<std::size_t>(ky) * w + kx] = {std::hypot(fx, fy), std::atan2(fy, fx)};
    }
  }
  return g;
}

Spectrum to_spectrum(const Plane& p) {
  Spectrum s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) s[i] = p.data[i];
  return s;
}

Spectrum to_spectrum(const ComplexPlane& p) {
  Spectrum s(p.size());
  std::copy(p.data.begin(), p.data.end(), s.begin());
  return s;
}

Plane real_plane(const Spectrum& s, int w, int h) {
  Plane p(w, h);
  for (std::size_t i = 0; i < p.size(); ++i) p.data[i] = s[i].real();
  return p;
}

ComplexPlane complex_plane(const Spectrum& s, int w, int h) {
  ComplexPlane p(w, h);
  std::copy(s.begin(), s.end(), p.data.begin());
  return p;
}

}  // namespace

PyramidPlan::PyramidPlan(int width, int height, PyramidConfig cfg)
    : cfg_(cfg), residual_fft_(1, 1) {
  cfg_.validate(width, height);
  shapes_ = level_shapes(width, height, cfg_.scales);
  phase_ = filters::quadrature_phase(cfg_.orientations);
  const int k = cfg_.orientations;

  auto full = polar_grid(width, height, 1.0);
  lowpass0_.resize(full.size());
  highpass0_.resize(full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    lowpass0_[i] = filters::lowpass_radial(full[i].r / 2);
    highpass0_[i] = filters::highpass_radial(full[i].r / 2);
  }

  for (int s = 0; s < cfg_.scales; ++s) {
    const LevelShape sh = shapes_[static_cast<std::size_t>(s)];
    const LevelShape next = shapes_[static_cast<std::size_t>(s) + 1];
    Level lv{sh, Fft2d(sh.width, sh.height), {}, {}, {}, {}, 1.0};
    auto grid = polar_grid(sh.width, sh.height, 1.0);
    lv.lowpass.resize(grid.size());
    lv.highpass.resize(grid.size());
    lv.band.assign(static_cast<std::size_t>(k), std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      lv.lowpass[i] = filters::lowpass_radial(grid[i].r);
      lv.highpass[i] = filters::highpass_radial(grid[i].r);
      for (int o = 0; o < k; ++o)
        lv.band[static_cast<std::size_t>(o)][i] = lv.highpass[i] * filters::analytic_window(grid[i].theta, o, k);
    }
    // Keep the bins of the next (half-size) grid; the lowpass vanishes on the rest.
    for (int ky = 0; ky < next.height; ++ky) {
      int sy = signed_frequency(ky, next.height);
      int src_y = sy < 0 ? sy + sh.height : sy;
      for (int kx = 0; kx < next.width; ++kx) {
        int sx = signed_frequency(kx, next.width);
        int src_x = sx < 0 ? sx + sh.width : sx;
        lv.crop.emplace_back(static_cast<std::size_t>(src_y) * sh.width + src_x,
                             static_cast<std::size_t>(ky) * next.width + kx);
      }
    }
    lv.crop_gain = static_cast<double>(next.size()) / static_cast<double>(sh.size());
    levels_.push_back(std::move(lv));
  }
  residual_fft_ = Fft2d(shapes_.back().width, shapes_.back().height);
}

void PyramidPlan::to_next_level(const Spectrum& y, std::size_t s, Spectrum& next) const {
  const Level& lv = levels_[s];
  next.assign(shapes_[s + 1].size(), {0.0, 0.0});
  for (const auto& [src, dst] : lv.crop) next[dst] = y[src] * (lv.lowpass[src] * lv.crop_gain);
}

BandStack PyramidPlan::analyze(const Plane& img) const {
  if (img.width != width() || img.height != height())
    throw InvalidArgument("pyramid: image size does not match the plan");
  Spectrum y = to_spectrum(img);
  levels_[0].fft.forward(y);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= lowpass0_[i];

  BandStack bands(levels_.size());
  Spectrum work, next;
  for (std::size_t s = 0; s < levels_.size(); ++s) {
    const Level& lv = levels_[s];
    bands[s].reserve(lv.band.size());
    for (const auto& filt : lv.band) {
      work.resize(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) work[i] = y[i] * (filt[i] * phase_);
      lv.fft.inverse(work);
      bands[s].push_back(complex_plane(work, lv.shape.width, lv.shape.height));
    }
    if (s + 1 < levels_.size()) {
      to_next_level(y, s, next);
      std::swap(y, next);
    }
  }
  return bands;
}

Plane PyramidPlan::analyze_adjoint(const BandStack& grad) const {
  const std::complex<double> phase_conj = std::conj(phase_);
  Spectrum gy, work;
  for (std::size_t s = levels_.size(); s-- > 0;) {
    const Level& lv = levels_[s];
    Spectrum acc(lv.shape.size(), {0.0, 0.0});
    if (s + 1 < levels_.size()) {
      for (const auto& [src, dst] : lv.crop) acc[src] = gy[dst] * (lv.lowpass[src] * lv.crop_gain);
    }
    const double inv_n = 1.0 / static_cast<double>(lv.shape.size());
    for (std::size_t o = 0; o < lv.band.size(); ++o) {
      const ComplexPlane& g = grad[s][o];
      if (g.data.empty()) continue;
      work = to_spectrum(g);
      lv.fft.forward(work);
      const auto& filt = lv.band[o];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += work[i] * (filt[i] * inv_n * phase_conj);
    }
    gy = std::move(acc);
  }
  for (std::size_t i = 0; i < gy.size(); ++i) gy[i] *= lowpass0_[i];
  // Adjoint of the unnormalized forward DFT is N times the normalized inverse.
  levels_[0].fft.inverse(gy);
  const double n = static_cast<double>(gy.size());
  Plane out(width(), height());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = gy[i].real() * n;
  return out;
}

SteerablePyramid PyramidPlan::build(const Plane& img) const {
  SteerablePyramid pyr;
  pyr.config = cfg_;
  pyr.width = width();
  pyr.height = height();
  pyr.bands = analyze(img);
  for (const auto& scale : pyr.bands) {
    auto& mags = pyr.magnitude.emplace_back();
    auto& dbl = pyr.phase_doubled.emplace_back();
    for (const auto& band : scale) {
      mags.push_back(metamer::magnitude(band));
      dbl.push_back(phase_double(band));
    }
  }

  Spectrum x = to_spectrum(img);
  levels_[0].fft.forward(x);
  Spectrum hi(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) hi[i] = x[i] * highpass0_[i];
  levels_[0].fft.inverse(hi);
  pyr.highpass = real_plane(hi, width(), height());

  Spectrum y(x.size()), next;
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * lowpass0_[i];
  for (std::size_t s = 0; s < levels_.size(); ++s) {
    to_next_level(y, s, next);
    std::swap(y, next);
  }
  residual_fft_.inverse(y);
  pyr.lowpass = real_plane(y, shapes_.back().width, shapes_.back().height);
  return pyr;
}

Plane PyramidPlan::reconstruct(const SteerablePyramid& pyr) const {
  const int k = cfg_.orientations;
  Spectrum y = to_spectrum(pyr.lowpass);
  residual_fft_.forward(y);
  const std::complex<double> phase_conj = std::conj(phase_);
  for (std::size_t s = levels_.size(); s-- > 0;) {
    const Level& lv = levels_[s];
    Spectrum acc(lv.shape.size(), {0.0, 0.0});
    for (const auto& [src, dst] : lv.crop) acc[src] = y[dst] * (lv.lowpass[src] / lv.crop_gain);
    auto grid = polar_grid(lv.shape.width, lv.shape.height, 1.0);
    for (int o = 0; o < k; ++o) {
      Spectrum band(lv.shape.size());
      const auto& src = pyr.bands[s][static_cast<std::size_t>(o)].data;
      for (std::size_t i = 0; i < band.size(); ++i) band[i] = src[i].real();
      lv.fft.forward(band);
      for (std::size_t i = 0; i < acc.size(); ++i) {
        const double w = lv.highpass[i] * filters::steerable_window(grid[i].theta, o, k);
        acc[i] += band[i] * (w * phase_conj);
      }
    }
    y = std::move(acc);
  }
  Spectrum hi = to_spectrum(pyr.highpass);
  levels_[0].fft.forward(hi);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] * lowpass0_[i] + hi[i] * highpass0_[i];
  levels_[0].fft.inverse(y);
  return real_plane(y, width(), height());
}

SteerablePyramid build_pyramid(const Plane& plane, const PyramidConfig& cfg) {
  return PyramidPlan(plane.width, plane.height, cfg).build(plane);
}

Plane reconstruct(const SteerablePyramid& pyr) {
  return PyramidPlan(pyr.width, pyr.height, pyr.config).reconstruct(pyr);
}

ComplexPlane phase_double(const ComplexPlane& band) {
  ComplexPlane out(band.width, band.height);
  for (std::size_t i = 0; i < band.size(); ++i) {
    const double m = std::sqrt(std::norm(band.data[i]));
    out.data[i] = m > 0.0 ? band.data[i] * band.data[i] / m : std::complex<double>{};
  }
  return out;
}

Plane magnitude(const ComplexPlane& band) {
  Plane out(band.width, band.height);
  for (std::size_t i = 0; i < band.size(); ++i) out.data[i] = std::sqrt(std::norm(band.data[i]));
  return out;
}

BandStack undecimated_bands(const Plane& plane, int scales, int orientations) {
  BandStack bands(static_cast<std::size_t>(scales));
  for_each_undecimated_band(plane, scales, orientations, [&](int s, int, const ComplexPlane& b) {
    bands[static_cast<std::size_t>(s)].push_back(b);
  });
  return bands;
}

void for_each_undecimated_band(const Plane& plane, int scales, int orientations,
                               const std::function<void(int, int, const ComplexPlane&)>& fn) {
  if (scales < 1 || orientations < 2) throw InvalidArgument("undecimated_bands: bad filter-bank shape");
  const int w = plane.width, h = plane.height;
  Fft2d fft(w, h);
  Spectrum y = to_spectrum(plane);
  fft.forward(y);
  auto grid = polar_grid(w, h, 1.0);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= filters::lowpass_radial(grid[i].r / 2);
  const auto phase = filters::quadrature_phase(orientations);

  std::vector<std::vector<double>> angular(static_cast<std::size_t>(orientations), std::vector<double>(y.size()));
  for (int o = 0; o < orientations; ++o)
    for (std::size_t i = 0; i < y.size(); ++i)
      angular[static_cast<std::size_t>(o)][i] = filters::analytic_window(grid[i].theta, o, orientations);

  Spectrum work(y.size());
  std::vector<double> radial(y.size());
  double gain = 1.0;
  for (int s = 0; s < scales; ++s) {
    for (std::size_t i = 0; i < y.size(); ++i) radial[i] = filters::highpass_radial(grid[i].r * gain);
    for (int o = 0; o < orientations; ++o) {
      const auto& ang = angular[static_cast<std::size_t>(o)];
      for (std::size_t i = 0; i < y.size(); ++i) work[i] = y[i] * (radial[i] * ang[i] * phase);
      fft.inverse(work);
      fn(s, o, complex_plane(work, w, h));
    }
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= filters::lowpass_radial(grid[i].r * gain);
    gain *= 2.0;
  }
}

}  // namespace metamer
