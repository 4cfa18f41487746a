#include "metamer/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "metamer/error.hpp"
#include "metamer/pyramid.hpp"

namespace metamer {

const char* to_string(Descriptor d) {
  switch (d) {
    case Descriptor::Coarseness: return "coarseness";
    case Descriptor::Contrast: return "contrast";
    case Descriptor::Directionality: return "directionality";
    case Descriptor::LineLikeness: return "line_likeness";
    case Descriptor::Roughness: return "roughness";
    case Descriptor::Regularity: return "regularity";
  }
  return "?";
}

namespace {

constexpr double kRoughnessFloor = 1e-12;
constexpr double kFlatVariance = 1e-20;

constexpr std::array<Descriptor, kDescriptorCount> kAll = {Descriptor::Coarseness,   Descriptor::Contrast,
                                                           Descriptor::Directionality, Descriptor::LineLikeness,
                                                           Descriptor::Roughness,    Descriptor::Regularity};

std::size_t idx(Descriptor d) { return static_cast<std::size_t>(d); }

double variance(const Plane& p) {
  const double m = p.mean();
  double acc = 0.0;
  for (double v : p.data) acc += (v - m) * (v - m);
  return acc / static_cast<double>(p.size());
}

Plane crop(const Plane& p, int x0, int y0, int size) {
  Plane out(size, size);
  for (int y = 0; y < size; ++y)
    std::copy_n(&p.data[static_cast<std::size_t>(y0 + y) * p.width + static_cast<std::size_t>(x0)], size,
                &out.data[static_cast<std::size_t>(y) * size]);
  return out;
}

// One pass over the 2-orientation bank feeding both coarseness and the orientation histograms.
struct GradientBank {
  double coarseness = 0.0;
  std::vector<std::vector<double>> histograms;
};

GradientBank gradient_bank(const Plane& lum, int scales, int bins, bool want_coarseness, bool want_histograms) {
  GradientBank out;
  const std::size_t n = lum.size();
  std::vector<double> best(want_coarseness ? n : 0, -1.0);
  std::vector<int> best_scale(want_coarseness ? n : 0, 0);
  std::vector<double> first(n);
  if (want_histograms) out.histograms.resize(static_cast<std::size_t>(scales));
  const double pi = std::numbers::pi;
  const double bin_width = pi / bins;

  for_each_undecimated_band(lum, scales, 2, [&](int s, int o, const ComplexPlane& band) {
    if (o == 0) {
      for (std::size_t i = 0; i < n; ++i) first[i] = band.data[i].real();
      return;
    }
    if (want_coarseness) {
      for (std::size_t i = 0; i < n; ++i) {
        const double r = std::max(std::abs(first[i]), std::abs(band.data[i].real()));
        if (r > best[i]) {
          best[i] = r;
          best_scale[i] = s;
        }
      }
    }
    if (!want_histograms) return;
    // first = horizontal derivative, band = vertical derivative
    std::vector<double> mag(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mag[i] = std::sqrt(first[i] * first[i] + band.data[i].real() * band.data[i].real());
      mean += mag[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double m : mag) var += (m - mean) * (m - mean);
    const double threshold = mean - std::sqrt(var / static_cast<double>(n));
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mag[i] <= 0.0 || mag[i] < threshold) continue;
      double theta = std::atan2(band.data[i].real(), first[i]);
      if (theta >= pi / 2) theta -= pi;
      if (theta < -pi / 2) theta += pi;
      // bins are centered on multiples of pi / bins so axis-aligned edges do not straddle a boundary
      int b = static_cast<int>(std::floor((theta + pi / 2) / bin_width + 0.5));
      b = ((b % bins) + bins) % bins;
      hist[static_cast<std::size_t>(b)] += 1.0;
      total += 1.0;
    }
    if (total > 0.0) {
      for (double& h : hist) h /= total;
      out.histograms[static_cast<std::size_t>(s)] = std::move(hist);
    }
  });

  if (want_coarseness) {
    double acc = 0.0;
    for (int s : best_scale) acc += std::pow(10.0, s);
    out.coarseness = acc / static_cast<double>(n);
  }
  return out;
}

// Circular 5-tap binomial blur with taps `dilation` apart, separable.
Plane binomial_blur(const Plane& p, int dilation) {
  static constexpr double taps[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const int w = p.width, h = p.height;
  auto wrap = [](long long i, int n) { return static_cast<int>(((i % n) + n) % n); };
  Plane tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) acc += taps[k + 2] * p(wrap(x + static_cast<long long>(k) * dilation, w), y);
      tmp(x, y) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -2; k <= 2; ++k) acc += taps[k + 2] * tmp(x, wrap(y + static_cast<long long>(k) * dilation, h));
      out(x, y) = acc;
    }
  return out;
}

WindowSample measure_window(const Plane& lum, int x, int y, int size, const DescriptorConfig& cfg, bool full) {
  WindowSample w;
  w.x = x;
  w.y = y;
  const Plane win = crop(lum, x, y, size);
  w.kept = variance(win) >= cfg.variance_floor;
  if (!w.kept) return w;
  const GradientBank bank = gradient_bank(win, cfg.scales, cfg.orientation_bins, full, true);
  for (const auto& h : bank.histograms) {
    if (h.empty()) continue;
    const double e = entropy(h);
    w.entropy = w.oriented ? std::min(w.entropy, e) : e;
    w.oriented = true;
  }
  if (full) {
    w.coarseness = bank.coarseness;
    w.contrast = contrast_raw(win, cfg.contrast_epsilon, cfg.scales);
    w.roughness = roughness_raw(win, cfg.scales);
  }
  return w;
}

double window_directionality(const WindowSample& w, double norm) {
  return w.oriented ? directionality_from_entropy(w.entropy, norm) : 0.0;
}

}  // namespace

void DescriptorConfig::validate(int width, int height) const {
  if (window_sizes.empty()) throw InvalidArgument("descriptors: no window sizes");
  for (int s : window_sizes) {
    if (s < 2) throw InvalidArgument("descriptors: window size must be >= 2");
    if (s > std::min(width, height))
      throw InvalidArgument("descriptors: window size " + std::to_string(s) + " exceeds image size " +
                            std::to_string(width) + "x" + std::to_string(height));
  }
  if (windows_per_size < 1) throw InvalidArgument("descriptors: windows_per_size must be >= 1");
  if (!(variance_floor >= 0.0)) throw InvalidArgument("descriptors: variance_floor must be >= 0");
  if (!(contrast_epsilon > 0.0)) throw InvalidArgument("descriptors: contrast_epsilon must be > 0");
  if (orientation_bins < 2) throw InvalidArgument("descriptors: orientation_bins must be >= 2");
  if (scales < 1) throw InvalidArgument("descriptors: scales must be >= 1");
}

Calibration Calibration::intrinsic(const DescriptorConfig& cfg) {
  Calibration c;
  c.directionality_norm = std::log(static_cast<double>(cfg.orientation_bins));
  auto set = [&](Descriptor d, double lo, double hi) {
    c.shift[idx(d)] = lo;
    c.scale[idx(d)] = hi - lo;
  };
  set(Descriptor::Coarseness, 1.0, std::pow(10.0, cfg.scales - 1));
  set(Descriptor::Contrast, 0.0, 1.0);
  set(Descriptor::Directionality, -9.0, 0.0);
  set(Descriptor::LineLikeness, 0.0, 1.0);
  set(Descriptor::Roughness, std::log10(kRoughnessFloor), 0.0);
  set(Descriptor::Regularity, 0.0, 1.0);
  if (cfg.scales == 1) c.scale[idx(Descriptor::Coarseness)] = 1.0;
  return c;
}

void Calibration::validate() const {
  if (!(directionality_norm > 0.0) || !std::isfinite(directionality_norm))
    throw InvalidArgument("calibration: directionality_norm must be > 0");
  for (Descriptor d : kAll) {
    if (!(scale[idx(d)] > 0.0) || !std::isfinite(scale[idx(d)]) || !std::isfinite(shift[idx(d)]))
      throw InvalidArgument(std::string("calibration: scale for ") + to_string(d) + " must be > 0");
  }
}

double coarseness_raw(const Plane& lum, int scales) {
  if (variance(lum) <= kFlatVariance) return 0.0;
  return gradient_bank(lum, scales, 2, true, false).coarseness;
}

double contrast_raw(const Plane& lum, double epsilon, int scales) {
  for (double v : lum.data)
    if (v < 0.0) throw InvalidArgument("contrast: luminance must be non-negative");
  Plane fine = lum;
  double acc = 0.0;
  for (int s = 0; s < scales; ++s) {
    Plane coarse = binomial_blur(fine, 1 << s);
    for (std::size_t i = 0; i < fine.size(); ++i)
      acc += std::abs(fine.data[i] - coarse.data[i]) / (coarse.data[i] + epsilon);
    fine = std::move(coarse);
  }
  return acc / (static_cast<double>(scales) * static_cast<double>(lum.size()));
}

std::vector<std::vector<double>> orientation_histograms(const Plane& lum, int bins, int scales) {
  if (variance(lum) <= kFlatVariance) return std::vector<std::vector<double>>(static_cast<std::size_t>(scales));
  return gradient_bank(lum, scales, bins, false, true).histograms;
}

double entropy(const std::vector<double>& histogram) {
  double e = 0.0;
  for (double p : histogram)
    if (p > 0.0) e -= p * std::log(p);
  return e;
}

double directionality_from_entropy(double e, double norm) { return 1.0 - std::pow(10.0, e / norm); }

double roughness_raw(const Plane& lum, int scales) {
  double acc = 0.0;
  for_each_undecimated_band(lum, scales, 6, [&](int, int, const ComplexPlane& band) {
    for (const auto& z : band.data) acc += std::sqrt(std::norm(z));
  });
  const double mean = acc / (6.0 * scales * static_cast<double>(lum.size()));
  return std::log10(std::max(mean, kRoughnessFloor));
}

std::vector<std::pair<int, int>> window_corners(int width, int height, int size, int count, std::uint64_t seed,
                                                Descriptor stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(size)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<int> ux(0, width - size), uy(0, height - size);
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int x = ux(rng);
    const int y = uy(rng);
    out.emplace_back(x, y);
  }
  return out;
}

DescriptorMeasurements measure_descriptors(const Plane& lum, const DescriptorConfig& cfg) {
  cfg.validate(lum.width, lum.height);
  DescriptorMeasurements m;
  m.flat = variance(lum) <= kFlatVariance;
  m.contrast = contrast_raw(lum, cfg.contrast_epsilon, cfg.scales);
  m.roughness = roughness_raw(lum, cfg.scales);
  if (!m.flat) {
    const GradientBank bank = gradient_bank(lum, cfg.scales, cfg.orientation_bins, true, true);
    m.coarseness = bank.coarseness;
    for (const auto& h : bank.histograms) {
      if (h.empty()) continue;
      const double e = entropy(h);
      m.entropy_min = m.oriented ? std::min(m.entropy_min, e) : e;
      m.oriented = true;
    }
  }
  m.window_sizes = cfg.window_sizes;
  for (int size : cfg.window_sizes) {
    auto& line = m.line_windows.emplace_back();
    for (auto [x, y] : window_corners(lum.width, lum.height, size, cfg.windows_per_size, cfg.rng_seed,
                                      Descriptor::LineLikeness))
      line.push_back(measure_window(lum, x, y, size, cfg, false));
    auto& reg = m.regularity_windows.emplace_back();
    for (auto [x, y] : window_corners(lum.width, lum.height, size, cfg.windows_per_size, cfg.rng_seed,
                                      Descriptor::Regularity))
      reg.push_back(measure_window(lum, x, y, size, cfg, true));
  }
  return m;
}

DescriptorResult evaluate_descriptors(const DescriptorMeasurements& m, const Calibration& calib) {
  calib.validate();
  DescriptorResult r;
  const double norm = calib.directionality_norm;
  auto linear = [&](Descriptor d, double v) { return (v - calib.shift[idx(d)]) / calib.scale[idx(d)]; };

  r.raw[Descriptor::Coarseness] = m.flat ? 0.0 : m.coarseness;
  r.degenerate[idx(Descriptor::Coarseness)] = m.flat;
  r.raw[Descriptor::Contrast] = m.contrast;
  r.raw[Descriptor::Directionality] = m.oriented ? directionality_from_entropy(m.entropy_min, norm) : 0.0;
  r.degenerate[idx(Descriptor::Directionality)] = !m.oriented;
  r.raw[Descriptor::Roughness] = m.roughness;

  bool any_line = false;
  for (const auto& size : m.line_windows) {
    double acc = 0.0;
    int kept = 0;
    for (const WindowSample& w : size) {
      if (!w.kept) continue;
      acc += window_directionality(w, norm);
      ++kept;
    }
    if (kept == 0) continue;
    const double mean = acc / kept;
    r.line_mean_max = any_line ? std::max(r.line_mean_max, mean) : mean;
    any_line = true;
  }
  r.raw[Descriptor::LineLikeness] = any_line ? std::pow(10.0, r.line_mean_max) : 0.0;
  r.degenerate[idx(Descriptor::LineLikeness)] = !any_line;

  bool any_reg = false;
  for (const auto& size : m.regularity_windows) {
    std::array<std::vector<double>, 4> vals;
    for (const WindowSample& w : size) {
      if (!w.kept) continue;
      vals[0].push_back(linear(Descriptor::Coarseness, w.coarseness));
      vals[1].push_back(linear(Descriptor::Contrast, w.contrast));
      vals[2].push_back(linear(Descriptor::Directionality, window_directionality(w, norm)));
      vals[3].push_back(linear(Descriptor::Roughness, w.roughness));
    }
    if (vals[0].size() < 2) continue;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& v = vals[k];
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = std::sqrt(var / static_cast<double>(v.size()));
      r.sigma_min[k] = any_reg ? std::min(r.sigma_min[k], sd) : sd;
    }
    any_reg = true;
  }
  r.raw[Descriptor::Regularity] =
      any_reg ? 1.0 - (r.sigma_min[0] + r.sigma_min[1] + r.sigma_min[2] + r.sigma_min[3]) : 0.0;
  r.degenerate[idx(Descriptor::Regularity)] = !any_reg;

  for (Descriptor d : kAll) {
    if (r.degenerate[idx(d)]) {
      r.calibrated[d] = 0.0;
      continue;
    }
    const double v = linear(d, r.raw[d]);
    if (!std::isfinite(v)) throw NumericalError(std::string("descriptor ") + to_string(d) + " is not finite");
    if (v < -1e-12 || v > 1.0 + 1e-12) r.clamped = true;
    r.calibrated[d] = std::clamp(v, 0.0, 1.0);
  }
  return r;
}

DescriptorResult compute_descriptors(const Plane& lum, const DescriptorConfig& cfg, const Calibration& calib) {
  return evaluate_descriptors(measure_descriptors(lum, cfg), calib);
}

DescriptorResult compute_descriptors(const ImageBuffer& img, const DescriptorConfig& cfg, const Calibration& calib) {
  const ImageBuffer lum = img.channels() == 1 ? img : to_luminance(img);
  return compute_descriptors(lum.plane(0), cfg, calib);
}

Calibration calibrate(const std::vector<DescriptorMeasurements>& corpus, const DescriptorConfig& cfg,
                      const std::string& corpus_id) {
  if (corpus.empty()) throw InvalidArgument("calibration: empty corpus");
  Calibration c = Calibration::intrinsic(cfg);
  c.corpus = corpus_id;

  double norm = 0.0;
  for (const auto& m : corpus)
    if (m.oriented) norm = std::max(norm, m.entropy_min);
  if (norm > 0.0) c.directionality_norm = norm;

  auto fit = [&](Descriptor d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& m : corpus) {
      const DescriptorResult r = evaluate_descriptors(m, c);
      if (r.degenerate[idx(d)]) continue;
      lo = std::min(lo, r.raw[d]);
      hi = std::max(hi, r.raw[d]);
    }
    if (!(hi > lo))
      throw InvalidArgument(std::string("calibration: zero range for ") + to_string(d) + " over corpus '" +
                            corpus_id + "'");
    c.shift[idx(d)] = lo;
    c.scale[idx(d)] = hi - lo;
  };
  // Regularity reads the other constants, so it goes last.
  for (Descriptor d : kAll)
    if (d != Descriptor::Regularity) fit(d);
  fit(Descriptor::Regularity);
  return c;
}

Calibration calibrate(const std::vector<Plane>& corpus, const DescriptorConfig& cfg, const std::string& corpus_id) {
  std::vector<DescriptorMeasurements> ms;
  ms.reserve(corpus.size());
  for (const Plane& p : corpus) ms.push_back(measure_descriptors(p, cfg));
  return calibrate(ms, cfg, corpus_id);
}

void write_calibration(const std::string& path, const Calibration& calib) {
  calib.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write calibration file " + path);
  out.precision(17);
  out << "format=metamer-calibration-1\n";
  out << "corpus=" << calib.corpus << '\n';
  out << "directionality_norm=" << calib.directionality_norm << '\n';
  for (Descriptor d : kAll) {
    out << to_string(d) << ".shift=" << calib.shift[idx(d)] << '\n';
    out << to_string(d) << ".scale=" << calib.scale[idx(d)] << '\n';
  }
  if (!out) throw IoError("failed writing calibration file " + path);
}

Calibration read_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read calibration file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("calibration file " + path + ": malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto take = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError("calibration file " + path + ": missing key " + key);
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto number = [&](const std::string& key) {
    const std::string v = take(key);
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || v.empty()) throw IoError("calibration file " + path + ": bad number for " + key);
    return x;
  };
  if (take("format") != "metamer-calibration-1") throw IoError("calibration file " + path + ": unknown format");
  Calibration c;
  c.corpus = take("corpus");
  c.directionality_norm = number("directionality_norm");
  for (Descriptor d : kAll) {
    c.shift[idx(d)] = number(std::string(to_string(d)) + ".shift");
    c.scale[idx(d)] = number(std::string(to_string(d)) + ".scale");
  }
  if (!kv.empty()) throw IoError("calibration file " + path + ": unknown key " + kv.begin()->first);
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw IoError("calibration file " + path + ": " + e.what());
  }
  return c;
}

void write_descriptor_csv(std::ostream& out, const std::vector<DescriptorRow>& rows) {
  out << "image";
  for (Descriptor d : kAll) out << ',' << to_string(d);
  out << '\n';
  const auto old = out.precision(10);
  for (const DescriptorRow& row : rows) {
    out << row.image;
    for (Descriptor d : kAll) out << ',' << row.values[d];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace metamer
