#include "metamer/synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>

#include "metamer/error.hpp"
#include "metamer/logpolar.hpp"
#include "metamer/statistics.hpp"

namespace metamer {

namespace {

constexpr double kWeightEps = 1e-8;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_compatible(const PooledStatistics& a, const PooledStatistics& b) {
  if (a.entries.size() != b.entries.size()) throw InvalidArgument("pooled statistics: catalog size mismatch");
  if (a.geometry.mode != b.geometry.mode || a.source_width != b.source_width || a.source_height != b.source_height)
    throw InvalidArgument("pooled statistics: geometry mismatch");
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    if (!(a.entries[k].kind == b.entries[k].kind))
      throw InvalidArgument("pooled statistics: catalog mismatch at entry " + std::to_string(k));
    if (a.entries[k].values.width != b.entries[k].values.width ||
        a.entries[k].values.height != b.entries[k].values.height)
      throw InvalidArgument("pooled statistics: shape mismatch for " + a.entries[k].kind.label());
  }
}

void require_synthesizable(const ImageBuffer& img) {
  if (img.space() != ColorSpace::Gray && img.space() != ColorSpace::LinearRGB)
    throw InvalidArgument(std::string("synthesis needs a gray or linearRGB image, got ") + to_string(img.space()));
}

/// Pulls per-channel plane gradients back to the image's own space.
ImageBuffer image_gradient(const ImageBuffer& x, std::vector<Plane>& grads, OpponentMode mode) {
  if (x.space() == ColorSpace::LinearRGB) {
    OpponentImage g{std::move(grads[0]), std::move(grads[1]), std::move(grads[2])};
    return opponent_adjoint(x, g, mode);
  }
  return ImageBuffer::from_planes(grads, x.space());
}

constexpr int kMaxBacktracks = 20;
constexpr double kArmijo = 1e-4;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Curvature pairs for the two-loop recursion.
class LbfgsHistory {
 public:
  explicit LbfgsHistory(std::size_t capacity) : capacity_(capacity) {}

  bool empty() const { return s_.empty(); }
  void clear() {
    s_.clear();
    y_.clear();
    rho_.clear();
  }

  void push(std::vector<double> s, std::vector<double> y) {
    const double sy = dot(s, y);
    if (!(sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y)))) return;
    if (s_.size() == capacity_) {
      s_.erase(s_.begin());
      y_.erase(y_.begin());
      rho_.erase(rho_.begin());
    }
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
    rho_.push_back(1.0 / sy);
  }

  /// -H g; empty history gives -g.
  std::vector<double> direction(std::span<const double> g) const {
    std::vector<double> q(g.begin(), g.end());
    std::vector<double> alpha(s_.size());
    for (std::size_t k = s_.size(); k-- > 0;) {
      alpha[k] = rho_[k] * dot(s_[k], q);
      for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * y_[k][i];
    }
    if (!s_.empty()) {
      const double gamma = 1.0 / (rho_.back() * dot(y_.back(), y_.back()));
      for (double& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < s_.size(); ++k) {
      const double beta = rho_[k] * dot(y_[k], q);
      for (std::size_t i = 0; i < q.size(); ++i) q[i] += s_[k][i] * (alpha[k] - beta);
    }
    for (double& v : q) v = -v;
    return q;
  }

 private:
  std::size_t capacity_;
  std::vector<std::vector<double>> s_, y_;
  std::vector<double> rho_;
};

struct Optimized {
  ImageBuffer image;
  SynthesisTrace trace;
};

Optimized optimize(const ImageBuffer& target, const PoolingGeometry& geom, const ImageBuffer& seed,
                   const SynthesisConfig& cfg) {
  const auto t0 = Clock::now();
  const auto target_channels = statistic_channels(target, cfg.opponent);
  const PooledPipeline pipe(target.width(), target.height(), static_cast<int>(target_channels.size()), cfg.pyramid,
                            geom);
  const PooledStatistics target_pooled = pipe.evaluate(target_channels);
  const std::vector<double> full_weights = loss_weights(target_pooled);
  std::vector<double> weights = full_weights;

  // Coarse-to-fine: stage j weights PixelMean and kinds at scale >= scales - j, so stage 0
  // matches local means alone and the last stage weights everything.
  const int scales = cfg.pyramid.scales;
  const int stages = cfg.coarse_to_fine > 0 ? scales + 1 : 1;
  auto stage_of = [&](int it) { return cfg.coarse_to_fine > 0 ? std::min(it / cfg.coarse_to_fine, scales) : 0; };
  auto set_stage = [&](int stage) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const StatisticKind& kind = target_pooled.entries[k].kind;
      const bool on = stage == stages - 1 || kind.tag == StatTag::PixelMean || kind.scale >= scales - stage;
      weights[k] = on ? full_weights[k] : 0.0;
    }
  };
  int stage = stage_of(0);
  int stage_start = 0;
  set_stage(stage);

  Optimized out;
  SynthesisTrace& trace = out.trace;
  auto full_loss = [&](const ImageBuffer& img) {
    return loss(pipe.evaluate(statistic_channels(img, cfg.opponent)), target_pooled, full_weights);
  };
  if (stages > 1) trace.initial_loss = full_loss(seed);
  ImageBuffer x = seed;
  ImageBuffer best = x;
  double best_loss = std::numeric_limits<double>::infinity();
  double step = cfg.step_size;
  double window_sum = 0.0;
  double prev_avg = -1.0;
  std::vector<double> m1, m2;
  if (cfg.update == UpdateRule::Adam) {
    m1.assign(x.data().size(), 0.0);
    m2.assign(x.data().size(), 0.0);
  }
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-12;
  double beta1_t = 1.0, beta2_t = 1.0;
  LbfgsHistory history(static_cast<std::size_t>(cfg.history));

  auto evaluate = [&](const ImageBuffer& img, ImageBuffer& grad) {
    std::vector<Plane> grads;
    const double l = pipe.loss_and_gradient(statistic_channels(img, cfg.opponent), target_pooled, weights, &grads);
    if (std::isfinite(l)) grad = image_gradient(img, grads, cfg.opponent);
    return l;
  };

  double l = 0.0;
  ImageBuffer g;
  bool have_gradient = false;
  double next_loss = 0.0;
  trace.status = SynthesisStatus::MaxIterations;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (stage_of(it) != stage) {
      stage = stage_of(it);
      stage_start = it;
      set_stage(stage);
      history.clear();
      std::fill(m1.begin(), m1.end(), 0.0);
      std::fill(m2.begin(), m2.end(), 0.0);
      beta1_t = beta2_t = 1.0;
      step = cfg.step_size;
      window_sum = 0.0;
      prev_avg = -1.0;
      have_gradient = false;
    }
    const bool final_stage = stage == stages - 1;
    if (!have_gradient) l = evaluate(x, g);
    have_gradient = false;
    if (!std::isfinite(l)) {
      trace.iterations.push_back({it, l, step, 0.0});
      trace.status = SynthesisStatus::NonFinite;
      break;
    }
    if (final_stage && l < best_loss) {
      best_loss = l;
      best = x;
    }
    if (l == 0.0 && final_stage) {
      trace.iterations.push_back({it, l, step, 0.0});
      trace.status = SynthesisStatus::ZeroLoss;
      break;
    }
    auto gx = g.data();
    auto xd = x.data();
    double max_update = 0.0;
    double recorded_step = step;
    if (cfg.update == UpdateRule::Adam) {
      beta1_t *= kBeta1;
      beta2_t *= kBeta2;
      for (std::size_t i = 0; i < xd.size(); ++i) {
        m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * gx[i];
        m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * gx[i] * gx[i];
        const double mh = m1[i] / (1.0 - beta1_t);
        const double vh = m2[i] / (1.0 - beta2_t);
        const double nv = std::clamp(xd[i] - step * mh / (std::sqrt(vh) + kAdamEps), 0.0, 1.0);
        max_update = std::max(max_update, std::abs(nv - xd[i]));
        xd[i] = nv;
      }
    } else if (cfg.update == UpdateRule::NormalizedGradient) {
      const double gmax = max_abs(gx);
      if (gmax > 0.0)
        for (std::size_t i = 0; i < xd.size(); ++i) {
          const double nv = std::clamp(xd[i] - step * gx[i] / gmax, 0.0, 1.0);
          max_update = std::max(max_update, std::abs(nv - xd[i]));
          xd[i] = nv;
        }
    } else {
      // Projected L-BFGS with a backtracking (Armijo) search along the clamped path.
      std::vector<double> d = history.direction(gx);
      double slope = dot(gx, d);
      if (history.empty() || !(slope < 0.0)) {
        history.clear();
        const double gmax = max_abs(gx);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = gmax > 0.0 ? -step * gx[i] / gmax : 0.0;
      }
      ImageBuffer trial = x, trial_grad;
      double t = 1.0, trial_loss = l;
      bool accepted = false;
      for (int k = 0; k < kMaxBacktracks && !accepted; ++k, t *= 0.5) {
        auto td = trial.data();
        double decrease = 0.0;
        for (std::size_t i = 0; i < td.size(); ++i) {
          td[i] = std::clamp(xd[i] + t * d[i], 0.0, 1.0);
          decrease += gx[i] * (td[i] - xd[i]);
        }
        if (!(decrease < 0.0)) break;
        trial_loss = evaluate(trial, trial_grad);
        accepted = std::isfinite(trial_loss) && trial_loss <= l + kArmijo * decrease;
        if (accepted) recorded_step = t;
      }
      if (accepted) {
        const auto td = trial.data();
        const auto tg = trial_grad.data();
        std::vector<double> sv(td.size()), yv(td.size());
        for (std::size_t i = 0; i < td.size(); ++i) {
          sv[i] = td[i] - xd[i];
          yv[i] = tg[i] - gx[i];
          max_update = std::max(max_update, std::abs(sv[i]));
        }
        history.push(std::move(sv), std::move(yv));
        x = std::move(trial);
        g = std::move(trial_grad);
        next_loss = trial_loss;
        have_gradient = true;
      } else {
        history.clear();
        recorded_step = 0.0;
      }
    }
    trace.iterations.push_back({it, l, recorded_step, max_update});
    if (have_gradient) l = next_loss;

    window_sum += trace.iterations.back().loss;
    if (!final_stage) continue;
    if ((it + 1 - stage_start) % cfg.window == 0) {
      const double avg = window_sum / cfg.window;
      window_sum = 0.0;
      if (prev_avg >= 0.0) {
        if (avg >= prev_avg) step *= cfg.step_decay;
        if (std::abs(prev_avg - avg) < cfg.stop_rel_change * prev_avg) {
          trace.status = SynthesisStatus::Converged;
          prev_avg = avg;
          break;
        }
      }
      prev_avg = avg;
    }
  }
  if ((have_gradient && stage == stages - 1 && l < best_loss) || !std::isfinite(best_loss)) {
    best_loss = l;
    best = x;
  }

  if (trace.iterations.empty()) {
    trace.initial_loss = trace.final_loss = full_loss(best);
  } else {
    if (stages == 1) trace.initial_loss = trace.iterations.front().loss;
    trace.final_loss = stage == stages - 1 ? best_loss : full_loss(best);
  }
  trace.final_errors = relative_errors(pipe.evaluate(statistic_channels(best, cfg.opponent)), target_pooled);
  trace.seconds = seconds_since(t0);
  out.image = std::move(best);
  return out;
}

}  // namespace

const char* to_string(SeedMode m) { return m == SeedMode::MatchedNoise ? "matched_noise" : "from_image"; }
const char* to_string(UpdateRule r) {
  switch (r) {
    case UpdateRule::NormalizedGradient: return "normalized_gradient";
    case UpdateRule::Adam: return "adam";
    case UpdateRule::Lbfgs: return "lbfgs";
  }
  return "?";
}

const char* to_string(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::Converged: return "converged";
    case SynthesisStatus::MaxIterations: return "max_iterations";
    case SynthesisStatus::ZeroLoss: return "zero_loss";
    case SynthesisStatus::NonFinite: return "non_finite";
  }
  return "?";
}

void SynthesisConfig::validate() const {
  if (!(step_size > 0.0)) throw InvalidArgument("step_size must be > 0");
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(step_decay > 0.0 && step_decay <= 1.0)) throw InvalidArgument("step_decay must be in (0, 1]");
  if (!(stop_rel_change >= 0.0)) throw InvalidArgument("stop_rel_change must be >= 0");
  if (window < 1) throw InvalidArgument("window must be >= 1");
  if (history < 1) throw InvalidArgument("history must be >= 1");
  if (seed_mode == SeedMode::FromImage && !seed_image) throw InvalidArgument("seed_mode from_image needs a seed image");
}

std::vector<double> loss_weights(const PooledStatistics& target) {
  std::vector<double> w;
  w.reserve(target.entries.size());
  for (const auto& e : target.entries) {
    double s = 0.0;
    for (double v : e.values.data) s += v * v;
    w.push_back(1.0 / (s / static_cast<double>(e.values.size()) + kWeightEps));
  }
  return w;
}

double loss(const PooledStatistics& candidate, const PooledStatistics& target, std::span<const double> weights) {
  check_compatible(candidate, target);
  if (weights.size() != target.entries.size()) throw InvalidArgument("loss: one weight per statistic required");
  double total = 0.0;
  for (std::size_t k = 0; k < target.entries.size(); ++k) {
    const auto& a = candidate.entries[k].values.data;
    const auto& b = target.entries[k].values.data;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    total += weights[k] * s;
  }
  return total;
}

std::vector<KindError> relative_errors(const PooledStatistics& candidate, const PooledStatistics& target) {
  check_compatible(candidate, target);
  std::vector<KindError> out;
  for (std::size_t k = 0; k < target.entries.size(); ++k) {
    const auto& a = candidate.entries[k].values.data;
    const auto& b = target.entries[k].values.data;
    double d = 0.0, t = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      d += (a[i] - b[i]) * (a[i] - b[i]);
      t += b[i] * b[i];
    }
    out.push_back({target.entries[k].kind, std::sqrt(d / (t + kWeightEps * static_cast<double>(b.size())))});
  }
  return out;
}

PoolingGeometry pooling_domain_geometry(const PooledStatistics& target) {
  const PoolingGeometry& g = target.geometry;
  if (g.mode != PoolingMode::GazeCentric) return g;
  PoolingGeometry u;
  u.mode = PoolingMode::Uniform;
  u.region_diameter = target.source_height / (2.0 * std::numbers::pi) * g.eccentricity_rate;
  u.spacing_fraction = g.spacing_fraction;
  return u;
}

ImageBuffer gradient(const ImageBuffer& candidate, const PooledStatistics& target, std::span<const double> weights,
                     const PyramidConfig& cfg, OpponentMode mode) {
  if (candidate.width() != target.source_width || candidate.height() != target.source_height)
    throw InvalidArgument("gradient: candidate size does not match the pooling domain");
  auto channels = statistic_channels(candidate, mode);
  const PooledPipeline pipe(candidate.width(), candidate.height(), static_cast<int>(channels.size()), cfg,
                            pooling_domain_geometry(target));
  std::vector<Plane> grads;
  pipe.loss_and_gradient(channels, target, weights, &grads);
  return image_gradient(candidate, grads, mode);
}

ImageBuffer seed_image(const ImageBuffer& target, const SynthesisConfig& cfg) {
  if (cfg.seed_mode == SeedMode::FromImage) {
    if (!cfg.seed_image) throw InvalidArgument("seed_mode from_image needs a seed image");
    return *cfg.seed_image;
  }
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ImageBuffer out(target.width(), target.height(), target.channels(), target.space());
  for (int c = 0; c < target.channels(); ++c) {
    const auto src = target.channel(c);
    const double n = static_cast<double>(src.size());
    const double mean = std::accumulate(src.begin(), src.end(), 0.0) / n;
    double var = 0.0;
    for (double v : src) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    for (double& v : out.channel(c)) v = std::clamp(mean + sd * gauss(rng), 0.0, 1.0);
  }
  return out;
}

SynthesisResult synthesize(const ImageBuffer& target, const PoolingGeometry& geom, const SynthesisConfig& cfg) {
  cfg.validate();
  geom.validate();
  require_synthesizable(target);
  if (cfg.seed_mode == SeedMode::FromImage) {
    const ImageBuffer& s = *cfg.seed_image;
    if (s.width() != target.width() || s.height() != target.height() || s.channels() != target.channels())
      throw InvalidArgument("seed image must match the target's size and channels");
  }

  if (geom.mode != PoolingMode::GazeCentric) {
    Optimized r = optimize(target, geom, seed_image(target, cfg), cfg);
    return {std::move(r.image), std::move(r.trace)};
  }

  const LogPolarMap map(geom, target.width(), target.height(), 1 << cfg.pyramid.scales);
  const ImageBuffer warped_target = logpolar_warp(target, map);
  SynthesisConfig warped_cfg = cfg;
  if (cfg.seed_mode == SeedMode::FromImage) warped_cfg.seed_image = logpolar_warp(*cfg.seed_image, map);
  Optimized r = optimize(warped_target, map.warped_geometry(), seed_image(warped_target, warped_cfg), warped_cfg);

  ImageBuffer out = logpolar_unwarp(r.image, map);
  for (int c = 0; c < out.channels(); ++c) {
    auto dst = out.channel(c);
    const auto src = target.channel(c);
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) {
        const double w = fovea_blend_weight(std::hypot(x - geom.gaze_x, y - geom.gaze_y), geom.fovea_radius);
        const std::size_t i = static_cast<std::size_t>(y) * out.width() + x;
        dst[i] = w * src[i] + (1.0 - w) * dst[i];
      }
  }
  return {std::move(out), std::move(r.trace)};
}

void write_trace_csv(const SynthesisTrace& trace, std::ostream& os) {
  os << std::setprecision(10);
  os << "iteration,loss,step,max_update\n";
  for (const auto& r : trace.iterations) os << r.iteration << "," << r.loss << "," << r.step << "," << r.max_update << "\n";
  os << "\n# status," << to_string(trace.status) << "\n";
  os << "# initial_loss," << trace.initial_loss << "\n";
  os << "# final_loss," << trace.final_loss << "\n";
  os << "kind,channel,relative_rms\n";
  for (const auto& e : trace.final_errors)
    os << e.kind.label() << "," << (e.kind.is_cross_color() ? to_string(e.kind.pair) : to_string(e.kind.channel)) << ","
       << e.relative_rms << "\n";
}

GradCheckReport grad_check(int size, const PyramidConfig& cfg, double tolerance, int pixels, std::uint64_t seed,
                           double step) {
  if (size > 64) throw InvalidArgument("grad_check: size must be <= 64");
  if (pixels < 1) throw InvalidArgument("grad_check: need at least one pixel");
  cfg.validate(size, size);
  const auto t0 = Clock::now();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  Plane x(size, size), y(size, size);
  for (double& v : x.data) v = u(rng);
  for (double& v : y.data) v = u(rng);

  const PooledPipeline pipe(size, size, 1, cfg, PoolingGeometry::global());
  const PooledStatistics target = pipe.evaluate(std::vector<Plane>{y});
  const std::vector<double> weights = loss_weights(target);
  std::vector<Plane> grads;
  std::vector<Plane> xs{x};
  pipe.loss_and_gradient(xs, target, weights, &grads);
  const Plane& g = grads[0];
  double gmax = 0.0;
  for (double v : g.data) gmax = std::max(gmax, std::abs(v));

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(order.size(), static_cast<std::size_t>(pixels)));

  std::vector<double> rel;
  for (std::size_t i : order) {
    std::vector<Plane> p{x}, m{x};
    p[0].data[i] += step;
    m[0].data[i] -= step;
    const double fd =
        (pipe.loss_and_gradient(p, target, weights, nullptr) - pipe.loss_and_gradient(m, target, weights, nullptr)) /
        (2.0 * step);
    const double denom = std::max({std::abs(g.data[i]), std::abs(fd), 1e-6 * gmax});
    rel.push_back(denom > 0.0 ? std::abs(g.data[i] - fd) / denom : 0.0);
  }
  GradCheckReport r;
  r.size = size;
  r.pixels = static_cast<int>(rel.size());
  r.step = step;
  r.tolerance = tolerance;
  r.max_rel_error = *std::max_element(rel.begin(), rel.end());
  std::sort(rel.begin(), rel.end());
  const std::size_t n = rel.size();
  r.median_rel_error = n % 2 == 1 ? rel[n / 2] : 0.5 * (rel[n / 2 - 1] + rel[n / 2]);
  r.passed = r.max_rel_error < tolerance;
  r.seconds = seconds_since(t0);
  return r;
}

void write_grad_check(const GradCheckReport& r, std::ostream& os) {
  os << std::setprecision(6);
  os << "size=" << r.size << "\n";
  os << "pixels=" << r.pixels << "\n";
  os << "step=" << r.step << "\n";
  os << "tolerance=" << r.tolerance << "\n";
  os << "max_rel_error=" << r.max_rel_error << "\n";
  os << "median_rel_error=" << r.median_rel_error << "\n";
  os << "seconds=" << r.seconds << "\n";
  os << "result=" << (r.passed ? "pass" : "fail") << "\n";
}

}  // namespace metamer
