#include "metamer/pipeline.hpp"

#include <cmath>
#include <string>

#include "metamer/error.hpp"
#include "metamer/logpolar.hpp"
#include "metamer/resample.hpp"

namespace metamer {

namespace {

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-12 ? r : v;
}

struct Grad {
  std::vector<std::vector<Plane>> mag;                // d/d magnitude
  std::vector<std::vector<ComplexPlane>> band;        // d/dRe + i d/dIm of the band
  std::vector<std::vector<ComplexPlane>> doubled;     // same for the phase-doubled band
  Plane channel;
};

template <class P>
P& lazy(P& p, int w, int h) {
  if (p.width != w || p.height != h) p = P(w, h);
  return p;
}

void add_product(Plane& dst, const Plane& a, const Plane& g, double scale = 1.0) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += scale * a.data[i] * g.data[i];
}

void add_product(ComplexPlane& dst, const ComplexPlane& a, const Plane& g) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += a.data[i] * g.data[i];
}

}  // namespace

PooledPipeline::PooledPipeline(int width, int height, int channels, const PyramidConfig& cfg,
                               const PoolingGeometry& geom)
    : width_(width), height_(height), channels_(channels), geom_(geom), plan_(width, height, cfg) {
  if (channels != 1 && channels != 3) throw InvalidArgument("pipeline needs 1 or 3 channels");
  if (geom.mode == PoolingMode::GazeCentric)
    throw InvalidArgument("pipeline pools a uniform domain; warp gaze-centric inputs first");
  catalog_ = statistic_catalog(cfg, channels == 3);
  for (int s = 0; s < cfg.scales; ++s) {
    const LevelShape& sh = plan_.shapes()[static_cast<std::size_t>(s)];
    poolers_.emplace_back(geom, width, height, sh.width, sh.height);
  }
}

PooledStatistics PooledPipeline::evaluate(std::span<const Plane> channels) const {
  PooledStatistics out;
  loss_and_gradient(channels, PooledStatistics{}, {}, nullptr, &out);
  return out;
}

double PooledPipeline::loss_and_gradient(std::span<const Plane> channels, const PooledStatistics& target,
                                         std::span<const double> weights, std::vector<Plane>* grad,
                                         PooledStatistics* current) const {
  if (static_cast<int>(channels.size()) != channels_)
    throw InvalidArgument("pipeline: expected " + std::to_string(channels_) + " channel planes");
  for (const Plane& p : channels)
    if (p.width != width_ || p.height != height_) throw InvalidArgument("pipeline: channel size mismatch");
  const bool with_target = !target.entries.empty();
  if (with_target && (target.entries.size() != catalog_.size() || weights.size() != catalog_.size()))
    throw InvalidArgument("pipeline: target/weights do not match the statistic catalog");
  if (grad && !with_target) throw InvalidArgument("pipeline: gradient needs a target");

  const PyramidConfig& cfg = plan_.config();
  std::vector<ChannelBands> dec;
  dec.reserve(channels.size());
  for (const Plane& ch : channels) dec.push_back(decompose(plan_, ch));

  std::vector<Grad> g;
  if (grad) {
    g.resize(channels.size());
    for (auto& gc : g) {
      gc.mag.resize(static_cast<std::size_t>(cfg.scales));
      gc.band.resize(static_cast<std::size_t>(cfg.scales));
      gc.doubled.resize(static_cast<std::size_t>(cfg.scales));
      for (int s = 0; s < cfg.scales; ++s) {
        gc.mag[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(cfg.orientations));
        gc.band[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(cfg.orientations));
        gc.doubled[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(cfg.orientations));
      }
    }
  }

  if (current) {
    current->geometry = geom_;
    current->source_width = width_;
    current->source_height = height_;
    current->entries.clear();
    current->entries.reserve(catalog_.size());
  }

  double loss = 0.0;
  for (std::size_t k = 0; k < catalog_.size(); ++k) {
    const StatisticKind& kind = catalog_[k];
    const LevelPooler& pooler = poolers_[static_cast<std::size_t>(kind.level())];
    const Plane stat = evaluate_statistic(kind, channels, dec, cfg);
    Plane pooled = pooler.apply(stat);
    if (with_target) {
      const Plane& t = target.entries[k].values;
      if (t.width != pooled.width || t.height != pooled.height)
        throw InvalidArgument("pipeline: target pooled plane size mismatch for " + kind.label());
      Plane gp(pooled.width, pooled.height);
      double sq = 0.0;
      for (std::size_t i = 0; i < pooled.size(); ++i) {
        const double d = pooled.data[i] - t.data[i];
        sq += d * d;
        gp.data[i] = 2.0 * weights[k] * d;
      }
      loss += weights[k] * sq;
      if (grad) {
        Plane gs;
        pooler.accumulate_adjoint(gp, gs);
        const auto s = static_cast<std::size_t>(kind.scale);
        const auto o = static_cast<std::size_t>(kind.orientation);
        const auto c = static_cast<std::size_t>(kind.channel);
        const int w = stat.width, h = stat.height;
        switch (kind.tag) {
          case StatTag::PixelMean: {
            Plane& dst = lazy(g[c].channel, w, h);
            for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += gs.data[i];
            break;
          }
          case StatTag::MagMean: {
            Plane& dst = lazy(g[c].mag[s][o], w, h);
            for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += gs.data[i];
            break;
          }
          case StatTag::MagSecondMoment:
            add_product(lazy(g[c].mag[s][o], w, h), dec[c].magnitude[s][o], gs, 2.0);
            break;
          case StatTag::XOrientCorr: {
            const auto o2 = static_cast<std::size_t>(kind.orientation2);
            add_product(lazy(g[c].mag[s][o], w, h), dec[c].magnitude[s][o2], gs);
            add_product(lazy(g[c].mag[s][o2], w, h), dec[c].magnitude[s][o], gs);
            break;
          }
          case StatTag::XScaleMagCorr: {
            const Plane& child = dec[c].magnitude[s][o];
            const Plane& parent = dec[c].magnitude[s + 1][o];
            add_product(lazy(g[c].mag[s][o], w, h), resize_circular(parent, w, h), gs);
            Plane gc(w, h);
            add_product(gc, child, gs);
            Plane up = resize_circular_adjoint(gc, parent.width, parent.height);
            Plane& dst = lazy(g[c].mag[s + 1][o], parent.width, parent.height);
            for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += up.data[i];
            break;
          }
          case StatTag::XScalePhaseCorr: {
            const ComplexPlane& b = dec[c].bands[s][o];
            const ComplexPlane& pd = dec[c].phase_doubled[s + 1][o];
            add_product(lazy(g[c].band[s][o], w, h), resize_circular(pd, w, h), gs);
            ComplexPlane gq(w, h);
            add_product(gq, b, gs);
            ComplexPlane up = resize_circular_adjoint(gq, pd.width, pd.height);
            ComplexPlane& dst = lazy(g[c].doubled[s + 1][o], pd.width, pd.height);
            for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += up.data[i];
            break;
          }
          case StatTag::EndStop: {
            const Plane& m = dec[c].magnitude[s][o];
            const double a = edge_angle(kind.orientation, cfg.orientations);
            const double dx = snap(cfg.end_stop_shift * std::cos(a));
            const double dy = snap(cfg.end_stop_shift * std::sin(a));
            const Plane shifted = shift_circular(m, dx, dy);
            Plane ge(w, h);
            for (std::size_t i = 0; i < ge.size(); ++i) ge.data[i] = 2.0 * (m.data[i] - shifted.data[i]) * gs.data[i];
            const Plane back = shift_circular_adjoint(ge, dx, dy);
            Plane& dst = lazy(g[c].mag[s][o], w, h);
            for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += ge.data[i] - back.data[i];
            break;
          }
          case StatTag::XColorMagCorr: {
            auto [c1, c2] = channel_indices(kind.pair);
            const auto a1 = static_cast<std::size_t>(c1), a2 = static_cast<std::size_t>(c2);
            add_product(lazy(g[a1].mag[s][o], w, h), dec[a2].magnitude[s][o], gs);
            add_product(lazy(g[a2].mag[s][o], w, h), dec[a1].magnitude[s][o], gs);
            break;
          }
          case StatTag::XColorPhaseCorr: {
            auto [c1, c2] = channel_indices(kind.pair);
            const auto a1 = static_cast<std::size_t>(c1), a2 = static_cast<std::size_t>(c2);
            add_product(lazy(g[a1].band[s][o], w, h), dec[a2].bands[s][o], gs);
            add_product(lazy(g[a2].band[s][o], w, h), dec[a1].bands[s][o], gs);
            break;
          }
        }
      }
    }
    if (current) current->entries.push_back({kind, std::move(pooled)});
  }

  if (grad) {
    grad->assign(channels.size(), Plane());
    for (std::size_t c = 0; c < channels.size(); ++c) {
      BandStack gb(static_cast<std::size_t>(cfg.scales));
      for (int si = 0; si < cfg.scales; ++si) {
        const auto s = static_cast<std::size_t>(si);
        for (int oi = 0; oi < cfg.orientations; ++oi) {
          const auto o = static_cast<std::size_t>(oi);
          const ComplexPlane& b = dec[c].bands[s][o];
          ComplexPlane acc = g[c].band[s][o].size() == b.size() ? std::move(g[c].band[s][o])
                                                               : ComplexPlane(b.width, b.height);
          const bool has_mag = g[c].mag[s][o].size() == b.size();
          const bool has_dbl = g[c].doubled[s][o].size() == b.size();
          for (std::size_t i = 0; i < b.size() && (has_mag || has_dbl); ++i) {
            const double x = b.data[i].real(), y = b.data[i].imag();
            const double m = std::sqrt(x * x + y * y);
            if (m == 0.0) continue;
            double gx = 0.0, gy = 0.0;
            if (has_mag) {
              const double gm = g[c].mag[s][o].data[i];
              gx += gm * x / m;
              gy += gm * y / m;
            }
            if (has_dbl) {
              // pd = (x^2 - y^2, 2xy) / m
              const double gr = g[c].doubled[s][o].data[i].real();
              const double gi = g[c].doubled[s][o].data[i].imag();
              const double m3 = m * m * m;
              const double re = x * x - y * y, im = 2.0 * x * y;
              gx += gr * (2.0 * x / m - re * x / m3) + gi * (2.0 * y / m - im * x / m3);
              gy += gr * (-2.0 * y / m - re * y / m3) + gi * (2.0 * x / m - im * y / m3);
            }
            acc.data[i] += std::complex<double>(gx, gy);
          }
          gb[s].push_back(std::move(acc));
        }
      }
      Plane out = plan_.analyze_adjoint(gb);
      if (g[c].channel.size() == out.size())
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += g[c].channel.data[i];
      (*grad)[c] = std::move(out);
    }
  }
  return loss;
}

PooledStatistics compute_pooled_statistics(const ImageBuffer& img, const PyramidConfig& cfg,
                                           const PoolingGeometry& geom, OpponentMode mode) {
  if (geom.mode == PoolingMode::GazeCentric) {
    const LogPolarMap map(geom, img.width(), img.height(), 1 << cfg.scales);
    const ImageBuffer warped = logpolar_warp(img, map);
    const auto channels = statistic_channels(warped, mode);
    PooledPipeline pipe(warped.width(), warped.height(), static_cast<int>(channels.size()), cfg,
                        map.warped_geometry());
    PooledStatistics out = pipe.evaluate(channels);
    out.geometry = geom;
    return out;
  }
  const auto channels = statistic_channels(img, mode);
  PooledPipeline pipe(img.width(), img.height(), static_cast<int>(channels.size()), cfg, geom);
  return pipe.evaluate(channels);
}

}  // namespace metamer
