#include "metamer/statistics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "metamer/error.hpp"
#include "metamer/resample.hpp"

namespace metamer {

const char* to_string(StatTag tag) {
  switch (tag) {
    case StatTag::PixelMean: return "PixelMean";
    case StatTag::MagMean: return "MagMean";
    case StatTag::MagSecondMoment: return "MagSecondMoment";
    case StatTag::XOrientCorr: return "XOrientCorr";
    case StatTag::XScaleMagCorr: return "XScaleMagCorr";
    case StatTag::XScalePhaseCorr: return "XScalePhaseCorr";
    case StatTag::EndStop: return "EndStop";
    case StatTag::XColorMagCorr: return "XColorMagCorr";
    case StatTag::XColorPhaseCorr: return "XColorPhaseCorr";
  }
  return "?";
}

const char* to_string(Channel c) {
  switch (c) {
    case Channel::A: return "A";
    case Channel::RG: return "RG";
    case Channel::BY: return "BY";
    case Channel::None: return "-";
  }
  return "?";
}

const char* to_string(ChannelPair p) {
  switch (p) {
    case ChannelPair::A_RG: return "A-RG";
    case ChannelPair::A_BY: return "A-BY";
    case ChannelPair::RG_BY: return "RG-BY";
  }
  return "?";
}

std::pair<int, int> channel_indices(ChannelPair p) {
  switch (p) {
    case ChannelPair::A_RG: return {0, 1};
    case ChannelPair::A_BY: return {0, 2};
    case ChannelPair::RG_BY: return {1, 2};
  }
  return {0, 1};
}

bool StatisticKind::is_magnitude_derived() const {
  switch (tag) {
    case StatTag::MagMean:
    case StatTag::MagSecondMoment:
    case StatTag::XOrientCorr:
    case StatTag::XScaleMagCorr:
    case StatTag::EndStop:
    case StatTag::XColorMagCorr:
      return true;
    default:
      return false;
  }
}

std::string StatisticKind::label() const {
  std::ostringstream os;
  os << to_string(tag);
  switch (tag) {
    case StatTag::PixelMean:
      break;
    case StatTag::XOrientCorr:
      os << "(s=" << scale << ",o1=" << orientation << ",o2=" << orientation2 << ")";
      break;
    case StatTag::XColorMagCorr:
    case StatTag::XColorPhaseCorr:
      os << "(s=" << scale << ",o=" << orientation << "," << to_string(pair) << ")";
      break;
    default:
      os << "(s=" << scale << ",o=" << orientation << ")";
  }
  return os.str();
}

std::vector<StatisticKind> statistic_catalog(const PyramidConfig& cfg, bool color) {
  const int S = cfg.scales, K = cfg.orientations;
  std::vector<StatisticKind> cat;
  const int nch = color ? 3 : 1;
  for (int c = 0; c < nch; ++c) {
    const auto ch = static_cast<Channel>(c);
    cat.push_back({StatTag::PixelMean, ch});
    for (StatTag tag : {StatTag::MagMean, StatTag::MagSecondMoment})
      for (int s = 0; s < S; ++s)
        for (int o = 0; o < K; ++o) cat.push_back({tag, ch, s, o});
    for (int s = 0; s < S; ++s)
      for (int o1 = 0; o1 < K; ++o1)
        for (int o2 = o1 + 1; o2 < K; ++o2) cat.push_back({StatTag::XOrientCorr, ch, s, o1, o2});
    for (StatTag tag : {StatTag::XScaleMagCorr, StatTag::XScalePhaseCorr})
      for (int s = 0; s + 1 < S; ++s)
        for (int o = 0; o < K; ++o) cat.push_back({tag, ch, s, o});
    for (int s = 0; s < S; ++s)
      for (int o = 0; o < K; ++o) cat.push_back({StatTag::EndStop, ch, s, o});
  }
  if (color) {
    for (StatTag tag : {StatTag::XColorMagCorr, StatTag::XColorPhaseCorr})
      for (int s = 0; s < S; ++s)
        for (int o = 0; o < K; ++o)
          for (ChannelPair p : {ChannelPair::A_RG, ChannelPair::A_BY, ChannelPair::RG_BY})
            cat.push_back({tag, Channel::None, s, o, 0, p});
  }
  return cat;
}

std::size_t statistic_count(const PyramidConfig& cfg, bool color) {
  const std::size_t S = static_cast<std::size_t>(cfg.scales), K = static_cast<std::size_t>(cfg.orientations);
  const std::size_t per_channel = 1 + 2 * S * K + S * K * (K - 1) / 2 + 2 * (S - 1) * K + S * K;
  return color ? 3 * per_channel + 2 * 3 * S * K : per_channel;
}

std::vector<Plane> statistic_channels(const ImageBuffer& img, OpponentMode mode) {
  switch (img.space()) {
    case ColorSpace::Gray:
      if (img.channels() != 1) throw InvalidArgument("gray image must have one channel");
      return {img.plane(0)};
    case ColorSpace::LinearRGB: {
      OpponentImage opp = to_opponent(img, mode);
      return {std::move(opp.achromatic), std::move(opp.red_green), std::move(opp.blue_yellow)};
    }
    case ColorSpace::Opponent:
      if (img.channels() != 3) throw InvalidArgument("opponent image must have three channels");
      return {img.plane(0), img.plane(1), img.plane(2)};
    default:
      throw InvalidArgument(std::string("statistics: unsupported color space ") + to_string(img.space()));
  }
}

double edge_angle(int orientation, int orientations) {
  return filters::orientation_angle(orientation, orientations) + std::numbers::pi / 2;
}

namespace {

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-12 ? r : v;
}

Plane multiply(const Plane& a, const Plane& b) {
  Plane out(a.width, a.height);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

}  // namespace

Plane end_stop_image(const Plane& mag, double shift, double angle) {
  const double dx = snap(shift * std::cos(angle));
  const double dy = snap(shift * std::sin(angle));
  Plane shifted = shift_circular(mag, dx, dy);
  Plane out(mag.width, mag.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = mag.data[i] - shifted.data[i];
    out.data[i] = d * d;
  }
  return out;
}

ChannelBands decompose(const PyramidPlan& plan, const Plane& channel) {
  ChannelBands cb;
  cb.bands = plan.analyze(channel);
  for (const auto& scale : cb.bands) {
    auto& mags = cb.magnitude.emplace_back();
    auto& dbl = cb.phase_doubled.emplace_back();
    for (const auto& band : scale) {
      mags.push_back(magnitude(band));
      dbl.push_back(phase_double(band));
    }
  }
  return cb;
}

Plane evaluate_statistic(const StatisticKind& kind, std::span<const Plane> channels,
                         std::span<const ChannelBands> dec, const PyramidConfig& cfg) {
  const auto s = static_cast<std::size_t>(kind.scale);
  const auto o = static_cast<std::size_t>(kind.orientation);
  const auto c = static_cast<std::size_t>(kind.channel);
  switch (kind.tag) {
    case StatTag::PixelMean:
      return channels[c];
    case StatTag::MagMean:
      return dec[c].magnitude[s][o];
    case StatTag::MagSecondMoment: {
      const Plane& m = dec[c].magnitude[s][o];
      return multiply(m, m);
    }
    case StatTag::XOrientCorr:
      return multiply(dec[c].magnitude[s][o], dec[c].magnitude[s][static_cast<std::size_t>(kind.orientation2)]);
    case StatTag::XScaleMagCorr: {
      const Plane& m = dec[c].magnitude[s][o];
      return multiply(m, resize_circular(dec[c].magnitude[s + 1][o], m.width, m.height));
    }
    case StatTag::XScalePhaseCorr: {
      const ComplexPlane& b = dec[c].bands[s][o];
      ComplexPlane parent = resize_circular(dec[c].phase_doubled[s + 1][o], b.width, b.height);
      Plane out(b.width, b.height);
      for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = (b.data[i] * std::conj(parent.data[i])).real();
      return out;
    }
    case StatTag::EndStop:
      return end_stop_image(dec[c].magnitude[s][o], cfg.end_stop_shift, edge_angle(kind.orientation, cfg.orientations));
    case StatTag::XColorMagCorr: {
      auto [c1, c2] = channel_indices(kind.pair);
      return multiply(dec[static_cast<std::size_t>(c1)].magnitude[s][o], dec[static_cast<std::size_t>(c2)].magnitude[s][o]);
    }
    case StatTag::XColorPhaseCorr: {
      auto [c1, c2] = channel_indices(kind.pair);
      const ComplexPlane& b1 = dec[static_cast<std::size_t>(c1)].bands[s][o];
      const ComplexPlane& b2 = dec[static_cast<std::size_t>(c2)].bands[s][o];
      Plane out(b1.width, b1.height);
      for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = (b1.data[i] * std::conj(b2.data[i])).real();
      return out;
    }
  }
  throw InvalidArgument("evaluate_statistic: unknown tag");
}

namespace {

StatisticSet compute_from_channels(const std::vector<Plane>& channels, const PyramidConfig& cfg) {
  const int w = channels.front().width, h = channels.front().height;
  PyramidPlan plan(w, h, cfg);
  std::vector<ChannelBands> dec;
  for (const auto& ch : channels) dec.push_back(decompose(plan, ch));

  StatisticSet set;
  set.width = w;
  set.height = h;
  set.color = channels.size() == 3;
  for (const auto& kind : statistic_catalog(cfg, set.color)) {
    Plane img = evaluate_statistic(kind, channels, dec, cfg);
    set.entries.push_back({kind, resize_circular(img, w, h)});
  }
  return set;
}

}  // namespace

StatisticSet compute_statistics(const ImageBuffer& img, const PyramidConfig& cfg, OpponentMode mode) {
  return compute_from_channels(statistic_channels(img, mode), cfg);
}

StatisticSet compute_statistics(const OpponentImage& img, const PyramidConfig& cfg) {
  return compute_from_channels({img.achromatic, img.red_green, img.blue_yellow}, cfg);
}

}  // namespace metamer
