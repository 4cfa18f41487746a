#pragma once

#include <span>
#include <string>
#include <vector>

#include "metamer/image.hpp"
#include "metamer/pyramid.hpp"

namespace metamer {

enum class StatTag {
  PixelMean,
  MagMean,
  MagSecondMoment,
  XOrientCorr,
  XScaleMagCorr,
  XScalePhaseCorr,
  EndStop,
  XColorMagCorr,
  XColorPhaseCorr,
};

enum class Channel { A = 0, RG = 1, BY = 2, None = 3 };
enum class ChannelPair { A_RG, A_BY, RG_BY };

const char* to_string(StatTag tag);
const char* to_string(Channel c);
const char* to_string(ChannelPair p);
std::pair<int, int> channel_indices(ChannelPair p);

struct StatisticKind {
  StatTag tag = StatTag::PixelMean;
  Channel channel = Channel::A;  // None for cross-color kinds
  int scale = 0;
  int orientation = 0;
  int orientation2 = 0;  // XOrientCorr only, > orientation
  ChannelPair pair = ChannelPair::A_RG;

  /// Pyramid level whose resolution the unpooled statistic lives at (0 = full).
  int level() const { return tag == StatTag::PixelMean ? 0 : scale; }
  bool is_cross_color() const { return tag == StatTag::XColorMagCorr || tag == StatTag::XColorPhaseCorr; }
  bool is_magnitude_derived() const;
  /// e.g. "XOrientCorr(s=1,o1=0,o2=3)"; the channel is reported separately.
  std::string label() const;

  bool operator==(const StatisticKind&) const = default;
};

/// Catalog order: for each channel (A, RG, BY) PixelMean, MagMean, MagSecondMoment,
/// XOrientCorr, XScaleMagCorr, XScalePhaseCorr, EndStop, each scale-major then by
/// orientation; then the cross-color kinds by scale, orientation, pair.
std::vector<StatisticKind> statistic_catalog(const PyramidConfig& cfg, bool color);
std::size_t statistic_count(const PyramidConfig& cfg, bool color);

struct StatisticEntry {
  StatisticKind kind;
  Plane image;
};

/// Full-resolution statistic images in catalog order.
struct StatisticSet {
  int width = 0;
  int height = 0;
  bool color = false;
  std::vector<StatisticEntry> entries;
};

/// Planes the statistics are computed on: the gray plane, or the opponent planes of a
/// linearRGB image (an image already tagged Opponent is used as-is).
std::vector<Plane> statistic_channels(const ImageBuffer& img, OpponentMode mode = OpponentMode::Lab);

StatisticSet compute_statistics(const ImageBuffer& img, const PyramidConfig& cfg,
                                OpponentMode mode = OpponentMode::Lab);
StatisticSet compute_statistics(const OpponentImage& img, const PyramidConfig& cfg);

/// Direction along the edges band o responds to (perpendicular to its frequency direction).
double edge_angle(int orientation, int orientations);

/// (mag(x) - mag(x - shift * (cos a, sin a)))^2, bilinear with circular wrap.
Plane end_stop_image(const Plane& mag, double shift, double edge_angle_rad);

/// Per-channel pyramid outputs the statistic kernels read.
struct ChannelBands {
  BandStack bands;
  std::vector<std::vector<Plane>> magnitude;
  BandStack phase_doubled;
};

ChannelBands decompose(const PyramidPlan& plan, const Plane& channel);

/// One statistic image at its native level resolution (kind.level()).
Plane evaluate_statistic(const StatisticKind& kind, std::span<const Plane> channels,
                         std::span<const ChannelBands> decomposed, const PyramidConfig& cfg);

}  // namespace metamer
