#pragma once

#include <span>
#include <vector>

#include "metamer/image.hpp"
#include "metamer/pooling.hpp"
#include "metamer/pyramid.hpp"
#include "metamer/statistics.hpp"

namespace metamer {

/// Statistics followed by pooling, evaluated level by level: every statistic is pooled
/// straight from its native pyramid level through a LevelPooler, so full-resolution
/// statistic images are never formed. Also provides the exact reverse-mode gradient of
/// the weighted squared pooled mismatch with respect to the channel planes.
class PooledPipeline {
 public:
  /// `geom` is Uniform or Global and applies to the width x height domain.
  PooledPipeline(int width, int height, int channels, const PyramidConfig& cfg, const PoolingGeometry& geom);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  const PyramidConfig& config() const { return plan_.config(); }
  const PoolingGeometry& geometry() const { return geom_; }
  const std::vector<StatisticKind>& catalog() const { return catalog_; }

  PooledStatistics evaluate(std::span<const Plane> channels) const;

  /// sum_k w_k * sum (pooled_k - target_k)^2. When `grad` is given it receives
  /// d loss / d channel plane; when `current` is given it receives the pooled values.
  double loss_and_gradient(std::span<const Plane> channels, const PooledStatistics& target,
                           std::span<const double> weights, std::vector<Plane>* grad,
                           PooledStatistics* current = nullptr) const;

 private:
  int width_, height_, channels_;
  PoolingGeometry geom_;
  PyramidPlan plan_;
  std::vector<StatisticKind> catalog_;
  std::vector<LevelPooler> poolers_;  // per level
};

/// Pooled statistics of an image: Uniform and Global pool the image directly,
/// GazeCentric warps it to log-polar space first (aligned to the pyramid depth).
PooledStatistics compute_pooled_statistics(const ImageBuffer& img, const PyramidConfig& cfg,
                                           const PoolingGeometry& geom, OpponentMode mode = OpponentMode::Lab);

}  // namespace metamer
