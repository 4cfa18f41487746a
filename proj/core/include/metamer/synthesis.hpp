#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "metamer/image.hpp"
#include "metamer/pipeline.hpp"
#include "metamer/pooling.hpp"
#include "metamer/pyramid.hpp"

namespace metamer {

enum class SeedMode { MatchedNoise, FromImage };
enum class WeightMode { TargetScaleNormalized };
/// NormalizedGradient: x -= step * g / max|g|. Adam: bias-corrected moment estimates; both
/// move each pixel by at most about step_size per iteration. Lbfgs: projected limited-memory
/// quasi-Newton with a backtracking search; step_size only sizes its first and restart steps.
enum class UpdateRule { NormalizedGradient, Adam, Lbfgs };

const char* to_string(SeedMode m);
const char* to_string(UpdateRule r);

struct SynthesisConfig {
  int max_iters = 2000;
  double step_size = 0.02;
  double step_decay = 0.5;
  double stop_rel_change = 1e-5;
  int window = 50;
  std::uint64_t rng_seed = 0;
  WeightMode weight_mode = WeightMode::TargetScaleNormalized;
  SeedMode seed_mode = SeedMode::MatchedNoise;
  std::optional<ImageBuffer> seed_image;  // FromImage, in the target's space and size
  UpdateRule update = UpdateRule::Adam;
  int history = 10;  // Lbfgs curvature pairs
  /// Iterations per coarse stage; 0 optimizes every kind from the start. Stage 0 weights
  /// PixelMean only, each later stage adds the next finer scale, and after `scales` stages
  /// every kind is weighted for the remaining iterations.
  int coarse_to_fine = 0;
  OpponentMode opponent = OpponentMode::Lab;
  PyramidConfig pyramid;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double step = 0.0;
  double max_update = 0.0;
};

struct KindError {
  StatisticKind kind;
  double relative_rms = 0.0;
};

enum class SynthesisStatus { Converged, MaxIterations, ZeroLoss, NonFinite };
const char* to_string(SynthesisStatus s);

struct SynthesisTrace {
  std::vector<IterationRecord> iterations;
  std::vector<KindError> final_errors;
  SynthesisStatus status = SynthesisStatus::MaxIterations;
  // Both losses use the full weights; per-iteration losses use the current stage's weights.
  double initial_loss = 0.0;  // at the seed
  double final_loss = 0.0;    // at the returned (best) iterate
  double seconds = 0.0;     // wall time; kept out of the CSV so traces are reproducible
};

struct SynthesisResult {
  ImageBuffer metamer;
  SynthesisTrace trace;
};

/// w_k = 1 / (mean of target_k^2 + 1e-8).
std::vector<double> loss_weights(const PooledStatistics& target);

/// sum_k w_k * sum (candidate_k - target_k)^2; throws on catalog or geometry mismatch.
double loss(const PooledStatistics& candidate, const PooledStatistics& target, std::span<const double> weights);

/// sqrt(sum d^2 / (sum t^2 + 1e-8 n)) per entry.
std::vector<KindError> relative_errors(const PooledStatistics& candidate, const PooledStatistics& target);

/// Gradient of the loss with respect to the candidate's pixels (Gray or LinearRGB). The
/// candidate lives in the pooling domain of `target` (the warped image for gaze-centric).
ImageBuffer gradient(const ImageBuffer& candidate, const PooledStatistics& target, std::span<const double> weights,
                     const PyramidConfig& cfg, OpponentMode mode = OpponentMode::Lab);

/// Uniform or Global geometry that pools the domain `target` was computed on.
PoolingGeometry pooling_domain_geometry(const PooledStatistics& target);

ImageBuffer seed_image(const ImageBuffer& target, const SynthesisConfig& cfg);

/// Gray or LinearRGB target. Gaze-centric geometries are synthesized in log-polar space
/// and unwarped, then the fovea is copied from the target with a linear blend.
SynthesisResult synthesize(const ImageBuffer& target, const PoolingGeometry& geom, const SynthesisConfig& cfg);

void write_trace_csv(const SynthesisTrace& trace, std::ostream& os);

struct GradCheckReport {
  int size = 0;
  int pixels = 0;
  double step = 0.0;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  double median_rel_error = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

/// Reverse-mode gradient against central differences on `pixels` random pixels of a
/// size x size gray image under one global pooling region. Relative error per pixel is
/// |g - fd| / max(|g|, |fd|, 1e-6 * max|g|); passes when max error < tolerance.
GradCheckReport grad_check(int size, const PyramidConfig& cfg, double tolerance, int pixels = 100,
                           std::uint64_t seed = 1, double step = 1e-3);

void write_grad_check(const GradCheckReport& report, std::ostream& os);

}  // namespace metamer
