#pragma once

#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "glpd/adam.hpp"
#include "glpd/metrics.hpp"
#include "glpd/model.hpp"
#include "glpd/sample.hpp"
#include "glpd/train_config.hpp"

namespace glpd {

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::int64_t step, double loss, double grad_norm);
  std::int64_t step() const { return step_; }
  double loss() const { return loss_; }
  double grad_norm() const { return grad_norm_; }

 private:
  std::int64_t step_;
  double loss_, grad_norm_;
};

struct TrainResult {
  std::vector<double> step_losses;  // mean batch loss per optimizer step
  double initial_loss = 0.0;        // mean loss over the training set before step 1
  double final_loss = 0.0;          // same, after the last step
  MetricsReport final_metrics;
  std::int64_t steps = 0;
};

/// Synthetic samples for seeds seed, seed+1, ... at the config's height.
std::vector<PanoSample> make_synth_set(int count, int height, std::uint64_t seed);

/// Training samples as described by cfg (synthetic or on-disk split).
std::vector<PanoSample> load_training_samples(const TrainConfig& cfg);

/// Mean per-sample masked BerHu loss; not recorded.
double evaluate_loss(const GLPanoDepth& model, const std::vector<PanoSample>& samples, double threshold);

/// Pixel-weighted metrics over all samples.
MetricsReport evaluate_metrics(const GLPanoDepth& model, const std::vector<PanoSample>& samples);

/// One optimizer step on a batch: forward, masked BerHu, backward, Adam.
/// Returns the mean batch loss.
double train_step(GLPanoDepth& model, AdamState& state, const std::vector<const PanoSample*>& batch,
                  const TrainConfig& cfg);

/// Single-threaded, bitwise reproducible for a fixed (seed, config, data).
TrainResult train_loop(const TrainConfig& cfg, GLPanoDepth& model, AdamState& state,
                       const std::vector<PanoSample>& samples, std::ostream* log = nullptr);

/// Builds the model and data from cfg, trains, and writes cfg.checkpoint.
TrainResult train_loop(const TrainConfig& cfg, std::ostream* log = nullptr);

}  // namespace glpd
