#include "glpd/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "glpd/checkpoint.hpp"
#include "glpd/dataset.hpp"
#include "glpd/loss.hpp"
#include "glpd/ops.hpp"
#include "glpd/synth.hpp"

namespace glpd {

namespace {

std::string diverged_message(std::int64_t step, double loss, double grad_norm) {
  std::ostringstream os;
  os << "non-finite training state at step " << step << ": loss=" << loss << " grad_norm=" << grad_norm;
  return os.str();
}

double grad_norm(const ParameterSet& params) {
  double s = 0.0;
  for (const auto& [_, t] : params) {
    for (double g : t.grad()) s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace

TrainingDiverged::TrainingDiverged(std::int64_t step, double loss, double grad_norm)
    : std::runtime_error(diverged_message(step, loss, grad_norm)), step_(step), loss_(loss), grad_norm_(grad_norm) {}

void TrainConfig::validate() const {
  model.validate();
  adam.validate();
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (epochs < 1 && max_steps < 1) throw ContractError("need epochs >= 1 or max_steps >= 1");
  if (!(berhu_threshold > 0.0)) throw ContractError("berhu_threshold must be positive");
  if (data != "synth" && data != "dataset") throw ContractError("data must be 'synth' or 'dataset'");
  if (data == "synth" && synth_count < 1) throw ContractError("synth_count must be >= 1");
  if (data == "dataset" && dataset_root.empty()) throw ContractError("dataset_root is required for data=dataset");
  if (!(depth_scale > 0.0)) throw ContractError("depth_scale must be positive");
}

std::vector<PanoSample> make_synth_set(int count, int height, std::uint64_t seed) {
  SceneSpec spec;
  spec.height = height;
  std::vector<PanoSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(synth_generate(spec, seed + static_cast<std::uint64_t>(i)));
  return out;
}

std::vector<PanoSample> load_training_samples(const TrainConfig& cfg) {
  if (cfg.data == "synth") return make_synth_set(cfg.synth_count, cfg.model.height, cfg.seed * 1000 + 1);
  PanoDataset ds = dataset_load(cfg.dataset_root, cfg.split, DatasetOptions{cfg.depth_scale});
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  PanoStream stream(ds, order);
  std::vector<PanoSample> out;
  while (auto s = stream.next()) out.push_back(std::move(*s));
  if (out.empty()) throw DatasetError(cfg.dataset_root, "no usable samples in split " + cfg.split);
  return out;
}

double evaluate_loss(const GLPanoDepth& model, const std::vector<PanoSample>& samples, double threshold) {
  Tape::Pause pause;
  double total = 0.0;
  for (const auto& s : samples) total += berhu_loss(model.forward(s.rgb).depth, s.depth, s.mask, threshold).item();
  return total / static_cast<double>(samples.size());
}

MetricsReport evaluate_metrics(const GLPanoDepth& model, const std::vector<PanoSample>& samples) {
  Tape::Pause pause;
  MetricsAccumulator acc;
  for (const auto& s : samples) acc.add(model.forward(s.rgb).depth, s.depth, s.mask);
  return acc.report();
}

double train_step(GLPanoDepth& model, AdamState& state, const std::vector<const PanoSample*>& batch,
                  const TrainConfig& cfg) {
  if (batch.empty()) throw ContractError("train_step: empty batch");
  model.params().zero_grad();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  // One tape per sample; gradients accumulate into the parameters in batch order.
  for (const PanoSample* s : batch) {
    Tape tape;
    Tape::Scope scope(tape);
    Tensor loss = berhu_loss(model.forward(s->rgb).depth, s->depth, s->mask, cfg.berhu_threshold);
    total += loss.item();
    backward(affine(loss, inv_b), tape);
  }
  const double mean_loss = total * inv_b;
  const double gn = grad_norm(model.params());
  if (!std::isfinite(mean_loss) || !std::isfinite(gn)) throw TrainingDiverged(state.step + 1, mean_loss, gn);
  adam_step(model.params(), state, cfg.adam);
  snap_to_f32(model.params());
  for (auto& [_, m] : state.m) snap_to_f32(m);
  for (auto& [_, v] : state.v) snap_to_f32(v);
  return mean_loss;
}

TrainResult train_loop(const TrainConfig& cfg, GLPanoDepth& model, AdamState& state,
                       const std::vector<PanoSample>& samples, std::ostream* log) {
  cfg.validate();
  if (samples.empty()) throw ContractError("train_loop: no samples");
  TrainResult result;
  result.initial_loss = evaluate_loss(model, samples, cfg.berhu_threshold);
  if (log) *log << "initial loss " << result.initial_loss << "\n";

  const std::size_t b = static_cast<std::size_t>(cfg.batch_size);
  const std::int64_t steps_per_epoch = static_cast<std::int64_t>((samples.size() + b - 1) / b);
  const std::int64_t total_steps =
      cfg.max_steps > 0 ? cfg.max_steps : steps_per_epoch * static_cast<std::int64_t>(cfg.epochs);

  std::vector<std::size_t> order(samples.size());
  std::int64_t step = 0;
  for (std::uint64_t epoch = 0; step < total_steps; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + epoch);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size() && step < total_steps; start += b) {
      std::vector<const PanoSample*> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + b); ++i) batch.push_back(&samples[order[i]]);
      const double loss = train_step(model, state, batch, cfg);
      result.step_losses.push_back(loss);
      ++step;
      if (log && cfg.log_every > 0 && step % cfg.log_every == 0) *log << "step " << step << " loss " << loss << "\n";
      if (log && cfg.eval_every > 0 && step % cfg.eval_every == 0) {
        *log << "eval step " << step << "\n" << evaluate_metrics(model, samples).to_text();
      }
      if (!cfg.checkpoint.empty() && cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
        checkpoint_save(model, state, cfg.checkpoint);
      }
    }
  }
  result.steps = step;
  result.final_loss = evaluate_loss(model, samples, cfg.berhu_threshold);
  result.final_metrics = evaluate_metrics(model, samples);
  if (log) *log << "final loss " << result.final_loss << "\n";
  return result;
}

TrainResult train_loop(const TrainConfig& cfg, std::ostream* log) {
  cfg.validate();
  GLPanoDepth model(cfg.model, cfg.seed);
  AdamState state;
  const auto samples = load_training_samples(cfg);
  TrainResult r = train_loop(cfg, model, state, samples, log);
  if (!cfg.eval_split.empty() && cfg.data == "dataset") {
    TrainConfig eval_cfg = cfg;
    eval_cfg.split = cfg.eval_split;
    r.final_metrics = evaluate_metrics(model, load_training_samples(eval_cfg));
  }
  if (!cfg.checkpoint.empty()) checkpoint_save(model, state, cfg.checkpoint);
  return r;
}

}  // namespace glpd
