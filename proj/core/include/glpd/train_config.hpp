#pragma once

#include <cstdint>
#include <string>

#include "glpd/adam.hpp"
#include "glpd/dataset.hpp"
#include "glpd/loss.hpp"
#include "glpd/model_config.hpp"

namespace glpd {

struct TrainConfig {
  ModelConfig model = ModelConfig::tiny();
  AdamConfig adam;
  int batch_size = 2;
  int epochs = 80;
  int max_steps = 0;  // stops early when > 0
  std::uint64_t seed = 0;
  double berhu_threshold = kBerhuThreshold;

  std::string data = "synth";  // "synth" or "dataset"
  int synth_count = 8;
  std::string dataset_root;
  std::string split = "train";
  std::string eval_split;  // empty: evaluate on the training samples
  double depth_scale = kDefaultDepthScale;

  std::string checkpoint;  // written at the end when non-empty
  int checkpoint_every = 0;
  int eval_every = 0;
  int log_every = 0;

  void validate() const;
};

}  // namespace glpd
