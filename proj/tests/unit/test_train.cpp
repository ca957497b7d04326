#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "glpd/train.hpp"
#include "helpers.hpp"

using namespace glpd;

namespace {

TrainConfig short_run() {
  TrainConfig cfg;
  cfg.max_steps = 3;
  cfg.synth_count = 3;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST(Train, SameSeedGivesIdenticalRuns) {
  const TrainConfig cfg = short_run();
  const auto samples = load_training_samples(cfg);
  GLPanoDepth a(cfg.model, cfg.seed), b(cfg.model, cfg.seed);
  AdamState sa, sb;
  const TrainResult ra = train_loop(cfg, a, sa, samples);
  const TrainResult rb = train_loop(cfg, b, sb, samples);
  EXPECT_EQ(ra.step_losses, rb.step_losses);
  EXPECT_EQ(ra.steps, 3);
  for (const auto& [n, p] : a.params()) EXPECT_EQ(test::values(p), test::values(b.params().at(n))) << n;
}

TEST(Train, ParametersStayFloat32Representable) {
  const TrainConfig cfg = short_run();
  GLPanoDepth m(cfg.model, cfg.seed);
  AdamState st;
  train_loop(cfg, m, st, load_training_samples(cfg));
  for (const auto& [n, p] : m.params())
    for (double v : p.data()) ASSERT_EQ(v, static_cast<double>(static_cast<float>(v))) << n;
}

TEST(Train, LossDecreasesOverAFewSteps) {
  TrainConfig cfg = short_run();
  cfg.max_steps = 30;
  cfg.synth_count = 2;
  GLPanoDepth m(cfg.model, cfg.seed);
  AdamState st;
  const TrainResult r = train_loop(cfg, m, st, load_training_samples(cfg));
  EXPECT_LT(r.final_loss, r.initial_loss);
}

TEST(Train, NonFiniteLossAborts) {
  TrainConfig cfg = short_run();
  auto samples = load_training_samples(cfg);
  GLPanoDepth m(cfg.model, cfg.seed);
  m.params().at("decoder.out.bias").mutable_data()[0] = std::nan("");
  AdamState st;
  try {
    train_loop(cfg, m, st, samples);
    FAIL() << "diverged run did not abort";
  } catch (const TrainingDiverged& e) {
    EXPECT_EQ(e.step(), 1);
    EXPECT_FALSE(std::isfinite(e.loss()));
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos);
  }
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.data = "imagenet";
  EXPECT_THROW(cfg.validate(), ContractError);
  cfg = TrainConfig{};
  cfg.data = "dataset";
  EXPECT_THROW(cfg.validate(), ContractError);
}
