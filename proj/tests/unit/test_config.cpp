#include <gtest/gtest.h>

#include "glpd/config_file.hpp"

using namespace glpd;

TEST(ConfigFile, ParsesKeysAndComments) {
  const auto kv = parse_key_values("# comment\n a = 1 \n\nb=two # trailing\n");
  EXPECT_EQ(kv.at("a"), "1");
  EXPECT_EQ(kv.at("b"), "two");
  EXPECT_THROW(parse_key_values("a=1\na=2\n"), ConfigError);
  EXPECT_THROW(parse_key_values("novalue\n"), ConfigError);
}

TEST(ConfigFile, TrainConfigFromText) {
  const TrainConfig c = train_config_from_text(
      "height=128\nwidth=256\npatch=8\ntaps=1,2,3,4\nfusion_mode=concat\n"
      "lr=0.001\nbatch_size=4\nmax_steps=10\nseed=5\ndata=synth\nsynth_count=3\n");
  EXPECT_EQ(c.model.height, 128);
  EXPECT_EQ(c.model.patch, 8);
  EXPECT_EQ(c.model.fusion_mode, FusionMode::concat);
  EXPECT_DOUBLE_EQ(c.adam.lr, 0.001);
  EXPECT_EQ(c.batch_size, 4);
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.synth_count, 3);
}

TEST(ConfigFile, RejectsUnknownAndInvalid) {
  EXPECT_THROW(train_config_from_text("learning_rate=0.1\n"), ConfigError);
  EXPECT_THROW(train_config_from_text("lr=abc\n"), ConfigError);
  EXPECT_ANY_THROW(train_config_from_text("lr=-1\n"));
  EXPECT_ANY_THROW(train_config_from_text("batch_size=0\n"));
  EXPECT_ANY_THROW(train_config_from_text("height=100\nwidth=200\n"));
}

TEST(ConfigFile, ReservedKeysOnlyAcceptNeutralValues) {
  EXPECT_NO_THROW(train_config_from_text("weight_decay=0\ngrad_clip=0\nlr_schedule=none\naugmentation=none\n"));
  EXPECT_THROW(train_config_from_text("weight_decay=0.01\n"), ConfigError);
  EXPECT_THROW(train_config_from_text("lr_schedule=cosine\n"), ConfigError);
}

TEST(ConfigFile, ModelConfigTextRoundTrip) {
  ModelConfig m = ModelConfig::tiny();
  m.fusion_mode = FusionMode::concat;
  m.ln_eps = 1e-5;
  EXPECT_EQ(model_config_from_text(model_config_to_text(m)), m);
}
