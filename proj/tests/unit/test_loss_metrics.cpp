#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "glpd/loss.hpp"
#include "glpd/metrics.hpp"
#include "helpers.hpp"

using namespace glpd;
using glpd::test::random_tensor;

namespace {

struct Masked {
  Tensor pred, gt;
};

// Ground truth with roughly a quarter of the pixels invalid (zero or NaN).
Masked random_masked(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  Tensor pred = random_tensor(rng, {1, h, w}, 0.0, 6.0);
  Tensor gt = random_tensor(rng, {1, h, w}, 0.3, 6.0);
  auto g = gt.mutable_data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto r = rng() % 8;
    if (r == 0) g[i] = 0.0;
    if (r == 1) g[i] = std::numeric_limits<double>::quiet_NaN();
  }
  g[0] = 1.0;
  return {pred, gt};
}

}  // namespace

TEST(Berhu, ScalarDefinition) {
  EXPECT_DOUBLE_EQ(berhu(0.1, 0.2), 0.1);
  EXPECT_DOUBLE_EQ(berhu(-0.15, 0.2), 0.15);
  EXPECT_DOUBLE_EQ(berhu(0.5, 0.2), (0.25 + 0.04) / 0.4);
}

TEST(Berhu, ContinuousAtThreshold) {
  for (double t : {0.05, 0.2, 1.0}) {
    EXPECT_NEAR(berhu(t, t), t, 1e-15);
    EXPECT_NEAR(berhu(std::nextafter(t, 0.0), t), berhu(std::nextafter(t, 1e9), t), 1e-12);
  }
}

TEST(Berhu, LossMatchesScalarLoop) {
  std::mt19937_64 rng(41);
  for (int n = 0; n < 10; ++n) {
    const auto [pred, gt] = random_masked(rng, 1 + rng() % 9, 1 + rng() % 9);
    const ValidityMask mask = validity_mask(gt);
    double s = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (!(std::isfinite(gt[i]) && gt[i] > 0.0)) continue;
      const double d = std::abs(gt[i] - pred[i]);
      s += d <= 0.2 ? d : (d * d + 0.04) / 0.4;
      ++k;
    }
    EXPECT_NEAR(berhu_loss(pred, gt, mask, 0.2).item(), s / double(k), 1e-9);
  }
}

TEST(Berhu, InvalidPixelsDoNotContribute) {
  Tensor gt = Tensor::from({1.0, 0.0}, {1, 1, 2});
  const ValidityMask mask = validity_mask(gt);
  EXPECT_EQ(mask.count_valid, 1u);
  const double a = berhu_loss(Tensor::from({1.1, 0.0}, {1, 1, 2}), gt, mask).item();
  const double b = berhu_loss(Tensor::from({1.1, 50.0}, {1, 1, 2}), gt, mask).item();
  EXPECT_EQ(a, b);
}

TEST(Berhu, EmptyMaskIsRejected) {
  EXPECT_THROW(validity_mask(Tensor::zeros({1, 2, 2})), SampleRejected);
}

TEST(Metrics, WorkedExample) {
  Tensor gt = Tensor::from({2.0, 4.0}, {1, 1, 2});
  const auto m = depth_metrics(Tensor::from({2.0, 5.0}, {1, 1, 2}), gt, validity_mask(gt));
  EXPECT_EQ(m.mae, 0.5);
  EXPECT_EQ(m.rmse, std::sqrt(0.5));
  EXPECT_EQ(m.delta1, 1.0);
  EXPECT_NEAR(m.rmse_log, std::sqrt(0.5 * std::log(1.25) * std::log(1.25)), 1e-15);
  EXPECT_NEAR(m.rmse_log, 0.15779, 1e-5);
}

TEST(Metrics, DeltaThresholdIsInclusive) {
  Tensor gt = Tensor::from({4.0}, {1, 1, 1});
  EXPECT_EQ(depth_metrics(Tensor::from({5.0}, {1, 1, 1}), gt, validity_mask(gt)).delta1, 1.0);
  EXPECT_EQ(depth_metrics(Tensor::from({5.0001}, {1, 1, 1}), gt, validity_mask(gt)).delta1, 0.0);
}

TEST(Metrics, MatchScalarLoop) {
  std::mt19937_64 rng(42);
  for (int n = 0; n < 10; ++n) {
    const auto [pred, gt] = random_masked(rng, 1 + rng() % 9, 1 + rng() % 9);
    const auto m = depth_metrics(pred, gt, validity_mask(gt));
    double ae = 0, se = 0, le = 0, d1 = 0, d2 = 0, d3 = 0, k = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (!(std::isfinite(gt[i]) && gt[i] > 0.0)) continue;
      const double p = std::max(pred[i], 1e-6), g = gt[i];
      ae += std::abs(pred[i] - g);
      se += (pred[i] - g) * (pred[i] - g);
      le += (std::log(p) - std::log(g)) * (std::log(p) - std::log(g));
      const double r = std::max(p / g, g / p);
      d1 += r <= 1.25;
      d2 += r <= 1.25 * 1.25;
      d3 += r <= 1.25 * 1.25 * 1.25;
      ++k;
    }
    EXPECT_NEAR(m.mae, ae / k, 1e-9);
    EXPECT_NEAR(m.rmse, std::sqrt(se / k), 1e-9);
    EXPECT_NEAR(m.rmse_log, std::sqrt(le / k), 1e-9);
    EXPECT_NEAR(m.delta1, d1 / k, 1e-9);
    EXPECT_NEAR(m.delta2, d2 / k, 1e-9);
    EXPECT_NEAR(m.delta3, d3 / k, 1e-9);
  }
}

TEST(Metrics, AccumulatorWeightsByPixel) {
  Tensor g1 = Tensor::from({1.0}, {1, 1, 1}), g2 = Tensor::from({1.0, 1.0, 1.0}, {1, 1, 3});
  MetricsAccumulator acc;
  acc.add(Tensor::from({2.0}, {1, 1, 1}), g1, validity_mask(g1));
  acc.add(Tensor::from({1.0, 1.0, 1.0}, {1, 1, 3}), g2, validity_mask(g2));
  EXPECT_DOUBLE_EQ(acc.report().mae, 0.25);
  EXPECT_EQ(acc.pixels(), 4u);
}

TEST(Metrics, TextRoundTrip) {
  MetricsReport r{0.1, 0.2, 1.0 / 3.0, 0.9, 0.95, 0.99};
  const std::string text = r.to_text();
  EXPECT_EQ(text.rfind("mae=", 0), 0u);
  for (const char* key : {"rmse=", "rmse_log=", "delta1=", "delta2=", "delta3="}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
  EXPECT_EQ(MetricsReport::from_text(text), r);
}
