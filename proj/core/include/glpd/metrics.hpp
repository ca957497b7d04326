#pragma once

#include <map>
#include <string>

#include "glpd/loss.hpp"

namespace glpd {

struct MetricsReport {
  double mae = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;  // natural log
  double delta1 = 0.0;    // ratio ≤ 1.25
  double delta2 = 0.0;    // ratio ≤ 1.25²
  double delta3 = 0.0;    // ratio ≤ 1.25³

  /// Six lines "key=value" in the order mae, rmse, rmse_log, delta1..3.
  std::string to_text() const;
  static MetricsReport from_text(const std::string& text);
};

bool operator==(const MetricsReport& a, const MetricsReport& b);

inline constexpr double kDepthFloor = 1e-6;

/// Metrics over valid pixels. Predictions are clamped to ≥ 1e-6 before the
/// log and ratio terms.
MetricsReport depth_metrics(const Tensor& pred, const Tensor& gt, const ValidityMask& mask);

/// Running sums so a report can cover many samples with per-pixel weighting.
class MetricsAccumulator {
 public:
  void add(const Tensor& pred, const Tensor& gt, const ValidityMask& mask);
  MetricsReport report() const;
  std::size_t pixels() const { return count_; }

 private:
  double abs_ = 0.0, sq_ = 0.0, log_sq_ = 0.0;
  std::size_t d1_ = 0, d2_ = 0, d3_ = 0, count_ = 0;
};

}  // namespace glpd
