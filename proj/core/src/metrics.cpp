#include "glpd/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace glpd {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string MetricsReport::to_text() const {
  std::string s;
  s += "mae=" + fmt(mae) + "\n";
  s += "rmse=" + fmt(rmse) + "\n";
  s += "rmse_log=" + fmt(rmse_log) + "\n";
  s += "delta1=" + fmt(delta1) + "\n";
  s += "delta2=" + fmt(delta2) + "\n";
  s += "delta3=" + fmt(delta3) + "\n";
  return s;
}

MetricsReport MetricsReport::from_text(const std::string& text) {
  MetricsReport r;
  std::map<std::string, double*> slots = {{"mae", &r.mae},       {"rmse", &r.rmse},     {"rmse_log", &r.rmse_log},
                                          {"delta1", &r.delta1}, {"delta2", &r.delta2}, {"delta3", &r.delta3}};
  std::istringstream in(text);
  std::string line;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("metrics line without '=': " + line);
    auto it = slots.find(line.substr(0, eq));
    if (it == slots.end()) throw std::invalid_argument("unknown metrics key: " + line.substr(0, eq));
    *it->second = std::stod(line.substr(eq + 1));
    ++seen;
  }
  if (seen != slots.size()) throw std::invalid_argument("metrics report needs all six keys");
  return r;
}

bool operator==(const MetricsReport& a, const MetricsReport& b) {
  return a.mae == b.mae && a.rmse == b.rmse && a.rmse_log == b.rmse_log && a.delta1 == b.delta1 &&
         a.delta2 == b.delta2 && a.delta3 == b.delta3;
}

void MetricsAccumulator::add(const Tensor& pred, const Tensor& gt, const ValidityMask& mask) {
  if (pred.shape() != gt.shape() || mask.shape != gt.shape()) {
    throw ShapeError("depth_metrics: pred " + shape_str(pred.shape()) + " vs gt " + shape_str(gt.shape()));
  }
  auto p = pred.data(), y = gt.data();
  const double t1 = 1.25, t2 = 1.25 * 1.25, t3 = 1.25 * 1.25 * 1.25;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!mask(i)) continue;
    const double d = y[i] - p[i];
    abs_ += std::abs(d);
    sq_ += d * d;
    const double pc = std::max(p[i], kDepthFloor);
    const double ld = std::log(pc) - std::log(y[i]);
    log_sq_ += ld * ld;
    const double ratio = std::max(pc / y[i], y[i] / pc);
    d1_ += ratio <= t1;
    d2_ += ratio <= t2;
    d3_ += ratio <= t3;
    ++count_;
  }
}

MetricsReport MetricsAccumulator::report() const {
  if (count_ == 0) throw SampleRejected("depth_metrics: no valid pixels");
  const double n = static_cast<double>(count_);
  MetricsReport r;
  r.mae = abs_ / n;
  r.rmse = std::sqrt(sq_ / n);
  r.rmse_log = std::sqrt(log_sq_ / n);
  r.delta1 = static_cast<double>(d1_) / n;
  r.delta2 = static_cast<double>(d2_) / n;
  r.delta3 = static_cast<double>(d3_) / n;
  return r;
}

MetricsReport depth_metrics(const Tensor& pred, const Tensor& gt, const ValidityMask& mask) {
  if (mask.count_valid == 0) throw SampleRejected("depth_metrics: empty mask");
  MetricsAccumulator acc;
  acc.add(pred, gt, mask);
  return acc.report();
}

}  // namespace glpd
