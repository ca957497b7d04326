#include "glpd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "glpd/image_io.hpp"

namespace glpd {

namespace fs = std::filesystem;

namespace {

std::map<std::string, fs::path> list_pngs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError(dir, "missing directory");
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.emplace(e.path().stem().string(), e.path());
  }
  return out;
}

}  // namespace

PanoDataset::PanoDataset(fs::path root, std::string split, DatasetOptions opts)
    : root_(std::move(root)), split_(std::move(split)), opts_(opts) {
  if (split_ != "train" && split_ != "val" && split_ != "test") {
    throw DatasetError(root_, "unknown split '" + split_ + "' (expected train|val|test)");
  }
  if (!(opts_.depth_scale > 0.0)) throw DatasetError(root_, "depth_scale must be positive");
  const fs::path base = root_ / split_;
  const auto rgb = list_pngs(base / "rgb");
  const auto depth = list_pngs(base / "depth");
  for (const auto& [name, path] : rgb) {
    if (!depth.count(name)) throw DatasetError(path, "no matching depth file");
  }
  for (const auto& [name, path] : depth) {
    if (!rgb.count(name)) throw DatasetError(path, "no matching rgb file");
  }
  for (const auto& [name, path] : rgb) entries_.push_back({name, path, depth.at(name)});
  if (entries_.empty()) throw DatasetError(base, "empty split");
}

PanoSample PanoDataset::load(std::size_t index) const {
  const Entry& e = entries_.at(index);
  const ImageHeader rh = read_png_header(e.rgb);
  if (rh.width != 2 * rh.height) {
    throw DatasetError(e.rgb, "panorama must be 2:1, got " + std::to_string(rh.width) + "x" + std::to_string(rh.height));
  }
  const ImageHeader dh = read_png_header(e.depth);
  if (dh.width != rh.width || dh.height != rh.height) {
    throw DatasetError(e.depth, "size mismatch: depth " + std::to_string(dh.width) + "x" + std::to_string(dh.height) +
                                    " vs rgb " + std::to_string(rh.width) + "x" + std::to_string(rh.height));
  }
  Rgb8Image rgb;
  Gray16Image raw;
  try {
    rgb = read_png_rgb8(e.rgb);
  } catch (const ImageIoError& err) {
    throw DatasetError(e.rgb, err.what());
  }
  try {
    raw = read_png_gray16(e.depth);
  } catch (const ImageIoError& err) {
    throw DatasetError(e.depth, err.what());
  }
  std::vector<double> depth(raw.pixels.size());
  for (std::size_t i = 0; i < depth.size(); ++i) depth[i] = raw.pixels[i] / opts_.depth_scale;

  PanoSample s;
  s.name = e.name;
  s.rgb = rgb8_to_tensor(rgb);
  s.depth = Tensor({1, static_cast<std::size_t>(raw.height), static_cast<std::size_t>(raw.width)}, std::move(depth));
  s.mask = validity_mask(s.depth);
  return s;
}

std::vector<std::size_t> PanoDataset::epoch_order(std::uint64_t seed, std::uint64_t epoch) const {
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + epoch);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::optional<PanoSample> PanoStream::next() {
  while (pos_ < order_.size()) {
    const std::size_t i = order_[pos_++];
    try {
      return ds_->load(i);
    } catch (const SampleRejected&) {
      ++skipped_;
    }
  }
  return std::nullopt;
}

PanoDataset dataset_load(const fs::path& root, const std::string& split, DatasetOptions opts) {
  return PanoDataset(root, split, opts);
}

void dataset_write_sample(const fs::path& root, const std::string& split, const PanoSample& sample,
                          double depth_scale) {
  const fs::path base = root / split;
  fs::create_directories(base / "rgb");
  fs::create_directories(base / "depth");
  write_png_rgb8(base / "rgb" / (sample.name + ".png"), tensor_to_rgb8(sample.rgb));
  Gray16Image d;
  d.height = static_cast<int>(sample.depth.dim(1));
  d.width = static_cast<int>(sample.depth.dim(2));
  d.pixels.resize(sample.depth.size());
  auto src = sample.depth.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double raw = std::isfinite(src[i]) ? std::round(src[i] * depth_scale) : 0.0;
    d.pixels[i] = static_cast<std::uint16_t>(std::clamp(raw, 0.0, 65535.0));
  }
  write_png_gray16(base / "depth" / (sample.name + ".png"), d);
}

}  // namespace glpd
