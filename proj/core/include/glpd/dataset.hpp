#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "glpd/sample.hpp"

namespace glpd {

class DatasetError : public std::runtime_error {
 public:
  DatasetError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline constexpr double kDefaultDepthScale = 4000.0;

struct DatasetOptions {
  double depth_scale = kDefaultDepthScale;  // raw 16-bit value per meter
};

/// Files under root/<split>/rgb/*.png paired by name with root/<split>/depth/*.png.
class PanoDataset {
 public:
  struct Entry {
    std::string name;
    std::filesystem::path rgb, depth;
  };

  PanoDataset(std::filesystem::path root, std::string split, DatasetOptions opts = {});

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Decodes one pair. Throws DatasetError on size problems and
  /// SampleRejected when no depth pixel is valid.
  PanoSample load(std::size_t index) const;

  /// Seeded permutation of [0, size) for one epoch.
  std::vector<std::size_t> epoch_order(std::uint64_t seed, std::uint64_t epoch) const;

 private:
  std::filesystem::path root_;
  std::string split_;
  DatasetOptions opts_;
  std::vector<Entry> entries_;
};

/// Streams samples in a given order, skipping files whose mask is empty.
class PanoStream {
 public:
  PanoStream(const PanoDataset& ds, std::vector<std::size_t> order) : ds_(&ds), order_(std::move(order)) {}

  std::optional<PanoSample> next();
  std::size_t skipped() const { return skipped_; }

 private:
  const PanoDataset* ds_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::size_t skipped_ = 0;
};

/// Opens a split and checks rgb/depth pairing. Entries are in filename order;
/// use `epoch_order` with a PanoStream for shuffled passes.
PanoDataset dataset_load(const std::filesystem::path& root, const std::string& split, DatasetOptions opts = {});

/// Writes a sample as the dataset layout expects (8-bit RGB, 16-bit depth).
void dataset_write_sample(const std::filesystem::path& root, const std::string& split, const PanoSample& sample,
                          double depth_scale = kDefaultDepthScale);

}  // namespace glpd
