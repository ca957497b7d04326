#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "glpd/adam.hpp"
#include "glpd/model.hpp"

namespace glpd {

// Binary layout (all integers little-endian):
//   "GLPD" | u32 version | u32 config_len | config text (model key=value)
//   u64 global_step | u32 record_count | records...
// record: u8 kind (0 param, 1 adam m, 2 adam v) | u16 name_len | name
//         u8 dtype (1 f32, 2 f64) | u8 ndim | u32 dims[ndim] | data

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class CheckpointErrorKind { io, bad_magic, unsupported_version, truncated, malformed, shape_mismatch };

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

enum class RecordKind : std::uint8_t { param = 0, adam_m = 1, adam_v = 2 };
enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

struct CheckpointRecord {
  RecordKind kind = RecordKind::param;
  std::string name;
  DType dtype = DType::f32;
  Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelConfig config;
  std::int64_t global_step = 0;
  std::vector<CheckpointRecord> records;
};

/// Snapshot of a model and optimizer (moments as separate records).
Checkpoint make_checkpoint(const GLPanoDepth& model, const AdamState& state, DType dtype = DType::f32);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Writes to a temporary sibling and renames over `path`.
void checkpoint_save(const GLPanoDepth& model, const AdamState& state, const std::filesystem::path& path,
                     DType dtype = DType::f32);
Checkpoint checkpoint_read(const std::filesystem::path& path);

/// Validates every record against the model before copying anything.
void apply_checkpoint(const Checkpoint& ckpt, GLPanoDepth& model, AdamState* state);

struct LoadedModel {
  GLPanoDepth model;
  AdamState state;
};

/// Builds a model from the stored config and restores all state.
LoadedModel checkpoint_load(const std::filesystem::path& path);

}  // namespace glpd
