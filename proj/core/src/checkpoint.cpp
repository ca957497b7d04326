#include "glpd/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "glpd/config_file.hpp"

namespace glpd {

namespace fs = std::filesystem;

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    uint(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    uint(bits);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : b_(b) {}

  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) {
      throw CheckpointError(CheckpointErrorKind::truncated,
                            "checkpoint truncated at byte " + std::to_string(pos_) + " (need " + std::to_string(n) +
                                " more, have " + std::to_string(b_.size() - pos_) + ")");
    }
  }
  template <typename T>
  T uint() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  float f32() {
    const auto bits = uint<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    const auto bits = uint<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  bool done() const { return pos_ == b_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

void add_records(Checkpoint& c, RecordKind kind, const std::string& prefix,
                 const std::map<std::string, std::vector<double>>& moments, const ParameterSet& params, DType dtype) {
  for (const auto& [name, values] : moments) {
    c.records.push_back({kind, prefix + name, dtype, params.at(name).shape(), values});
  }
}

}  // namespace

Checkpoint make_checkpoint(const GLPanoDepth& model, const AdamState& state, DType dtype) {
  Checkpoint c;
  c.config = model.config();
  c.global_step = state.step;
  for (const auto& [name, t] : model.params()) {
    c.records.push_back({RecordKind::param, name, dtype, t.shape(), std::vector<double>(t.data().begin(), t.data().end())});
  }
  add_records(c, RecordKind::adam_m, "", state.m, model.params(), dtype);
  add_records(c, RecordKind::adam_v, "", state.v, model.params(), dtype);
  return c;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes("GLPD", 4);
  w.uint<std::uint32_t>(ckpt.version);
  const std::string cfg = model_config_to_text(ckpt.config);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(cfg.size()));
  w.bytes(cfg.data(), cfg.size());
  w.uint<std::uint64_t>(static_cast<std::uint64_t>(ckpt.global_step));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(ckpt.records.size()));
  for (const auto& r : ckpt.records) {
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(r.kind));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(r.name.size()));
    w.bytes(r.name.data(), r.name.size());
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(r.dtype));
    w.uint<std::uint8_t>(static_cast<std::uint8_t>(r.shape.size()));
    for (auto d : r.shape) w.uint<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (double v : r.values) {
      if (r.dtype == DType::f32) {
        w.f32(static_cast<float>(v));
      } else {
        w.f64(v);
      }
    }
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "GLPD", 4) != 0) {
    throw CheckpointError(CheckpointErrorKind::bad_magic, "not a GLPD checkpoint (bad magic)");
  }
  r.str(4);
  Checkpoint c;
  c.version = r.uint<std::uint32_t>();
  if (c.version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::unsupported_version,
                          "unsupported checkpoint version " + std::to_string(c.version));
  }
  const auto cfg_len = r.uint<std::uint32_t>();
  try {
    c.config = model_config_from_text(r.str(cfg_len));
  } catch (const ConfigError& e) {
    throw CheckpointError(CheckpointErrorKind::malformed, std::string("checkpoint config block: ") + e.what());
  }
  c.global_step = static_cast<std::int64_t>(r.uint<std::uint64_t>());
  const auto count = r.uint<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointRecord rec;
    const auto kind = r.uint<std::uint8_t>();
    if (kind > 2) throw CheckpointError(CheckpointErrorKind::malformed, "unknown record kind " + std::to_string(kind));
    rec.kind = static_cast<RecordKind>(kind);
    rec.name = r.str(r.uint<std::uint16_t>());
    const auto dtype = r.uint<std::uint8_t>();
    if (dtype != 1 && dtype != 2) {
      throw CheckpointError(CheckpointErrorKind::malformed, "unknown dtype in record " + rec.name);
    }
    rec.dtype = static_cast<DType>(dtype);
    const auto ndim = r.uint<std::uint8_t>();
    for (std::uint8_t d = 0; d < ndim; ++d) rec.shape.push_back(r.uint<std::uint32_t>());
    const std::size_t n = numel(rec.shape);
    r.need(n * (rec.dtype == DType::f32 ? 4 : 8));
    rec.values.resize(n);
    for (auto& v : rec.values) v = rec.dtype == DType::f32 ? static_cast<double>(r.f32()) : r.f64();
    c.records.push_back(std::move(rec));
  }
  if (!r.done()) {
    throw CheckpointError(CheckpointErrorKind::malformed, "trailing bytes after record " + std::to_string(count));
  }
  return c;
}

void checkpoint_save(const GLPanoDepth& model, const AdamState& state, const fs::path& path, DType dtype) {
  const auto bytes = encode_checkpoint(make_checkpoint(model, state, dtype));
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(CheckpointErrorKind::io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw CheckpointError(CheckpointErrorKind::io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw CheckpointError(CheckpointErrorKind::io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Checkpoint checkpoint_read(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::io, "cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(e.kind(), path.string() + ": " + e.what());
  }
}

void apply_checkpoint(const Checkpoint& ckpt, GLPanoDepth& model, AdamState* state) {
  auto& params = model.params();
  std::size_t seen_params = 0;
  for (const auto& rec : ckpt.records) {
    if (!params.contains(rec.name)) {
      throw CheckpointError(CheckpointErrorKind::shape_mismatch, "checkpoint record '" + rec.name + "' has no parameter");
    }
    const Shape& want = params.at(rec.name).shape();
    if (rec.shape != want) {
      throw CheckpointError(CheckpointErrorKind::shape_mismatch, "record '" + rec.name + "' shape " +
                                                                     shape_str(rec.shape) + " vs model " + shape_str(want));
    }
    seen_params += rec.kind == RecordKind::param;
  }
  if (seen_params != params.size()) {
    throw CheckpointError(CheckpointErrorKind::shape_mismatch,
                          "checkpoint has " + std::to_string(seen_params) + " parameters, model has " +
                              std::to_string(params.size()));
  }

  AdamState restored;
  restored.step = ckpt.global_step;
  for (const auto& rec : ckpt.records) {
    switch (rec.kind) {
      case RecordKind::param: {
        auto dst = params.at(rec.name).mutable_data();
        std::copy(rec.values.begin(), rec.values.end(), dst.begin());
        break;
      }
      case RecordKind::adam_m: restored.m[rec.name] = rec.values; break;
      case RecordKind::adam_v: restored.v[rec.name] = rec.values; break;
    }
  }
  params.zero_grad();
  if (state) *state = std::move(restored);
}

LoadedModel checkpoint_load(const fs::path& path) {
  Checkpoint c = checkpoint_read(path);
  LoadedModel out{GLPanoDepth(c.config, 0), AdamState{}};
  apply_checkpoint(c, out.model, &out.state);
  return out;
}

}  // namespace glpd
