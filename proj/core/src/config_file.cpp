#include "glpd/config_file.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace glpd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int r = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

std::array<int, 4> to_int4(const std::string& key, const std::string& v) {
  std::array<int, 4> out{};
  std::stringstream ss(v);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 4) throw ConfigError("config key '" + key + "': expected 4 comma-separated integers");
    out[n++] = to_int(key, trim(item));
  }
  if (n != 4) throw ConfigError("config key '" + key + "': expected 4 comma-separated integers");
  return out;
}

std::string join4(const std::array<int, 4>& a) {
  return std::to_string(a[0]) + "," + std::to_string(a[1]) + "," + std::to_string(a[2]) + "," + std::to_string(a[3]);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(const std::string&, const std::string&)>;

std::map<std::string, Setter> model_setters(ModelConfig& m, bool& width_given, int& width) {
  return {
      {"height", [&](auto& k, auto& v) { m.height = to_int(k, v); }},
      {"width",
       [&](auto& k, auto& v) {
         width_given = true;
         width = to_int(k, v);
       }},
      {"in_channels", [&](auto& k, auto& v) { m.in_channels = to_int(k, v); }},
      {"patch", [&](auto& k, auto& v) { m.patch = to_int(k, v); }},
      {"blocks", [&](auto& k, auto& v) { m.blocks = to_int(k, v); }},
      {"taps", [&](auto& k, auto& v) { m.taps = to_int4(k, v); }},
      {"dim", [&](auto& k, auto& v) { m.dim = to_int(k, v); }},
      {"heads", [&](auto& k, auto& v) { m.heads = to_int(k, v); }},
      {"mlp_ratio", [&](auto& k, auto& v) { m.mlp_ratio = to_int(k, v); }},
      {"level_channels", [&](auto& k, auto& v) { m.level_channels = to_int4(k, v); }},
      {"fusion_mode",
       [&](auto&, auto& v) {
         try {
           m.fusion_mode = fusion_mode_from_string(v);
         } catch (const ContractError& e) {
           throw ConfigError(e.what());
         }
       }},
      {"ln_eps", [&](auto& k, auto& v) { m.ln_eps = to_double(k, v); }},
  };
}

void finish_model(ModelConfig& m, bool width_given, int width) {
  if (width_given && width != 2 * m.height) throw ConfigError("config: width must equal 2*height");
  m.width = 2 * m.height;
  try {
    m.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, trim(t.substr(eq + 1))).second) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

TrainConfig train_config_from_text(const std::string& text) {
  TrainConfig c;
  bool width_given = false;
  int width = 0;
  auto setters = model_setters(c.model, width_given, width);

  auto reserved_zero = [](const std::string& k, const std::string& v) {
    if (to_double(k, v) != 0.0) throw ConfigError("config key '" + k + "' is reserved; only 0 is supported");
  };
  auto reserved_none = [](const std::string& k, const std::string& v) {
    if (v != "none") throw ConfigError("config key '" + k + "' is reserved; only 'none' is supported");
  };

  std::map<std::string, Setter> train = {
      {"lr", [&](auto& k, auto& v) { c.adam.lr = to_double(k, v); }},
      {"beta1", [&](auto& k, auto& v) { c.adam.beta1 = to_double(k, v); }},
      {"beta2", [&](auto& k, auto& v) { c.adam.beta2 = to_double(k, v); }},
      {"eps", [&](auto& k, auto& v) { c.adam.eps = to_double(k, v); }},
      {"batch_size", [&](auto& k, auto& v) { c.batch_size = to_int(k, v); }},
      {"epochs", [&](auto& k, auto& v) { c.epochs = to_int(k, v); }},
      {"max_steps", [&](auto& k, auto& v) { c.max_steps = to_int(k, v); }},
      {"seed", [&](auto& k, auto& v) { c.seed = static_cast<std::uint64_t>(to_int(k, v)); }},
      {"berhu_threshold", [&](auto& k, auto& v) { c.berhu_threshold = to_double(k, v); }},
      {"data", [&](auto&, auto& v) { c.data = v; }},
      {"synth_count", [&](auto& k, auto& v) { c.synth_count = to_int(k, v); }},
      {"dataset_root", [&](auto&, auto& v) { c.dataset_root = v; }},
      {"split", [&](auto&, auto& v) { c.split = v; }},
      {"eval_split", [&](auto&, auto& v) { c.eval_split = v; }},
      {"depth_scale", [&](auto& k, auto& v) { c.depth_scale = to_double(k, v); }},
      {"checkpoint", [&](auto&, auto& v) { c.checkpoint = v; }},
      {"checkpoint_every", [&](auto& k, auto& v) { c.checkpoint_every = to_int(k, v); }},
      {"eval_every", [&](auto& k, auto& v) { c.eval_every = to_int(k, v); }},
      {"log_every", [&](auto& k, auto& v) { c.log_every = to_int(k, v); }},
      {"weight_decay", reserved_zero},
      {"grad_clip", reserved_zero},
      {"lr_schedule", reserved_none},
      {"augmentation", reserved_none},
  };

  for (const auto& [key, value] : parse_key_values(text)) {
    if (auto it = setters.find(key); it != setters.end()) {
      it->second(key, value);
    } else if (auto jt = train.find(key); jt != train.end()) {
      jt->second(key, value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  finish_model(c.model, width_given, width);
  try {
    c.validate();
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return train_config_from_text(ss.str());
}

std::string model_config_to_text(const ModelConfig& m) {
  std::string s;
  s += "height=" + std::to_string(m.height) + "\n";
  s += "width=" + std::to_string(m.width) + "\n";
  s += "in_channels=" + std::to_string(m.in_channels) + "\n";
  s += "patch=" + std::to_string(m.patch) + "\n";
  s += "blocks=" + std::to_string(m.blocks) + "\n";
  s += "taps=" + join4(m.taps) + "\n";
  s += "dim=" + std::to_string(m.dim) + "\n";
  s += "heads=" + std::to_string(m.heads) + "\n";
  s += "mlp_ratio=" + std::to_string(m.mlp_ratio) + "\n";
  s += "level_channels=" + join4(m.level_channels) + "\n";
  s += "fusion_mode=" + to_string(m.fusion_mode) + "\n";
  s += "ln_eps=" + num(m.ln_eps) + "\n";
  return s;
}

ModelConfig model_config_from_text(const std::string& text) {
  ModelConfig m;
  bool width_given = false;
  int width = 0;
  auto setters = model_setters(m, width_given, width);
  for (const auto& [key, value] : parse_key_values(text)) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown model config key '" + key + "'");
    it->second(key, value);
  }
  finish_model(m, width_given, width);
  return m;
}

}  // namespace glpd
