#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "glpd/train_config.hpp"

namespace glpd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value pairs. Blank lines and lines starting with '#' are ignored.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Unknown keys and malformed values raise ConfigError.
TrainConfig train_config_from_text(const std::string& text);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Model keys only, in a fixed order; round-trips through model_config_from_text.
std::string model_config_to_text(const ModelConfig& cfg);
ModelConfig model_config_from_text(const std::string& text);

}  // namespace glpd
