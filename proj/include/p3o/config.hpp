#pragma once

#include <string>

#include "p3o/trainer.hpp"

namespace p3o {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat `key = value` text, one pair per line, `#` comments. Unknown keys are
// an error; missing keys fall back to the per-environment defaults (the env
// key is applied first so the remaining defaults follow its column).
TrainConfig parse_config(const std::string& text);
TrainConfig parse_config_file(const std::string& path);

// Canonical `key = value` rendering; emit(parse(text)) is idempotent.
std::string emit_config(const TrainConfig& cfg);

}  // namespace p3o
