#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "uno/data.hpp"
#include "uno/model.hpp"
#include "uno/trainer.hpp"

namespace uno {

// Raised for malformed configuration; names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& message)
      : std::runtime_error("config field '" + field + "': " + message), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct EstimateConfig {
  std::vector<std::size_t> candidates{2, 3, 4, 5, 6, 7, 8};
  // Labeled classes held out of pretraining and used as the probe set.
  std::size_t probe_classes = 2;
  bool use_features = false;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  GaussianConfig data;
  std::string data_path;  // load instead of generating when set
  ModelConfig model;
  TrainConfig train;
  std::string init_checkpoint;  // skip pretraining when set
  std::size_t checkpoint_every = 0;
  std::string eval_checkpoint;
  std::string eval_split = "test";
  EstimateConfig estimate;

  // Propagates seed and data shape into the model/train sections.
  void resolve();
};

// Flat "key = value" text, one field per line, '#' comments. Every key is
// typed; unknown keys and malformed values raise ConfigError.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
// Applies one "key=value" override.
void apply_override(ExperimentConfig& config, const std::string& assignment);
void set_field(ExperimentConfig& config, const std::string& key, const std::string& value);

// Canonical, fully-resolved serialization (all keys, fixed order). Feeding it
// back to parse_config reproduces the same config.
std::string serialize_config(const ExperimentConfig& config);

// Documented key list with types, for --help output.
std::string config_schema();

// Stable 64-bit FNV-1a hash of the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace uno
