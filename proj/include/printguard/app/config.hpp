#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "printguard/dataset/dataset.hpp"
#include "printguard/nn/model.hpp"
#include "printguard/nn/optimizer.hpp"
#include "printguard/preprocess/preprocess.hpp"

namespace printguard::app {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Every tunable constant of a run. Loaded from plain `key = value` lines.
struct RunConfig {
  std::uint64_t seed = 1;                   // dataset master seed and split seed
  std::optional<std::uint64_t> train_seed;  // defaults to `seed`
  dataset::DatasetConfig data;
  preprocess::SegmentationConfig segmentation;
  nn::TrainConfig train;
  bool square_filters = false;
  bool batch_norm = true;

  nn::Architecture architecture() const;
  /// TrainConfig with the effective training seed filled in.
  nn::TrainConfig train_config() const;
  void validate() const;
};

/// Applies `key = value` lines on top of `base`. Blank lines and lines
/// starting with '#' are ignored. Unknown or repeated keys are errors.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Sets one key from its textual value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Honors PRINTGUARD_SEED when set.
void apply_environment(RunConfig& cfg);

/// All keys with resolved values, one `key = value` per line; parse_config
/// of the result reproduces the config.
std::string render_config(const RunConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace printguard::app
