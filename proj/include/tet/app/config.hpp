#pragma once

#include "tet/eval/metrics.hpp"
#include "tet/model/models.hpp"
#include "tet/synth/synthgen.hpp"
#include "tet/training/trainer.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace tet {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error(key.empty() ? message : "config key '" + key + "': " + message),
        key_(key),
        detail_(message) {}

  const std::string& key() const { return key_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string key_;
  std::string detail_;
};

// Grammar, one item per line:
//   # comment            (also ';')
//   [section]
//   key = value
// Lists are comma-separated. Booleans are true/false. Relative paths resolve
// against the directory of the config file.
struct RunConfig {
  // [paths]
  std::filesystem::path events;      // default <output>/synth/events.tsv
  std::filesystem::path embeddings;  // default <output>/synth/embeddings.tete
  std::filesystem::path output = "out";

  // [run]
  std::vector<int> horizons{7, 14, 28};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<ModelKind> models{ModelKind::kFull, ModelKind::kBehaviorOnly, ModelKind::kTextOnly,
                                ModelKind::kAggregateFeatures, ModelKind::kStaticMM};
  RiskScore risk = RiskScore::kNegativeMean;
  double budget = 0.10;
  double level = 0.90;
  SplitFractions split;

  ModelConfig model;            // [encoder] [fusion] [ablation]
  TrainConfig train;            // [train]
  SynthConfig synth;            // [synth]
  PreprocessConfig preprocess;  // [preprocess]; bins and max_seq_len follow [encoder]

  std::filesystem::path events_path() const;
  std::filesystem::path embeddings_path() const;
  void validate() const;
};

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// The effective configuration in the input grammar.
std::string format_run_config(const RunConfig& config);

}  // namespace tet
