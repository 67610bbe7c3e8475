#pragma once

#include "tet/app/config.hpp"
#include "tet/data/horizon.hpp"
#include "tet/eval/report.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

namespace tet {

/// A horizon's splits with preprocessing fitted on its training part.
struct PreparedHorizon {
  int horizon_days = 0;
  SplitViews views;
  FeaturePipeline pipeline;
  std::vector<Example> train, validation, test;
};

PreparedHorizon prepare_horizon(const Corpus& corpus, const EmbeddingCache& cache, int horizon_days,
                                const PreprocessConfig& preprocess, const SplitFractions& fractions = {});

struct TrainedModel {
  std::unique_ptr<Regressor> model;
  TrainReport report;
};

/// Initializes `kind` from a stream derived from `seed`, starts its output at
/// the training label mean and log-variance, and trains it.
TrainedModel train_model(ModelKind kind, const ModelConfig& model_config, const TrainConfig& train_config,
                         const PreparedHorizon& data, std::uint64_t seed);

/// Evaluation-mode predictions with the mean clamped to [1,5].
std::vector<GaussianPrediction> predict_reported(Regressor& model, std::span<const Example> examples);

/// Model parameters followed by the preprocessing state.
std::vector<NamedTensor> checkpoint_tensors(Regressor& model, const FeaturePipeline& pipeline);

struct CommandOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::optional<std::filesystem::path> out;
};

/// --seed replaces the seed list and the generator seed, --horizon the
/// horizon list, --out the output directory.
void apply_overrides(RunConfig& config, const CommandOverrides& overrides);

/// TET_THREADS if set and positive, else 1.
int worker_threads();

std::filesystem::path run_directory(const RunConfig& config, ModelKind kind, int horizon, std::uint64_t seed);

void cmd_synth(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_report(const RunConfig& config, std::ostream& log);
/// Returns false when any case fails.
bool cmd_gradcheck(std::ostream& log);

}  // namespace tet
