#include "tet/app/pipeline.hpp"

#include "tet/data/event_file.hpp"
#include "tet/model/gradcheck.hpp"
#include "tet/numeric/bytes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace tet {

namespace fs = std::filesystem;

PreparedHorizon prepare_horizon(const Corpus& corpus, const EmbeddingCache& cache, int horizon_days,
                                const PreprocessConfig& preprocess, const SplitFractions& fractions) {
  PreparedHorizon out;
  out.horizon_days = horizon_days;
  out.views = make_split_views(corpus, split_chronological(corpus.runs, fractions), horizon_days);
  out.pipeline = FeaturePipeline::fit(out.views.train, static_cast<int>(corpus.vocabulary.size()), cache, preprocess);
  out.train = out.pipeline.transform(out.views.train, cache);
  out.validation = out.pipeline.transform(out.views.validation, cache);
  out.test = out.pipeline.transform(out.views.test, cache);
  return out;
}

TrainedModel train_model(ModelKind kind, const ModelConfig& model_config, const TrainConfig& train_config,
                         const PreparedHorizon& data, std::uint64_t seed) {
  Rng init_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  TrainedModel out;
  out.model = make_model(kind, model_config, ModelDims::from(data.pipeline), init_rng);
  double mean = 0.0, sq = 0.0;
  for (const auto& ex : data.train) mean += ex.label;
  mean /= static_cast<double>(data.train.size());
  for (const auto& ex : data.train) sq += (ex.label - mean) * (ex.label - mean);
  const double var = std::max(sq / static_cast<double>(data.train.size()), 1e-6);
  out.model->init_output_bias(mean, std::clamp(std::log(var), kLogVarMin, kLogVarMax));
  out.report = train(*out.model, data.train, data.validation, train_config, seed);
  return out;
}

std::vector<GaussianPrediction> predict_reported(Regressor& model, std::span<const Example> examples) {
  std::vector<GaussianPrediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(model.predict(ex).reported());
  return out;
}

std::vector<NamedTensor> checkpoint_tensors(Regressor& model, const FeaturePipeline& pipeline) {
  auto out = model.param_tensors();
  for (auto& t : pipeline.to_tensors()) out.push_back(std::move(t));
  return out;
}

void apply_overrides(RunConfig& config, const CommandOverrides& o) {
  if (o.seed) {
    config.seeds = {*o.seed};
    config.synth.seed = *o.seed;
  }
  if (o.horizon) {
    if (*o.horizon <= 0) throw ConfigError("run.horizons", "--horizon must be a positive number of days");
    config.horizons = {*o.horizon};
  }
  if (o.out) config.output = *o.out;
}

int worker_threads() {
  const char* env = std::getenv("TET_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

fs::path run_directory(const RunConfig& config, ModelKind kind, int horizon, std::uint64_t seed) {
  return config.output / to_string(kind) / ("h" + std::to_string(horizon)) / ("seed" + std::to_string(seed));
}

namespace {

void require_file(const fs::path& path, const char* what) {
  if (!fs::exists(path)) throw std::runtime_error(std::string("missing ") + what + ": " + path.string());
}

struct LoadedInputs {
  Corpus corpus;
  EmbeddingCache cache;
};

LoadedInputs load_inputs(const RunConfig& config) {
  require_file(config.events_path(), "event file");
  require_file(config.embeddings_path(), "embedding cache");
  return {load_events(config.events_path()), load_embedding_cache(config.embeddings_path())};
}

// Runs jobs on up to `threads` workers; the first exception is rethrown after
// all workers stop.
void run_parallel(std::size_t jobs, int threads, const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };
  const auto n = std::min<std::size_t>(jobs, static_cast<std::size_t>(std::max(1, threads)));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

fs::path metrics_path(const RunConfig& config, int horizon, const char* ext) {
  return config.output / ("metrics_h" + std::to_string(horizon) + ext);
}

std::string format_predictions(std::span<const Example> examples, std::span<const GaussianPrediction> preds,
                               double level) {
  std::string out = "enrollment_id\tlabel\tmu\tsigma\tlower\tupper\ttext_missing\n";
  char buf[160];
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto [lo, hi] = interval(preds[i], level);
    std::snprintf(buf, sizeof(buf), "\t%.1f\t%.9g\t%.9g\t%.9g\t%.9g\t%d\n", examples[i].label, preds[i].mu,
                  preds[i].sigma(), lo, hi, examples[i].text_missing ? 1 : 0);
    out += examples[i].enrollment_id + buf;
  }
  return out;
}

}  // namespace

void cmd_synth(const RunConfig& config, std::ostream& log) {
  const SynthData data = generate(config.synth);
  const fs::path dir = config.output / "synth";
  const SynthPaths paths = write_synth(data, dir);
  log << "wrote " << data.corpus.enrollments.size() << " enrollments in " << data.corpus.runs.size()
      << " runs to " << paths.events.string() << "\n";
  log << "wrote " << data.cache.size() << " snippet embeddings to " << paths.embeddings.string() << "\n";
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  const LoadedInputs in = load_inputs(config);
  std::mutex log_mutex;
  for (int h : config.horizons) {
    const PreparedHorizon data = prepare_horizon(in.corpus, in.cache, h, config.preprocess, config.split);
    log << "horizon " << h << "d: " << data.train.size() << " train, " << data.validation.size()
        << " validation, " << data.test.size() << " test enrollments\n";
    const std::size_t jobs = config.models.size() * config.seeds.size();
    run_parallel(jobs, worker_threads(), [&](std::size_t j) {
      const ModelKind kind = config.models[j / config.seeds.size()];
      const std::uint64_t seed = config.seeds[j % config.seeds.size()];
      TrainedModel trained = train_model(kind, config.model, config.train, data, seed);
      const fs::path dir = run_directory(config, kind, h, seed);
      fs::create_directories(dir);
      write_checkpoint(dir / "checkpoint.tetp", checkpoint_tensors(*trained.model, data.pipeline));
      bytes::write_file(dir / "train_report.tsv", format_train_report(trained.report));
      std::lock_guard lock(log_mutex);
      log << "  " << to_string(kind) << " seed " << seed << ": best epoch " << trained.report.best_epoch
          << ", validation rmse " << trained.report.best_val_rmse << "\n";
    });
  }
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  const LoadedInputs in = load_inputs(config);
  for (int h : config.horizons) {
    const SplitViews views = make_split_views(in.corpus, split_chronological(in.corpus.runs, config.split), h);
    std::vector<MetricRow> rows;
    for (ModelKind kind : config.models) {
      std::vector<SeedMetrics> per_seed;
      for (std::uint64_t seed : config.seeds) {
        const fs::path dir = run_directory(config, kind, h, seed);
        require_file(dir / "checkpoint.tetp", "checkpoint (run train first)");
        const auto tensors = read_checkpoint(dir / "checkpoint.tetp");
        const FeaturePipeline pipeline = FeaturePipeline::from_tensors(tensors);
        const auto test = pipeline.transform(views.test, in.cache);
        Rng unused(0);
        auto model = make_model(kind, config.model, ModelDims::from(pipeline), unused);
        model->load_params(tensors);
        const auto preds = predict_reported(*model, test);
        std::vector<double> labels;
        for (const auto& ex : test) labels.push_back(ex.label);
        per_seed.push_back(compute_metrics(preds, labels, seed, config.risk, config.budget, config.level));
        bytes::write_file(dir / "predictions.tsv", format_predictions(test, preds, config.level));
      }
      rows.push_back(aggregate_seeds(to_string(kind), h, per_seed));
    }
    bytes::write_file(metrics_path(config, h, ".tsv"), format_metric_table(rows));
    bytes::write_file(metrics_path(config, h, ".kv"), format_metric_kv(rows));
    log << "horizon " << h << "d: " << views.test.size() << " test enrollments, wrote "
        << metrics_path(config, h, ".tsv").string() << "\n";
  }
}

void cmd_report(const RunConfig& config, std::ostream& log) {
  std::vector<MetricRow> rows;
  for (int h : config.horizons) {
    const fs::path path = metrics_path(config, h, ".tsv");
    require_file(path, "metric report (run eval first)");
    for (auto& r : parse_metric_table(bytes::read_file(path))) rows.push_back(std::move(r));
  }
  bytes::write_file(config.output / "summary.tsv", format_summary(rows));
  bytes::write_file(config.output / "metrics_all.tsv", format_metric_table(rows));
  log << format_summary(rows);
}

bool cmd_gradcheck(std::ostream& log) {
  const GradcheckResult result = run_gradcheck();
  log << format_gradcheck(result);
  return result.passed;
}

}  // namespace tet
