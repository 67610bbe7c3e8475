#include "tet/app/pipeline.hpp"
#include "tet/model/gradcheck.hpp"
#include "tet/numeric/bytes.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace tet {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSmallRun = R"(# tiny end-to-end run
[run]
horizons = 7
seeds = 1
models = full, aggregate_features, text_only, static_mm, behavior_only

[encoder]
d = 8
heads = 2
layers = 1
ffn_hidden = 16
bins = 8
max_seq_len = 64

[fusion]
d_c = 4
d_f = 8
text_attention_dim = 4

[train]
max_epochs = 2
batch_size = 32

[synth]
n_runs = 10
n_enrollments = 300
d_llm = 16
text_probability = 0.4

[preprocess]
topics = 3
)";

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tet_app_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

RunConfig small_config(const fs::path& out) {
  RunConfig c = parse_run_config(kSmallRun);
  c.output = out;
  return c;
}

TEST(Config, ParsesSectionsAndLists) {
  const RunConfig c = parse_run_config(kSmallRun);
  EXPECT_EQ(c.horizons, std::vector<int>{7});
  EXPECT_EQ(c.models.size(), 5u);
  EXPECT_EQ(c.models[1], ModelKind::kAggregateFeatures);
  EXPECT_EQ(c.model.encoder.d, 8);
  EXPECT_EQ(c.preprocess.bins, 8);
  EXPECT_EQ(c.preprocess.max_seq_len, 64);
  EXPECT_EQ(c.synth.d_llm, 16u);
  EXPECT_DOUBLE_EQ(c.synth.text_probability, 0.4);
  EXPECT_EQ(c.train.max_epochs, 2);
}

TEST(Config, DefaultsWhenEmpty) {
  const RunConfig c = parse_run_config("");
  EXPECT_EQ(c.horizons, (std::vector<int>{7, 14, 28}));
  EXPECT_EQ(c.seeds.size(), 3u);
  EXPECT_EQ(c.events_path(), fs::path("out") / "synth" / "events.tsv");
}

TEST(Config, FormatRoundTrips) {
  const RunConfig c = parse_run_config(kSmallRun);
  const std::string text = format_run_config(c);
  EXPECT_EQ(format_run_config(parse_run_config(text)), text);
}

struct BadConfig {
  const char* name;
  const char* text;
  const char* key;
};

class ConfigErrors : public ::testing::TestWithParam<BadConfig> {};

TEST_P(ConfigErrors, NameTheOffendingKey) {
  try {
    parse_run_config(GetParam().text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), GetParam().key) << e.what();
    EXPECT_NE(std::string(e.what()).find(GetParam().key), std::string::npos);
  }
}

INSTANTIATE_TEST_SUITE_P(Cases, ConfigErrors,
                         ::testing::Values(BadConfig{"UnknownKey", "[train]\nlearning_rat = 0.1\n", "train.learning_rat"},
                                           BadConfig{"NonNumeric", "[train]\nbatch_size = many\n", "train.batch_size"},
                                           BadConfig{"UnknownModel", "[run]\nmodels = full, gbm\n", "run.models"},
                                           BadConfig{"NegativeHorizon", "[run]\nhorizons = 7, -1\n", "run.horizons"},
                                           BadConfig{"BadBoolean", "[ablation]\nmse_loss = yes\n", "ablation.mse_loss"},
                                           BadConfig{"DuplicateKey", "[encoder]\nd = 8\nd = 9\n", "encoder.d"},
                                           BadConfig{"UnknownRiskScore", "[run]\nrisk_score = median\n", "run.risk_score"},
                                           BadConfig{"EmptySeedList", "[run]\nseeds =\n", "run.seeds"},
                                           BadConfig{"IndivisibleHeads", "[encoder]\nd = 10\nheads = 4\n", "encoder.heads"},
                                           BadConfig{"ProbabilityOutOfRange", "[fusion]\np_drop = 1.5\n", "fusion.p_drop"}),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(Config, SyntaxErrorsNameTheLine) {
  EXPECT_THROW(parse_run_config("[run\n"), ConfigError);
  try {
    parse_run_config("[run]\n\nhorizons 7\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
  const fs::path dir = fresh_dir("cfgdir");
  bytes::write_file(dir / "run.ini", "[paths]\noutput = results\nevents = data/e.tsv\n");
  const RunConfig c = load_run_config(dir / "run.ini");
  EXPECT_EQ(c.output, dir / "results");
  EXPECT_EQ(c.events_path(), dir / "data/e.tsv");
  EXPECT_EQ(c.embeddings_path(), dir / "results" / "synth" / "embeddings.tete");
  EXPECT_THROW(load_run_config(dir / "absent.ini"), ConfigError);
}

TEST(Cli, OverridesReplaceLists) {
  RunConfig c = parse_run_config("");
  apply_overrides(c, {std::uint64_t{9}, 14, fs::path("elsewhere")});
  EXPECT_EQ(c.seeds, std::vector<std::uint64_t>{9});
  EXPECT_EQ(c.synth.seed, 9u);
  EXPECT_EQ(c.horizons, std::vector<int>{14});
  EXPECT_EQ(c.output, fs::path("elsewhere"));
  EXPECT_THROW(apply_overrides(c, {std::nullopt, 0, std::nullopt}), ConfigError);
}

TEST(Cli, ThreadCapFromEnvironment) {
  ::setenv("TET_THREADS", "3", 1);
  EXPECT_EQ(worker_threads(), 3);
  ::setenv("TET_THREADS", "zero", 1);
  EXPECT_EQ(worker_threads(), 1);
  ::unsetenv("TET_THREADS");
  EXPECT_EQ(worker_threads(), 1);
}

TEST(Cli, MissingInputsNameThePath) {
  const RunConfig c = small_config(fresh_dir("missing"));
  std::ostringstream log;
  try {
    cmd_train(c, log);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("events.tsv"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, SynthTrainEvalReportSmoke) {
  const fs::path out = fresh_dir("smoke");
  const RunConfig c = small_config(out);
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_train(c, log);
  cmd_eval(c, log);
  cmd_report(c, log);
  for (ModelKind k : c.models) {
    EXPECT_TRUE(fs::exists(run_directory(c, k, 7, 1) / "checkpoint.tetp")) << to_string(k);
    EXPECT_TRUE(fs::exists(run_directory(c, k, 7, 1) / "train_report.tsv"));
    EXPECT_TRUE(fs::exists(run_directory(c, k, 7, 1) / "predictions.tsv"));
  }
  const auto rows = parse_metric_table(bytes::read_file(out / "metrics_h7.tsv"));
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      EXPECT_TRUE(std::isfinite(r.mean[k])) << r.model << " " << kMetricNames[k];
    }
  }
  EXPECT_TRUE(fs::exists(out / "summary.tsv"));
  EXPECT_TRUE(fs::exists(out / "metrics_h7.kv"));

  const std::string first = bytes::read_file(out / "metrics_h7.tsv");
  cmd_eval(c, log);
  EXPECT_EQ(bytes::read_file(out / "metrics_h7.tsv"), first);
}

TEST(Pipeline, ParallelWorkersWriteIdenticalCheckpoints) {
  RunConfig c = small_config(fresh_dir("serial"));
  c.models = {ModelKind::kFull, ModelKind::kStaticMM};
  c.seeds = {1, 2};
  std::ostringstream log;
  cmd_synth(c, log);
  cmd_train(c, log);
  RunConfig p = c;
  p.output = fresh_dir("parallel");
  p.events = c.events_path();
  p.embeddings = c.embeddings_path();
  ::setenv("TET_THREADS", "3", 1);
  cmd_train(p, log);
  ::unsetenv("TET_THREADS");
  for (ModelKind k : c.models) {
    for (std::uint64_t s : c.seeds) {
      EXPECT_EQ(bytes::read_file(run_directory(c, k, 7, s) / "checkpoint.tetp"),
                bytes::read_file(run_directory(p, k, 7, s) / "checkpoint.tetp"));
    }
  }
}

TEST(Pipeline, EvalWithoutCheckpointsFails) {
  RunConfig c = small_config(fresh_dir("nockpt"));
  std::ostringstream log;
  cmd_synth(c, log);
  EXPECT_THROW(cmd_eval(c, log), std::runtime_error);
}

TEST(Gradcheck, DefaultSuitePasses) {
  const GradcheckResult r = run_gradcheck();
  EXPECT_TRUE(r.passed) << format_gradcheck(r);
  EXPECT_EQ(r.cases.size(), 20u);
}

}  // namespace
}  // namespace tet
