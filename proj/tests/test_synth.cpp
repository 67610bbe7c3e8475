#include "fixtures.hpp"
#include "tet/data/event_file.hpp"
#include "tet/numeric/bytes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>

namespace tet {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tet_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Synth, SameConfigGivesIdenticalFiles) {
  const SynthConfig cfg = testing::tiny_synth(200, 5);
  const SynthPaths a = write_synth(generate(cfg), temp_dir("synth_a"));
  const SynthPaths b = write_synth(generate(cfg), temp_dir("synth_b"));
  EXPECT_EQ(bytes::read_file(a.events), bytes::read_file(b.events));
  EXPECT_EQ(bytes::read_file(a.embeddings), bytes::read_file(b.embeddings));
  EXPECT_EQ(bytes::read_file(a.latents), bytes::read_file(b.latents));

  SynthConfig other = cfg;
  other.seed = 6;
  const SynthPaths c = write_synth(generate(other), temp_dir("synth_c"));
  EXPECT_NE(bytes::read_file(a.events), bytes::read_file(c.events));
}

TEST(Synth, FilesLoadBackToTheSameData) {
  const SynthData data = generate(testing::tiny_synth(100, 2));
  const SynthPaths p = write_synth(data, temp_dir("synth_load"));
  EXPECT_EQ(load_events(p.events), data.corpus);
  EXPECT_EQ(load_embedding_cache(p.embeddings), data.cache);
  const auto latents = load_latents(p.latents);
  ASSERT_EQ(latents.size(), data.latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    EXPECT_EQ(latents[i].enrollment_id, data.latents[i].enrollment_id);
    EXPECT_EQ(latents[i].satisfaction, data.latents[i].satisfaction);
    EXPECT_EQ(latents[i].noise_sd, data.latents[i].noise_sd);
  }
}

TEST(Synth, LabelMomentsAtDefaults) {
  SynthConfig cfg;
  cfg.n_enrollments = 10000;
  const SynthData data = generate(cfg);
  double sum = 0.0, sq = 0.0;
  for (const auto& e : data.corpus.enrollments) {
    sum += e.label;
    sq += e.label * e.label;
  }
  const double n = static_cast<double>(data.corpus.enrollments.size());
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1.0));
  EXPECT_NEAR(mean, 4.02, 0.05);
  EXPECT_NEAR(sd, 0.81, 0.05);
}

TEST(Synth, NoTextWhenProbabilityZero) {
  SynthConfig cfg = testing::tiny_synth(300);
  cfg.text_probability = 0.0;
  const SynthData data = generate(cfg);
  for (const auto& e : data.corpus.enrollments) {
    EXPECT_TRUE(slice_horizon(e, cfg.horizon_days).text_missing) << e.enrollment_id;
  }
}

TEST(Synth, StructureOfGeneratedCorpus) {
  const SynthConfig cfg = testing::tiny_synth(500);
  const SynthData data = generate(cfg);
  EXPECT_EQ(data.corpus.runs.size(), 10u);
  EXPECT_EQ(data.corpus.enrollments.size(), 500u);
  EXPECT_EQ(data.cache.d_llm(), 16u);
  std::size_t late = 0, early = 0;
  const double cutoff = cfg.horizon_days * kSecondsPerDay;
  for (const auto& e : data.corpus.enrollments) {
    EXPECT_GE(e.label, 1.0);
    EXPECT_LE(e.label, 5.0);
    for (std::size_t j = 1; j < e.events.size(); ++j) EXPECT_LE(e.events[j - 1].timestamp, e.events[j].timestamp);
    for (const auto& ev : e.events) EXPECT_LE(ev.timestamp, cfg.course_days * kSecondsPerDay);
    for (const auto& s : e.snippets) {
      EXPECT_TRUE(data.cache.contains(s.snippet_id));
      (s.timestamp > cutoff ? late : early) += 1;
    }
  }
  EXPECT_GT(late, 0u);
  EXPECT_GT(early, 0u);
}

TEST(Synth, InvalidConfigIsRejected) {
  SynthConfig cfg;
  cfg.n_runs = 2;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg = SynthConfig{};
  cfg.text_probability = 1.5;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
}

TEST(Oracle, ConstantNoiseFarFromBoundsHasVarianceSquared) {
  const LatentRecord l{"e", 3.0, 0.5, 0.1};
  const auto [mean, var] = bayes_oracle(l);
  EXPECT_NEAR(mean, 3.0, 1e-12);
  EXPECT_NEAR(var, 0.01, 1e-12);
}

TEST(Oracle, CensoredMomentsMatchQuadrature) {
  const LatentRecord l{"e", 4.6, 0.5, 0.8};
  // Direct integration of clamp(s + e, 1, 5) against the normal density.
  double m1 = 0.0, m2 = 0.0;
  const int steps = 200000;
  const double lo = -10.0, hi = 10.0, h = (hi - lo) / steps;
  for (int i = 0; i < steps; ++i) {
    const double z = lo + (i + 0.5) * h;
    const double w = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI) * h;
    const double y = std::clamp(l.satisfaction + l.noise_sd * z, 1.0, 5.0);
    m1 += w * y;
    m2 += w * y * y;
  }
  const auto [mean, var] = bayes_oracle(l);
  EXPECT_NEAR(mean, m1, 1e-8);
  EXPECT_NEAR(var, m2 - m1 * m1, 1e-8);
}

TEST(Oracle, IntervalsCoverNominally) {
  SynthConfig cfg;
  cfg.n_enrollments = 10000;
  const SynthData data = generate(cfg);
  std::size_t inside = 0;
  for (std::size_t i = 0; i < data.latents.size(); ++i) {
    const auto [lo, hi] = oracle_interval(data.latents[i], 0.90);
    const double y = data.corpus.enrollments[i].label;
    inside += (y >= lo && y <= hi) ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(inside) / static_cast<double>(data.latents.size()), 0.90, 0.01);
}

TEST(Oracle, BeatsTrainedBaseline) {
  SynthConfig cfg;
  cfg.n_enrollments = 10000;
  const SynthData data = generate(cfg);
  const PreparedHorizon prepared = prepare_horizon(data.corpus, data.cache, 7, testing::tiny_preprocess());
  TrainConfig tc;
  tc.max_epochs = 5;
  tc.learning_rate = 1e-2;
  auto trained = train_model(ModelKind::kAggregateFeatures, testing::tiny_model(), tc, prepared, 1);
  const auto preds = predict_reported(*trained.model, prepared.test);

  std::map<std::string, const LatentRecord*> by_id;
  for (const auto& l : data.latents) by_id[l.enrollment_id] = &l;
  double sse_model = 0.0, sse_oracle = 0.0;
  for (std::size_t i = 0; i < prepared.test.size(); ++i) {
    const double y = prepared.test[i].label;
    const double oracle = bayes_oracle(*by_id.at(prepared.test[i].enrollment_id)).first;
    sse_model += (preds[i].mu - y) * (preds[i].mu - y);
    sse_oracle += (oracle - y) * (oracle - y);
  }
  EXPECT_LT(sse_oracle, sse_model);
}

}  // namespace
}  // namespace tet
