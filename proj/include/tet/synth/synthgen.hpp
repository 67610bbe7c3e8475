#pragma once

#include "tet/data/types.hpp"
#include "tet/text/embedding_cache.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tet {

/// Generative process (fixed):
///  * latent satisfaction s ~ Normal(latent_location, latent_scale) truncated
///    to [1,5]; z = (s - 4.02) / 0.81, trend direction c = tanh(z);
///  * ambivalence a ~ U(0,1); noise sd = label_noise_sd * (0.4 + 1.2 a) when
///    heteroscedastic, label_noise_sd otherwise; y = clamp(s + noise, 1, 5);
///  * pre-horizon events: Poisson(rate * horizon_days * exp(engagement_effect
///    * z)) arrivals on [0, horizon] with density 1 + g c (2u - 1), g =
///    trajectory_effect_size; type logits (1 - 0.8 a) * base + 1.5 g c (2u - 1)
///    * direction. Mirrored profiles give c and -c identical count
///    distributions, so only order reveals the sign of c;
///  * post-horizon events up to course_days at the base rate;
///  * with probability text_probability, 1-3 snippets before the horizon;
///    independently with probability late_text_probability one snippet after
///    it. A snippet embedding is normalize(topic_dir[k] + text_signal * z *
///    sentiment_dir + 0.5 * noise) with the topic k drawn from softmax(z *
///    topic_valence).
struct SynthConfig {
  int n_runs = 20;
  int n_enrollments = 2000;
  int horizon_days = 7;
  int course_days = 35;
  double base_rate_per_day = 3.0;
  double engagement_effect = 0.05;
  double text_probability = 0.18;
  double late_text_probability = 0.12;
  double text_signal = 0.6;
  double label_noise_sd = 0.5;
  bool heteroscedastic = true;
  double trajectory_effect_size = 0.9;
  double latent_location = 4.99;
  double latent_scale = 1.17;
  std::uint32_t d_llm = 64;
  std::uint64_t seed = 1;

  void validate() const;
};

inline const std::array<std::string, 8> kSynthVocabulary{
    "video_play", "video_pause", "quiz_submit", "quiz_fail",
    "forum_post", "forum_read",  "page_view",   "resource_download"};

struct LatentRecord {
  std::string enrollment_id;
  double satisfaction = 0.0;
  double ambivalence = 0.0;
  double noise_sd = 0.0;
};

struct SynthData {
  Corpus corpus;
  EmbeddingCache cache;
  std::vector<LatentRecord> latents;
};

SynthData generate(const SynthConfig& config);

struct SynthPaths {
  std::filesystem::path events;
  std::filesystem::path embeddings;
  std::filesystem::path latents;
};

/// Writes events.tsv, embeddings.tete and latents.tsv into `dir`.
SynthPaths write_synth(const SynthData& data, const std::filesystem::path& dir);

std::vector<LatentRecord> load_latents(const std::filesystem::path& path);

/// Mean and variance of y = clamp(s + e, 1, 5), e ~ N(0, noise_sd^2).
std::pair<double, double> bayes_oracle(const LatentRecord& latent);

/// Interval holding exactly `level` of the conditional label mass whenever
/// the boundary atoms allow it.
std::pair<double, double> oracle_interval(const LatentRecord& latent, double level = 0.90);

}  // namespace tet
