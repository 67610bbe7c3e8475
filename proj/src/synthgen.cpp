#include "tet/synth/synthgen.hpp"

#include "tet/data/event_file.hpp"
#include "tet/numeric/bytes.hpp"
#include "tet/numeric/random.hpp"
#include "tet/text/stub_embed.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace tet {

namespace {

constexpr double kTargetMean = 4.02;
constexpr double kTargetSd = 0.81;
constexpr int kTopics = 6;

constexpr std::array<double, 8> kBaseLogits{1.2, 0.3, 0.6, -0.2, -0.4, 0.2, 0.8, -0.1};
constexpr std::array<double, 8> kDirection{0.5, -1.0, 1.0, -1.0, 0.5, 0.0, -0.5, 0.5};
constexpr std::array<double, kTopics> kTopicValence{1.0, 0.5, -1.0, -1.0, 0.0, 0.5};

int sample_categorical(std::span<const double> logits, Rng& rng) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  std::vector<double> w(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) total += w[i] = std::exp(logits[i] - mx);
  double r = uniform01(rng) * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    r -= w[i];
    if (r < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(w.size()) - 1;
}

/// Inverse CDF of the density 1 + k(2u - 1) on [0, 1], |k| < 1.
double trend_arrival(double r, double k) {
  if (std::abs(k) < 1e-12) return r;
  const double b = 1.0 - k;
  return (-b + std::sqrt(b * b + 4.0 * k * r)) / (2.0 * k);
}

std::array<double, 8> type_logits(double u, double ambivalence, double trend) {
  std::array<double, 8> out{};
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = (1.0 - 0.8 * ambivalence) * kBaseLogits[t] + 1.5 * trend * (2.0 * u - 1.0) * kDirection[t];
  }
  return out;
}

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void append_real(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

void SynthConfig::validate() const {
  for (double p : {text_probability, late_text_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("synth probabilities must lie in [0,1]");
  }
  if (n_enrollments < 1 || n_runs < 3) throw std::invalid_argument("synth needs n_enrollments >= 1 and n_runs >= 3");
  if (horizon_days < 1 || course_days < horizon_days) throw std::invalid_argument("synth needs 1 <= horizon_days <= course_days");
  if (!(trajectory_effect_size >= 0.0 && trajectory_effect_size < 1.0)) {
    throw std::invalid_argument("trajectory_effect_size must lie in [0,1)");
  }
  if (!(label_noise_sd > 0.0) || !(latent_scale > 0.0) || d_llm < 2) {
    throw std::invalid_argument("synth noise, latent scale and d_llm must be positive");
  }
}

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthData out;
  out.cache = EmbeddingCache(cfg.d_llm);
  out.corpus.vocabulary.assign(kSynthVocabulary.begin(), kSynthVocabulary.end());

  const std::chrono::sys_days base{std::chrono::year{2020} / std::chrono::January / 6};
  for (int r = 0; r < cfg.n_runs; ++r) {
    char id[16];
    std::snprintf(id, sizeof(id), "run%03d", r);
    out.corpus.runs.push_back(CourseRun{id, base + std::chrono::days{14 * r}});
  }

  std::vector<RowVec> topic_dirs;
  for (int k = 0; k < kTopics; ++k) topic_dirs.push_back(stub_embed("topic:" + std::to_string(k), cfg.d_llm));
  const RowVec sentiment_dir = stub_embed("sentiment", cfg.d_llm);

  const double horizon = cfg.horizon_days * kSecondsPerDay;
  const double course_end = cfg.course_days * kSecondsPerDay;

  for (int i = 0; i < cfg.n_enrollments; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "e%06d", i);
    Enrollment e;
    e.enrollment_id = id;
    e.course_run_id = out.corpus.runs[uniform_index(rng, static_cast<std::uint64_t>(cfg.n_runs))].course_run_id;

    double s;
    do {
      s = cfg.latent_location + cfg.latent_scale * standard_normal(rng);
    } while (s < 1.0 || s > 5.0);
    const double z = (s - kTargetMean) / kTargetSd;
    const double trend = cfg.trajectory_effect_size * std::tanh(z);
    const double ambivalence = uniform01(rng);
    const double noise_sd = cfg.heteroscedastic ? cfg.label_noise_sd * (0.4 + 1.2 * ambivalence) : cfg.label_noise_sd;
    e.label = std::clamp(s + noise_sd * standard_normal(rng), 1.0, 5.0);
    out.latents.push_back({e.enrollment_id, s, ambivalence, noise_sd});

    const double rate = cfg.base_rate_per_day * std::exp(cfg.engagement_effect * z);
    const auto n_early = poisson(rng, rate * cfg.horizon_days);
    std::vector<double> early(n_early);
    for (auto& u : early) u = trend_arrival(uniform01(rng), trend);
    std::sort(early.begin(), early.end());
    for (double u : early) {
      const auto logits = type_logits(u, ambivalence, trend);
      e.events.push_back({sample_categorical(logits, rng), u * horizon});
    }
    const auto n_late = poisson(rng, rate * (cfg.course_days - cfg.horizon_days));
    std::vector<double> late(n_late);
    for (auto& t : late) t = horizon + uniform01(rng) * (course_end - horizon);
    std::sort(late.begin(), late.end());
    const auto late_logits = type_logits(1.0, ambivalence, trend);
    for (double t : late) {
      // Strictly after the cutoff so the horizon view never sees it.
      e.events.push_back({sample_categorical(late_logits, rng), std::max(t, std::nextafter(horizon, course_end))});
    }

    auto add_snippet = [&](double ts) {
      const std::string sid = e.enrollment_id + "_s" + std::to_string(e.snippets.size());
      std::array<double, kTopics> logits{};
      for (int k = 0; k < kTopics; ++k) logits[k] = z * kTopicValence[k];
      const int topic = sample_categorical(logits, rng);
      RowVec v = topic_dirs[topic] + cfg.text_signal * z * sentiment_dir + 0.5 * stub_embed("noise:" + sid, cfg.d_llm);
      v /= v.norm();
      // Round through float32 so the in-memory cache equals the stored one.
      for (auto& x : v) x = static_cast<double>(static_cast<float>(x));
      out.cache.add(sid, v);
      e.snippets.push_back({sid, ts});
    };
    if (bernoulli(rng, cfg.text_probability)) {
      const auto n = 1 + uniform_index(rng, 3);
      std::vector<double> times(n);
      for (auto& t : times) t = uniform01(rng) * horizon;
      std::sort(times.begin(), times.end());
      for (double t : times) add_snippet(t);
    }
    if (bernoulli(rng, cfg.late_text_probability)) {
      add_snippet(std::max(horizon + uniform01(rng) * (course_end - horizon), std::nextafter(horizon, course_end)));
    }
    out.corpus.enrollments.push_back(std::move(e));
  }
  return out;
}

SynthPaths write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SynthPaths paths{dir / "events.tsv", dir / "embeddings.tete", dir / "latents.tsv"};
  store_events(data.corpus, paths.events);
  store_embedding_cache(data.cache, paths.embeddings);
  std::string lat = "enrollment_id\tsatisfaction\tambivalence\tnoise_sd\n";
  for (const auto& l : data.latents) {
    lat += l.enrollment_id + "\t";
    append_real(lat, l.satisfaction);
    lat += '\t';
    append_real(lat, l.ambivalence);
    lat += '\t';
    append_real(lat, l.noise_sd);
    lat += '\n';
  }
  bytes::write_file(paths.latents, lat);
  return paths;
}

std::vector<LatentRecord> load_latents(const std::filesystem::path& path) {
  std::istringstream in(bytes::read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<LatentRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    LatentRecord r;
    if (!(ls >> r.enrollment_id >> r.satisfaction >> r.ambivalence >> r.noise_sd)) {
      throw ParseError(line_no, "latents", "expected 4 tab-separated fields");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::pair<double, double> bayes_oracle(const LatentRecord& l) {
  const double mu = l.satisfaction;
  const double sd = l.noise_sd;
  const double a = (1.0 - mu) / sd;
  const double b = (5.0 - mu) / sd;
  const double mass = Phi(b) - Phi(a);
  const double mean = 1.0 * Phi(a) + 5.0 * (1.0 - Phi(b)) + mu * mass + sd * (phi(a) - phi(b));
  const double second = 1.0 * Phi(a) + 25.0 * (1.0 - Phi(b)) + (mu * mu + sd * sd) * mass +
                        2.0 * mu * sd * (phi(a) - phi(b)) + sd * sd * (a * phi(a) - b * phi(b));
  return {mean, std::max(0.0, second - mean * mean)};
}

std::pair<double, double> oracle_interval(const LatentRecord& l, double level) {
  const boost::math::normal_distribution<double> normal(l.satisfaction, l.noise_sd);
  const double atom_low = boost::math::cdf(normal, 1.0);
  const double atom_high = boost::math::cdf(boost::math::complement(normal, 5.0));
  const double miss = 1.0 - level;
  auto q = [&](double p) { return std::clamp(boost::math::quantile(normal, p), 1.0, 5.0); };
  if (atom_high >= miss / 2.0 && atom_low < miss) return {q(miss), 5.0};
  if (atom_low >= miss / 2.0 && atom_high < miss) return {1.0, q(1.0 - miss)};
  if (atom_high >= miss / 2.0 || atom_low >= miss / 2.0) return {1.0, 5.0};
  return {q(miss / 2.0), q(1.0 - miss / 2.0)};
}

}  // namespace tet
