#include "tet/app/config.hpp"

#include "tet/numeric/bytes.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

namespace tet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "cannot parse '" + value + "' as a number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

std::string fmt_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

const char* risk_name(RiskScore r) { return r == RiskScore::kNegativeMean ? "negative_mean" : "gaussian_tail"; }

struct Field {
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Builds a field for a number reachable through an accessor.
template <typename T, typename Access>
Field num(Access access) {
  return {[access](RunConfig& c, const std::string& k, const std::string& v) { access(c) = parse_number<T>(k, v); },
          [access](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt_double(access(const_cast<RunConfig&>(c)));
            } else {
              return std::to_string(access(const_cast<RunConfig&>(c)));
            }
          }};
}

template <typename Access>
Field flag(Access access) {
  return {[access](RunConfig& c, const std::string& k, const std::string& v) { access(c) = parse_bool(k, v); },
          [access](const RunConfig& c) { return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
}

template <typename Access>
Field path(Access access) {
  return {[access](RunConfig& c, const std::string&, const std::string& v) { access(c) = v; },
          [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)).string(); }};
}

#define TET_REF(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["paths.events"] = path(TET_REF(events));
    t["paths.embeddings"] = path(TET_REF(embeddings));
    t["paths.output"] = path(TET_REF(output));

    t["run.horizons"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.horizons.clear();
          for (const auto& item : split_list(v)) c.horizons.push_back(parse_number<int>(k, item));
        },
        [](const RunConfig& c) {
          std::string s;
          for (int h : c.horizons) s += (s.empty() ? "" : ", ") + std::to_string(h);
          return s;
        }};
    t["run.seeds"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.seeds.clear();
          for (const auto& item : split_list(v)) c.seeds.push_back(parse_number<std::uint64_t>(k, item));
        },
        [](const RunConfig& c) {
          std::string s;
          for (auto seed : c.seeds) s += (s.empty() ? "" : ", ") + std::to_string(seed);
          return s;
        }};
    t["run.models"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.models.clear();
          for (const auto& item : split_list(v)) {
            try {
              c.models.push_back(parse_model_kind(item));
            } catch (const std::invalid_argument& e) {
              throw ConfigError(k, e.what());
            }
          }
        },
        [](const RunConfig& c) {
          std::string s;
          for (auto m : c.models) s += (s.empty() ? "" : ", ") + std::string(to_string(m));
          return s;
        }};
    t["run.risk_score"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "negative_mean") {
            c.risk = RiskScore::kNegativeMean;
          } else if (v == "gaussian_tail") {
            c.risk = RiskScore::kGaussianTail;
          } else {
            throw ConfigError(k, "expected negative_mean or gaussian_tail, got '" + v + "'");
          }
        },
        [](const RunConfig& c) { return std::string(risk_name(c.risk)); }};
    t["run.budget"] = num<double>(TET_REF(budget));
    t["run.interval_level"] = num<double>(TET_REF(level));
    t["run.train_fraction"] = num<double>(TET_REF(split.train));
    t["run.validation_fraction"] = num<double>(TET_REF(split.validation));

    t["encoder.d"] = num<int>(TET_REF(model.encoder.d));
    t["encoder.layers"] = num<int>(TET_REF(model.encoder.layers));
    t["encoder.heads"] = num<int>(TET_REF(model.encoder.heads));
    t["encoder.bins"] = num<int>(TET_REF(model.encoder.bins));
    t["encoder.p_mask"] = num<double>(TET_REF(model.encoder.p_mask));
    t["encoder.max_seq_len"] = num<int>(TET_REF(model.encoder.max_seq_len));
    t["encoder.ffn_hidden"] = num<int>(TET_REF(model.encoder.ffn_hidden));

    t["fusion.d_c"] = num<int>(TET_REF(model.fusion.d_c));
    t["fusion.d_f"] = num<int>(TET_REF(model.fusion.d_f));
    t["fusion.p_drop"] = num<double>(TET_REF(model.fusion.p_drop));
    t["fusion.p_mod_text"] = num<double>(TET_REF(model.fusion.p_mod_text));
    t["fusion.p_mod_behavior"] = num<double>(TET_REF(model.fusion.p_mod_behavior));
    t["fusion.text_attention_dim"] = num<int>(TET_REF(model.text_attention_dim));

    t["ablation.mean_pooling"] = flag(TET_REF(model.ablations.mean_pooling));
    t["ablation.no_modality_dropout"] = flag(TET_REF(model.ablations.no_modality_dropout));
    t["ablation.mse_loss"] = flag(TET_REF(model.ablations.mse_loss));

    t["train.learning_rate"] = num<double>(TET_REF(train.learning_rate));
    t["train.batch_size"] = num<int>(TET_REF(train.batch_size));
    t["train.max_epochs"] = num<int>(TET_REF(train.max_epochs));
    t["train.patience"] = num<int>(TET_REF(train.patience));
    t["train.adam_beta1"] = num<double>(TET_REF(train.adam_beta1));
    t["train.adam_beta2"] = num<double>(TET_REF(train.adam_beta2));
    t["train.adam_eps"] = num<double>(TET_REF(train.adam_eps));

    t["synth.n_runs"] = num<int>(TET_REF(synth.n_runs));
    t["synth.n_enrollments"] = num<int>(TET_REF(synth.n_enrollments));
    t["synth.horizon_days"] = num<int>(TET_REF(synth.horizon_days));
    t["synth.course_days"] = num<int>(TET_REF(synth.course_days));
    t["synth.base_rate_per_day"] = num<double>(TET_REF(synth.base_rate_per_day));
    t["synth.engagement_effect"] = num<double>(TET_REF(synth.engagement_effect));
    t["synth.text_probability"] = num<double>(TET_REF(synth.text_probability));
    t["synth.late_text_probability"] = num<double>(TET_REF(synth.late_text_probability));
    t["synth.text_signal"] = num<double>(TET_REF(synth.text_signal));
    t["synth.label_noise_sd"] = num<double>(TET_REF(synth.label_noise_sd));
    t["synth.heteroscedastic"] = flag(TET_REF(synth.heteroscedastic));
    t["synth.trajectory_effect_size"] = num<double>(TET_REF(synth.trajectory_effect_size));
    t["synth.latent_location"] = num<double>(TET_REF(synth.latent_location));
    t["synth.latent_scale"] = num<double>(TET_REF(synth.latent_scale));
    t["synth.d_llm"] = num<std::uint32_t>(TET_REF(synth.d_llm));
    t["synth.seed"] = num<std::uint64_t>(TET_REF(synth.seed));

    t["preprocess.topics"] = num<int>(TET_REF(preprocess.topics));
    t["preprocess.topic_seed"] = num<std::uint64_t>(TET_REF(preprocess.topic_seed));
    return t;
  }();
  return table;
}

#undef TET_REF

}  // namespace

std::filesystem::path RunConfig::events_path() const {
  return events.empty() ? output / "synth" / "events.tsv" : events;
}

std::filesystem::path RunConfig::embeddings_path() const {
  return embeddings.empty() ? output / "synth" / "embeddings.tete" : embeddings;
}

void RunConfig::validate() const {
  auto wrap = [](const std::string& key, auto&& f) {
    try {
      f();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  };
  if (horizons.empty()) throw ConfigError("run.horizons", "at least one horizon is required");
  for (int h : horizons) {
    if (h <= 0) throw ConfigError("run.horizons", "horizons must be positive days, got " + std::to_string(h));
  }
  if (seeds.empty()) throw ConfigError("run.seeds", "at least one seed is required");
  if (models.empty()) throw ConfigError("run.models", "at least one model is required");
  if (!(budget > 0.0 && budget <= 1.0)) throw ConfigError("run.budget", "must lie in (0,1]");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("run.interval_level", "must lie in (0,1)");
  if (!(split.train > 0.0 && split.validation > 0.0 && split.train + split.validation < 1.0)) {
    throw ConfigError("run.train_fraction", "train and validation fractions must be positive and sum below 1");
  }
  if (preprocess.topics < 2) throw ConfigError("preprocess.topics", "at least 2 topics are required");
  auto require = [](bool ok, const char* key, const char* message) {
    if (!ok) throw ConfigError(key, message);
  };
  auto probability = [&](double p, const char* key) { require(p >= 0.0 && p < 1.0, key, "must lie in [0,1)"); };
  const auto& enc = model.encoder;
  require(enc.d > 0, "encoder.d", "must be positive");
  require(enc.heads > 0 && enc.d % enc.heads == 0, "encoder.heads", "must be positive and divide encoder.d");
  require(enc.layers > 0, "encoder.layers", "must be positive");
  require(enc.bins >= 2, "encoder.bins", "at least 2 bins are required");
  require(enc.max_seq_len > 0, "encoder.max_seq_len", "must be positive");
  require(enc.ffn_hidden > 0, "encoder.ffn_hidden", "must be positive");
  probability(enc.p_mask, "encoder.p_mask");
  const auto& fu = model.fusion;
  require(fu.d_c > 0, "fusion.d_c", "must be positive");
  require(fu.d_f > 0, "fusion.d_f", "must be positive");
  probability(fu.p_drop, "fusion.p_drop");
  probability(fu.p_mod_text, "fusion.p_mod_text");
  probability(fu.p_mod_behavior, "fusion.p_mod_behavior");
  require(model.text_attention_dim > 0, "fusion.text_attention_dim", "must be positive");
  require(train.learning_rate >= 0.0, "train.learning_rate", "must be non-negative");
  require(train.batch_size > 0, "train.batch_size", "must be positive");
  require(train.max_epochs > 0, "train.max_epochs", "must be positive");
  require(train.patience > 0, "train.patience", "must be positive");
  wrap("synth", [&] { synth.validate(); });
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  const auto& table = fields();
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("", where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", where + ": expected 'key = value'");
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    const std::string value = trim(line.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, where + ": unknown key");
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError(key, where + ": already set on line " + std::to_string(prev->second));
    }
    seen[key] = line_no;
    try {
      it->second.set(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(key, where + ": " + e.detail());
    }
  }
  config.preprocess.bins = config.model.encoder.bins;
  config.preprocess.max_seq_len = config.model.encoder.max_seq_len;
  if (!base_dir.empty()) {
    for (auto* p : {&config.events, &config.embeddings, &config.output}) {
      if (!p->empty() && p->is_relative()) *p = base_dir / *p;
    }
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("", "config file not found: " + path.string());
  return parse_run_config(bytes::read_file(path), path.parent_path());
}

std::string format_run_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& [key, field] : fields()) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      out += (out.empty() ? "[" : "\n[") + s + "]\n";
      section = s;
    }
    out += key.substr(dot + 1) + " = " + field.get(config) + "\n";
  }
  return out;
}

}  // namespace tet
