#include "bgpbs/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "bgpbs/error.hpp"
#include "text.hpp"

namespace bgpbs {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.contains(key))
      fail(ErrorKind::invalid_input, "unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

void read_optional(const json& j, const char* key, std::optional<double>& out) {
  if (j.contains(key)) {
    if (j.at(key).is_null()) out.reset();
    else out = j.at(key).get<double>();
  }
}

std::vector<FeatureModel> features_from_json(const json& arr) {
  if (!arr.is_array()) fail(ErrorKind::invalid_input, "schema.features must be an array");
  std::vector<FeatureModel> out;
  for (const auto& f : arr) {
    reject_unknown(f, {"name", "kind", "lambda", "mean", "std"}, "schema.features entry");
    FeatureModel m;
    m.name = f.at("name").get<std::string>();
    m.kind = feature_kind_from_string(f.value("kind", std::string("count")));
    read(f, "lambda", m.rate);
    read(f, "mean", m.mean);
    read(f, "std", m.stddev);
    out.push_back(std::move(m));
  }
  return out;
}

ScenarioDef scenario_from_json(const json& s) {
  reject_unknown(s, {"kind", "intensity", "seed"}, "scenario entry");
  ScenarioDef d;
  d.kind = scenario_kind_from_string(s.at("kind").get<std::string>());
  if (s.contains("intensity") && !s.at("intensity").is_null())
    d.intensity = s.at("intensity").get<double>();
  if (s.contains("seed") && !s.at("seed").is_null()) d.seed = s.at("seed").get<std::uint64_t>();
  return d;
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t master) {
  seed = master;
  suite.seed = master;
  autoencoder.seed = derive_seed(master, 1000);
}

void ExperimentConfig::validate() const {
  suite.model.validate();
  autoencoder.validate();
  if (!(pipeline.train_fraction > 0.0 && pipeline.train_fraction < 1.0))
    fail(ErrorKind::invalid_input, "pipeline.train_fraction must lie in (0, 1)");
  if (pipeline.window < 2) fail(ErrorKind::invalid_input, "pipeline.window must be >= 2");
  if (pipeline.stride < 1) fail(ErrorKind::invalid_input, "pipeline.stride must be >= 1");
  if (!(detectors.percentile > 0.0 && detectors.percentile <= 100.0))
    fail(ErrorKind::invalid_input, "detectors.percentile must lie in (0, 100]");
  if (!(detectors.heartbeat_k > 0.0) || detectors.heartbeat_n == 0)
    fail(ErrorKind::invalid_input, "heartbeat k must be > 0 and n >= 1");
  if (detectors.volume_features.empty())
    fail(ErrorKind::invalid_input, "heartbeat needs at least one volume feature");
  if (detectors.cusum_decision && !(*detectors.cusum_decision > 0.0))
    fail(ErrorKind::invalid_input, "cusum decision must be > 0");
  if (detectors.cusum_slack && !(*detectors.cusum_slack >= 0.0))
    fail(ErrorKind::invalid_input, "cusum slack must be >= 0");
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.set_seed(c.seed);
  return c;
}

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) fail(ErrorKind::invalid_input, "config must be a JSON object");
  ExperimentConfig c = default_experiment_config();
  try {
    reject_unknown(j,
                   {"seed", "schema", "lambda", "diurnal_amplitude", "lengths", "scenario",
                    "pipeline", "autoencoder", "detectors", "data"},
                   "config");
    if (j.contains("schema")) {
      const auto& s = j.at("schema");
      reject_unknown(s, {"features", "bin_width_seconds"}, "schema");
      if (s.contains("features")) c.suite.model.features = features_from_json(s.at("features"));
      read(s, "bin_width_seconds", c.suite.bin_width_seconds);
    }
    if (j.contains("lambda")) {
      for (const auto& [name, rate] : j.at("lambda").items()) {
        bool found = false;
        for (auto& f : c.suite.model.features)
          if (f.name == name) {
            f.rate = rate.get<double>();
            found = true;
          }
        if (!found) fail(ErrorKind::invalid_input, "lambda given for unknown feature '" + name + "'");
      }
    }
    read(j, "diurnal_amplitude", c.suite.model.diurnal_amplitude);
    if (j.contains("lengths")) {
      const auto& l = j.at("lengths");
      reject_unknown(l, {"train", "test", "anomaly"}, "lengths");
      read(l, "train", c.suite.lengths.train);
      read(l, "test", c.suite.lengths.test);
      read(l, "anomaly", c.suite.lengths.anomaly);
    }
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      c.suite.scenarios.clear();
      if (s.is_array()) {
        for (const auto& e : s) c.suite.scenarios.push_back(scenario_from_json(e));
      } else {
        c.suite.scenarios.push_back(scenario_from_json(s));
      }
    }
    if (j.contains("pipeline")) {
      const auto& p = j.at("pipeline");
      reject_unknown(p, {"train_fraction", "window", "stride"}, "pipeline");
      read(p, "train_fraction", c.pipeline.train_fraction);
      read(p, "window", c.pipeline.window);
      read(p, "stride", c.pipeline.stride);
    }
    if (j.contains("autoencoder")) {
      const auto& a = j.at("autoencoder");
      reject_unknown(a,
                     {"hidden", "epochs", "batch_size", "learning_rate", "beta1", "beta2",
                      "epsilon"},
                     "autoencoder");
      read(a, "hidden", c.autoencoder.hidden);
      read(a, "epochs", c.autoencoder.epochs);
      read(a, "batch_size", c.autoencoder.batch_size);
      read(a, "learning_rate", c.autoencoder.learning_rate);
      read(a, "beta1", c.autoencoder.beta1);
      read(a, "beta2", c.autoencoder.beta2);
      read(a, "epsilon", c.autoencoder.epsilon);
    }
    if (j.contains("detectors")) {
      const auto& d = j.at("detectors");
      reject_unknown(d, {"percentile", "heartbeat", "cusum"}, "detectors");
      read(d, "percentile", c.detectors.percentile);
      if (d.contains("heartbeat")) {
        const auto& h = d.at("heartbeat");
        reject_unknown(h, {"volume_features", "k", "n", "epsilon_floor"}, "detectors.heartbeat");
        read(h, "volume_features", c.detectors.volume_features);
        read(h, "k", c.detectors.heartbeat_k);
        read(h, "n", c.detectors.heartbeat_n);
        read(h, "epsilon_floor", c.detectors.epsilon_floor);
      }
      if (d.contains("cusum")) {
        const auto& k = d.at("cusum");
        reject_unknown(k, {"slack", "decision"}, "detectors.cusum");
        read_optional(k, "slack", c.detectors.cusum_slack);
        read_optional(k, "decision", c.detectors.cusum_decision);
      }
    }
    if (j.contains("data") && !j.at("data").is_null()) {
      const auto& d = j.at("data");
      reject_unknown(d, {"train", "test", "scenarios"}, "data");
      auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
      };
      ExternalData ext;
      ext.train = resolve(d.at("train").get<std::string>());
      ext.test = resolve(d.at("test").get<std::string>());
      if (d.contains("scenarios"))
        for (const auto& [name, path] : d.at("scenarios").items())
          ext.scenarios.emplace_back(name, resolve(path.get<std::string>()));
      c.data = std::move(ext);
    }
    std::uint64_t seed = c.seed;
    read(j, "seed", seed);
    c.set_seed(seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::invalid_input, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_input, path.string() + ": " + e.what());
  }
  try {
    return experiment_config_from_json(j, path.parent_path());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  ordered_json features = ordered_json::array();
  for (const auto& f : c.suite.model.features) {
    ordered_json e;
    e["name"] = f.name;
    e["kind"] = to_string(f.kind);
    if (f.is_count()) {
      e["lambda"] = f.rate;
    } else {
      e["mean"] = f.mean;
      e["std"] = f.stddev;
    }
    features.push_back(std::move(e));
  }
  j["schema"] = {{"bin_width_seconds", c.suite.bin_width_seconds}, {"features", features}};
  j["diurnal_amplitude"] = c.suite.model.diurnal_amplitude;
  j["lengths"] = {{"train", c.suite.lengths.train},
                  {"test", c.suite.lengths.test},
                  {"anomaly", c.suite.lengths.anomaly}};
  ordered_json scen = ordered_json::array();
  for (const auto& s : c.suite.scenarios) {
    ordered_json e;
    e["kind"] = to_string(s.kind);
    e["intensity"] = s.intensity.value_or(default_intensity(s.kind));
    e["seed"] = s.seed ? ordered_json(*s.seed) : ordered_json(nullptr);
    scen.push_back(std::move(e));
  }
  j["scenario"] = scen;
  j["pipeline"] = {{"train_fraction", c.pipeline.train_fraction},
                   {"window", c.pipeline.window},
                   {"stride", c.pipeline.stride}};
  j["autoencoder"] = {{"hidden", c.autoencoder.hidden},
                      {"epochs", c.autoencoder.epochs},
                      {"batch_size", c.autoencoder.batch_size},
                      {"learning_rate", c.autoencoder.learning_rate},
                      {"beta1", c.autoencoder.beta1},
                      {"beta2", c.autoencoder.beta2},
                      {"epsilon", c.autoencoder.epsilon}};
  auto opt = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  j["detectors"] = {
      {"percentile", c.detectors.percentile},
      {"heartbeat",
       {{"volume_features", c.detectors.volume_features},
        {"k", c.detectors.heartbeat_k},
        {"n", c.detectors.heartbeat_n},
        {"epsilon_floor", c.detectors.epsilon_floor}}},
      {"cusum", {{"slack", opt(c.detectors.cusum_slack)}, {"decision", opt(c.detectors.cusum_decision)}}}};
  if (c.data) {
    ordered_json d;
    d["train"] = c.data->train.generic_string();
    d["test"] = c.data->test.generic_string();
    ordered_json sc = ordered_json::object();
    for (const auto& [name, path] : c.data->scenarios) sc[name] = path.generic_string();
    d["scenarios"] = sc;
    j["data"] = d;
  } else {
    j["data"] = nullptr;
  }
  return j;
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("BGPBS_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  auto v = text::parse_uint(text::trim(raw));
  if (!v) fail(ErrorKind::invalid_input, std::string("BGPBS_SEED is not an unsigned integer: ") + raw);
  return *v;
}

}  // namespace bgpbs
