#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bgpbs/autoencoder.hpp"
#include "bgpbs/synthgen.hpp"

namespace bgpbs {

struct PipelineConfig {
  double train_fraction = 0.8;
  std::size_t window = 8;
  std::size_t stride = 1;
};

struct DetectorConfig {
  double percentile = 99.0;
  std::vector<std::string> volume_features = {"n_announcements", "n_withdrawals"};
  double heartbeat_k = 3.0;
  std::size_t heartbeat_n = 3;
  double epsilon_floor = 1.0;
  // Unset: slack = sigma_v, decision = 8 * sigma_v.
  std::optional<double> cusum_slack;
  std::optional<double> cusum_decision;
};

// CSV inputs replacing the synthetic suite. Relative paths resolve against
// the config file's directory.
struct ExternalData {
  std::filesystem::path train;
  std::filesystem::path test;
  std::vector<std::pair<std::string, std::filesystem::path>> scenarios;
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  SuiteConfig suite;
  PipelineConfig pipeline;
  TrainConfig autoencoder;  // seed is derived from `seed`
  DetectorConfig detectors;
  std::optional<ExternalData> data;

  // Propagates the master seed into the suite and the autoencoder.
  void set_seed(std::uint64_t master);
  void validate() const;
};

ExperimentConfig default_experiment_config();

// Missing keys take their defaults; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ExperimentConfig& config);

// BGPBS_SEED, when set, as a parsed seed; throws on a malformed value.
std::optional<std::uint64_t> seed_from_environment();

}  // namespace bgpbs
