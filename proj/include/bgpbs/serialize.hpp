#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bgpbs/autoencoder.hpp"
#include "bgpbs/dataset.hpp"
#include "bgpbs/detectors.hpp"
#include "bgpbs/pipeline.hpp"

namespace bgpbs {

using ordered_json = nlohmann::ordered_json;

// {means, stds, fitted_on}
ordered_json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

// {dims, encoder, decoder, projection, train_config}; per-gate matrices as
// nested row arrays. Loading validates every shape.
ordered_json to_json(const AutoencoderParams& p, const TrainConfig& config);
AutoencoderParams autoencoder_from_json(const nlohmann::json& j, TrainConfig* config = nullptr);

ordered_json to_json(const Threshold& t);
Threshold threshold_from_json(const nlohmann::json& j);

// {threshold, heartbeat {indices, mu_v, sigma_v, k, n, epsilon_floor}, cusum {k_c, h, reference}}
ordered_json detectors_to_json(const Threshold& t, const HeartbeatDetector& hb, const CusumParams& cusum);
void detectors_from_json(const nlohmann::json& j, Threshold& t, HeartbeatDetector& hb,
                         CusumParams& cusum);

ordered_json to_json(const TrainReport& r);
TrainReport train_report_from_json(const nlohmann::json& j);

/// Everything `train` produces and `score` consumes.
struct ModelBundle {
  FeatureSchema schema;
  std::size_t window = 8;
  std::size_t stride = 1;
  Standardizer standardizer;
  AutoencoderParams autoencoder;
  TrainConfig train_config;
  TrainReport train_report;
  Threshold threshold;
  HeartbeatDetector heartbeat;
  CusumParams cusum;
};

ordered_json to_json(const ModelBundle& m);
ModelBundle model_bundle_from_json(const nlohmann::json& j);

void save_model(const ModelBundle& m, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

// Reads and parses a JSON file; parse failures are invalid-input errors.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const ordered_json& j, const std::filesystem::path& path);

}  // namespace bgpbs
