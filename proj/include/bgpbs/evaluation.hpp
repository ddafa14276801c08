#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgpbs/config.hpp"
#include "bgpbs/detectors.hpp"
#include "bgpbs/serialize.hpp"

namespace bgpbs {

// Window-level confusion counts. Recall and FPR are unset when their
// denominator is zero; they serialize as null, never 0.
struct EvalMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  std::optional<double> recall;
  std::optional<double> false_positive_rate;

  bool operator==(const EvalMetrics&) const = default;
};

EvalMetrics compute_metrics(const std::vector<bool>& flags, const std::vector<Label>& labels);
EvalMetrics compute_metrics(std::span<const AnomalyScore> scores);
EvalMetrics compute_metrics(std::span<const HybridVerdict> verdicts, std::span<const Label> labels);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> benign;
  std::vector<std::size_t> anomalous;

  bool operator==(const Histogram&) const = default;
};

// Equal-width bins over [0, max error]; the max lands in the last bin. When
// every error is 0 the range is [0, 1].
Histogram error_histogram(std::span<const AnomalyScore> scores, std::size_t bins = 50);

/// Fits standardizer, autoencoder, threshold, heartbeat and CUSUM parameters
/// from a benign training series and a later benign validation series.
ModelBundle fit_model(const FeatureSeries& train, const FeatureSeries& validation,
                      const PipelineConfig& pipeline, const TrainConfig& autoencoder,
                      const DetectorConfig& detectors);

std::vector<std::size_t> resolve_features(const FeatureSchema& schema,
                                          const std::vector<std::string>& names);

struct SeriesScores {
  std::vector<AnomalyScore> recon;
  std::vector<bool> bin_alerts;       // heartbeat, per bin
  std::vector<bool> heartbeat_flags;  // heartbeat, per window
  std::vector<HybridVerdict> hybrid;
  std::vector<std::uint64_t> cusum_change_bins;
};

// Applies every detector of the bundle to a raw (unstandardized) series.
SeriesScores score_series(const ModelBundle& model, const FeatureSeries& series);

// start_bin,error,flagged,label[,heartbeat,verdict]
void write_scores_csv(const SeriesScores& scores, const std::filesystem::path& path,
                      bool with_hybrid);

struct MedianErrors {
  std::optional<double> benign;
  std::optional<double> anomalous;

  bool operator==(const MedianErrors&) const = default;
};

struct ScenarioResult {
  std::string name;
  std::size_t windows = 0;
  std::size_t anomalous_windows = 0;
  EvalMetrics recon;
  EvalMetrics heartbeat;
  EvalMetrics hybrid;
  std::optional<double> heartbeat_benign_alert_fraction;  // over benign bins
  std::vector<std::uint64_t> cusum_change_bins;
  MedianErrors median_error;
  Histogram histogram;

  // Per-window data; written to errors_<name>.csv, not to report.json.
  SeriesScores scores;
};

struct DetectionReport {
  ordered_json config;
  Threshold threshold;
  TrainReport training;
  HeartbeatDetector heartbeat;
  CusumParams cusum;
  std::vector<ScenarioResult> scenarios;

  const ScenarioResult* find(const std::string& name) const;
};

constexpr const char* kDetectorNames[] = {"recon", "heartbeat", "hybrid"};

// generate/load -> split -> standardize -> window -> train -> calibrate ->
// heartbeat -> score every scenario -> metrics and histograms. Errors name
// the failing stage.
DetectionReport run_experiment(const ExperimentConfig& config);

ordered_json to_json(const DetectionReport& report);
DetectionReport report_from_json(const nlohmann::json& j);

// report.json, metrics.csv and errors_<scenario>.csv.
void emit_report(const DetectionReport& report, const std::filesystem::path& out_dir);

// Writes the five suite series as CSVs into out_dir.
void write_suite(const ScenarioSuite& suite, const std::filesystem::path& out_dir);

}  // namespace bgpbs
