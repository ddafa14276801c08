#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bgpbs/dataset.hpp"

namespace bgpbs {

enum class FeatureKind { count, path_length, edit_distance, statistic };

const char* to_string(FeatureKind kind) noexcept;
FeatureKind feature_kind_from_string(const std::string& s);

// Count features use `rate`; the three statistic kinds use `mean`/`stddev`.
struct FeatureModel {
  std::string name;
  FeatureKind kind = FeatureKind::count;
  double rate = 1.0;
  double mean = 0.0;
  double stddev = 0.0;

  bool is_count() const noexcept { return kind == FeatureKind::count; }
};

/// Stochastic model of benign per-bin churn.
///
/// Count features are Poisson with a mild diurnal modulation of the rate,
/// rate_t = rate * (1 + diurnal_amplitude * sin(2*pi*t/1440)). Statistic
/// features are Normal(mean, stddev) clipped at zero. Generation is a pure
/// function of (model, length).
struct BenignModel {
  std::vector<FeatureModel> features;
  double diurnal_amplitude = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  FeatureSchema schema(std::int64_t bin_width_seconds = 60) const;
  std::vector<std::size_t> count_features() const;
};

// Eight features covering announcement/withdrawal volume, path churn, AS-path
// length and edit distance.
BenignModel default_benign_model(std::uint64_t seed = 0);

FeatureSeries generate_benign(const BenignModel& model, std::size_t length,
                              const FeatureSchema& schema);

enum class ScenarioKind { storm, signal_loss, low_deviation };

const char* to_string(ScenarioKind kind) noexcept;
ScenarioKind scenario_kind_from_string(const std::string& s);
double default_intensity(ScenarioKind kind) noexcept;

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::storm;
  std::size_t start_bin = 0;
  std::size_t duration_bins = 1;
  std::optional<double> intensity;  // kind default when unset
  std::uint64_t seed = 0;
  // Low-deviation only: the two perturbed count features. Defaults to the
  // first two count features of the model.
  std::vector<std::size_t> target_features;

  double effective_intensity() const { return intensity.value_or(default_intensity(kind)); }
};

// Rewrites records in [start_bin, start_bin + duration_bins) and labels them
// anomalous. Positions are offsets into `base`, not bin_index values.
FeatureSeries inject_scenario(const FeatureSeries& base, const ScenarioSpec& spec,
                              const BenignModel& model);

std::vector<std::size_t> low_deviation_targets(const ScenarioSpec& spec, const BenignModel& model);

struct SuiteLengths {
  std::size_t train = 4000;
  std::size_t test = 2000;
  std::size_t anomaly = 2000;
};

struct ScenarioDef {
  ScenarioKind kind = ScenarioKind::storm;
  std::optional<double> intensity;
  std::optional<std::uint64_t> seed;  // derived from the suite seed when unset
};

struct SuiteConfig {
  BenignModel model = default_benign_model();
  std::int64_t bin_width_seconds = 60;
  SuiteLengths lengths;
  std::vector<ScenarioDef> scenarios = {
      {ScenarioKind::storm, {}, {}},
      {ScenarioKind::signal_loss, {}, {}},
      {ScenarioKind::low_deviation, {}, {}},
  };
  std::uint64_t seed = 42;
};

struct Scenario {
  std::string name;
  ScenarioSpec spec;
  FeatureSeries series;
};

struct ScenarioSuite {
  FeatureSeries benign_train;
  FeatureSeries benign_test;
  std::vector<Scenario> scenarios;

  const Scenario* find(const std::string& name) const;
};

// Each anomalous series carries one centered injected window covering 20% of
// its length.
ScenarioSuite make_scenario_suite(const SuiteConfig& config);

// SplitMix64 mix of (seed, stream); used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace bgpbs
