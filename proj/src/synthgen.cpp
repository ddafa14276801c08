#include "bgpbs/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bgpbs/error.hpp"

namespace bgpbs {

namespace {

constexpr double kDiurnalPeriodBins = 1440.0;
constexpr int kMaxResample = 10000;

double diurnal_factor(double amplitude, std::uint64_t bin) {
  return 1.0 + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(bin) /
                                    kDiurnalPeriodBins);
}

double draw_poisson(std::mt19937_64& rng, double rate) {
  if (rate <= 0.0) return 0.0;
  std::poisson_distribution<long long> dist(rate);
  return static_cast<double>(dist(rng));
}

// Gamma-Poisson mixture with variance 2*mean.
double draw_overdispersed(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::gamma_distribution<double> gamma(mean, 1.0);
  return draw_poisson(rng, gamma(rng));
}

double draw_clipped_normal(std::mt19937_64& rng, double mean, double stddev) {
  if (stddev == 0.0) return std::max(0.0, mean);
  std::normal_distribution<double> dist(mean, stddev);
  return std::max(0.0, dist(rng));
}

void check_schema_matches(const BenignModel& model, const FeatureSchema& schema) {
  if (schema.dimension() != model.features.size())
    fail(ErrorKind::invalid_input, "schema dimension does not match the benign model");
  for (std::size_t f = 0; f < model.features.size(); ++f)
    if (schema.feature_names[f] != model.features[f].name)
      fail(ErrorKind::invalid_input,
           "schema feature '" + schema.feature_names[f] + "' does not match model feature '" +
               model.features[f].name + "'");
}

}  // namespace

const char* to_string(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::count: return "count";
    case FeatureKind::path_length: return "path_length";
    case FeatureKind::edit_distance: return "edit_distance";
    case FeatureKind::statistic: return "statistic";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "count") return FeatureKind::count;
  if (s == "path_length") return FeatureKind::path_length;
  if (s == "edit_distance") return FeatureKind::edit_distance;
  if (s == "statistic") return FeatureKind::statistic;
  fail(ErrorKind::invalid_input, "unknown feature kind '" + s + "'");
}

const char* to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::storm: return "storm";
    case ScenarioKind::signal_loss: return "signal_loss";
    case ScenarioKind::low_deviation: return "low_deviation";
  }
  return "?";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "storm") return ScenarioKind::storm;
  if (s == "signal_loss") return ScenarioKind::signal_loss;
  if (s == "low_deviation") return ScenarioKind::low_deviation;
  fail(ErrorKind::invalid_input, "unknown scenario kind '" + s + "'");
}

double default_intensity(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::storm: return 25.0;
    case ScenarioKind::signal_loss: return 1.0;
    case ScenarioKind::low_deviation: return 1.0;
  }
  return 1.0;
}

void BenignModel::validate() const {
  if (features.empty()) fail(ErrorKind::invalid_input, "benign model has no features");
  if (!(diurnal_amplitude >= 0.0 && diurnal_amplitude < 1.0))
    fail(ErrorKind::invalid_input, "diurnal amplitude must lie in [0, 1)");
  for (const auto& f : features) {
    if (f.is_count()) {
      if (!(f.rate > 0.0) || !std::isfinite(f.rate))
        fail(ErrorKind::invalid_input, "count feature '" + f.name + "' needs a positive rate");
    } else if (!(f.stddev >= 0.0) || !std::isfinite(f.stddev) || !std::isfinite(f.mean)) {
      fail(ErrorKind::invalid_input,
           "statistic feature '" + f.name + "' needs a finite mean and stddev >= 0");
    }
  }
  schema().validate();
}

FeatureSchema BenignModel::schema(std::int64_t bin_width_seconds) const {
  FeatureSchema s;
  s.bin_width_seconds = bin_width_seconds;
  for (const auto& f : features) s.feature_names.push_back(f.name);
  return s;
}

std::vector<std::size_t> BenignModel::count_features() const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < features.size(); ++f)
    if (features[f].is_count()) out.push_back(f);
  return out;
}

BenignModel default_benign_model(std::uint64_t seed) {
  BenignModel m;
  m.seed = seed;
  m.diurnal_amplitude = 0.1;
  m.features = {
      {"n_announcements", FeatureKind::count, 4.0, 0.0, 0.0},
      {"n_withdrawals", FeatureKind::count, 2.0, 0.0, 0.0},
      {"n_new_paths", FeatureKind::count, 1.5, 0.0, 0.0},
      {"n_duplicates", FeatureKind::count, 1.0, 0.0, 0.0},
      {"avg_aspath_len", FeatureKind::path_length, 0.0, 3.0, 2.0},
      {"max_aspath_len", FeatureKind::path_length, 0.0, 5.0, 3.5},
      {"avg_edit_distance", FeatureKind::edit_distance, 0.0, 1.0, 0.8},
      {"max_edit_distance", FeatureKind::edit_distance, 0.0, 2.0, 1.5},
  };
  return m;
}

FeatureSeries generate_benign(const BenignModel& model, std::size_t length,
                              const FeatureSchema& schema) {
  if (length == 0) fail(ErrorKind::invalid_input, "benign series length must be positive");
  model.validate();
  check_schema_matches(model, schema);

  std::mt19937_64 rng(model.seed);
  std::vector<FeatureRecord> records;
  records.reserve(length);
  const auto d = model.features.size();
  for (std::size_t t = 0; t < length; ++t) {
    FeatureRecord rec;
    rec.bin_index = t;
    rec.values.assign(d, 0.0);
    const double diurnal = diurnal_factor(model.diurnal_amplitude, t);
    bool all_zero = true;
    for (int attempt = 0; all_zero; ++attempt) {
      if (attempt == kMaxResample)
        fail(ErrorKind::invalid_input, "benign model keeps producing all-zero bins");
      for (std::size_t f = 0; f < d; ++f) {
        const auto& fm = model.features[f];
        rec.values[f] = fm.is_count() ? draw_poisson(rng, fm.rate * diurnal)
                                      : draw_clipped_normal(rng, fm.mean, fm.stddev);
      }
      all_zero = std::all_of(rec.values.begin(), rec.values.end(),
                             [](double v) { return v == 0.0; });
    }
    records.push_back(std::move(rec));
  }
  return FeatureSeries(schema, std::move(records));
}

std::vector<std::size_t> low_deviation_targets(const ScenarioSpec& spec, const BenignModel& model) {
  std::vector<std::size_t> targets = spec.target_features;
  if (targets.empty()) {
    auto counts = model.count_features();
    if (counts.size() < 2)
      fail(ErrorKind::invalid_input, "low-deviation scenario needs at least two count features");
    targets = {counts[0], counts[1]};
  }
  if (targets.size() != 2 || targets[0] == targets[1])
    fail(ErrorKind::invalid_input, "low-deviation scenario perturbs exactly two features");
  for (auto f : targets)
    if (f >= model.features.size() || !model.features[f].is_count())
      fail(ErrorKind::invalid_input, "low-deviation targets must be count features");
  return targets;
}

FeatureSeries inject_scenario(const FeatureSeries& base, const ScenarioSpec& spec,
                              const BenignModel& model) {
  model.validate();
  check_schema_matches(model, base.schema());
  if (!base.all_benign()) fail(ErrorKind::invalid_input, "injection base must be all-benign");
  if (spec.duration_bins < 1) fail(ErrorKind::invalid_input, "scenario duration must be >= 1");
  if (spec.start_bin > base.size() || spec.duration_bins > base.size() - spec.start_bin)
    fail(ErrorKind::invalid_input, "scenario window [" + std::to_string(spec.start_bin) + ", " +
                                       std::to_string(spec.start_bin + spec.duration_bins) +
                                       ") overflows a series of length " +
                                       std::to_string(base.size()));
  const double intensity = spec.effective_intensity();
  if (!(intensity > 0.0) || !std::isfinite(intensity))
    fail(ErrorKind::invalid_input, "scenario intensity must be positive");

  std::vector<std::size_t> targets;
  if (spec.kind == ScenarioKind::low_deviation) targets = low_deviation_targets(spec, model);

  std::mt19937_64 rng(spec.seed);
  std::vector<FeatureRecord> records = base.records();
  const auto end = spec.start_bin + spec.duration_bins;
  for (std::size_t t = spec.start_bin; t < end; ++t) {
    auto& rec = records[t];
    rec.label = Label::anomalous;
    const double diurnal = diurnal_factor(model.diurnal_amplitude, rec.bin_index);
    switch (spec.kind) {
      case ScenarioKind::storm: {
        std::uniform_real_distribution<double> path_bump(10.0, 30.0);
        for (std::size_t f = 0; f < rec.values.size(); ++f) {
          const auto& fm = model.features[f];
          switch (fm.kind) {
            case FeatureKind::count:
              rec.values[f] = draw_overdispersed(rng, fm.rate * diurnal * intensity);
              break;
            case FeatureKind::path_length:
              rec.values[f] += path_bump(rng);
              break;
            case FeatureKind::edit_distance:
              rec.values[f] *= 5.0;
              break;
            case FeatureKind::statistic:
              break;
          }
        }
        break;
      }
      case ScenarioKind::signal_loss:
        std::fill(rec.values.begin(), rec.values.end(), 0.0);
        break;
      case ScenarioKind::low_deviation:
        for (auto f : targets)
          rec.values[f] = draw_poisson(rng, model.features[f].rate * diurnal *
                                                (1.0 + 0.2 * intensity));
        break;
    }
  }
  return FeatureSeries(base.schema(), std::move(records));
}

const Scenario* ScenarioSuite::find(const std::string& name) const {
  for (const auto& s : scenarios)
    if (s.name == name) return &s;
  return nullptr;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ScenarioSuite make_scenario_suite(const SuiteConfig& config) {
  config.model.validate();
  if (config.lengths.train == 0 || config.lengths.test == 0 || config.lengths.anomaly == 0)
    fail(ErrorKind::invalid_input, "suite lengths must be positive");
  const auto schema = config.model.schema(config.bin_width_seconds);

  auto with_seed = [&](std::uint64_t stream) {
    BenignModel m = config.model;
    m.seed = derive_seed(config.seed, stream);
    return m;
  };

  ScenarioSuite suite;
  suite.benign_train = generate_benign(with_seed(0), config.lengths.train, schema);
  suite.benign_test = generate_benign(with_seed(1), config.lengths.test, schema);

  const std::size_t n = config.lengths.anomaly;
  const std::size_t duration = std::max<std::size_t>(1, n / 5);
  const std::size_t start = (n - duration) / 2;
  for (std::size_t k = 0; k < config.scenarios.size(); ++k) {
    const auto& def = config.scenarios[k];
    ScenarioSpec spec;
    spec.kind = def.kind;
    spec.start_bin = start;
    spec.duration_bins = duration;
    spec.intensity = def.intensity;
    spec.seed = def.seed.value_or(derive_seed(config.seed, 200 + k));
    std::string name = to_string(def.kind);
    if (suite.find(name) != nullptr) name += "_" + std::to_string(k);
    auto base = generate_benign(with_seed(100 + k), n, schema);
    suite.scenarios.push_back({name, spec, inject_scenario(base, spec, config.model)});
  }
  return suite;
}

}  // namespace bgpbs
