#include "bgpbs/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "bgpbs/error.hpp"
#include "text.hpp"

namespace bgpbs {

using nlohmann::json;

namespace {

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  }
}

std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string opt_csv(const std::optional<double>& v) {
  return v ? text::format_double(*v) : std::string("null");
}

ordered_json metrics_json(const EvalMetrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"tn", m.tn},
          {"fn", m.fn},
          {"recall", opt_json(m.recall)},
          {"false_positive_rate", opt_json(m.false_positive_rate)}};
}

EvalMetrics metrics_from(const json& j) {
  EvalMetrics m;
  m.tp = j.at("tp").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.tn = j.at("tn").get<std::size_t>();
  m.fn = j.at("fn").get<std::size_t>();
  m.recall = opt_from(j.at("recall"));
  m.false_positive_rate = opt_from(j.at("false_positive_rate"));
  return m;
}

std::vector<Label> labels_of(std::span<const AnomalyScore> scores) {
  std::vector<Label> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(s.true_label);
  return out;
}

}  // namespace

EvalMetrics compute_metrics(const std::vector<bool>& flags, const std::vector<Label>& labels) {
  if (flags.empty()) fail(ErrorKind::invalid_input, "no windows to evaluate");
  if (flags.size() != labels.size())
    fail(ErrorKind::invalid_input, "flag and label counts differ");
  EvalMetrics m;
  for (std::size_t k = 0; k < flags.size(); ++k) {
    const bool anomalous = labels[k] == Label::anomalous;
    if (anomalous) (flags[k] ? m.tp : m.fn) += 1;
    else (flags[k] ? m.fp : m.tn) += 1;
  }
  if (m.tp + m.fn > 0) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.fp + m.tn > 0)
    m.false_positive_rate = static_cast<double>(m.fp) / static_cast<double>(m.fp + m.tn);
  return m;
}

EvalMetrics compute_metrics(std::span<const AnomalyScore> scores) {
  std::vector<bool> flags;
  for (const auto& s : scores) flags.push_back(s.flagged);
  return compute_metrics(flags, labels_of(scores));
}

EvalMetrics compute_metrics(std::span<const HybridVerdict> verdicts, std::span<const Label> labels) {
  std::vector<bool> flags;
  for (const auto& v : verdicts) flags.push_back(v.alert());
  return compute_metrics(flags, {labels.begin(), labels.end()});
}

Histogram error_histogram(std::span<const AnomalyScore> scores, std::size_t bins) {
  if (bins == 0) fail(ErrorKind::invalid_input, "histogram needs at least one bin");
  double max = 0.0;
  for (const auto& s : scores) max = std::max(max, s.error);
  const double upper = max > 0.0 ? max : 1.0;
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b)
    h.edges[b] = upper * static_cast<double>(b) / static_cast<double>(bins);
  h.edges[bins] = upper;
  h.benign.assign(bins, 0);
  h.anomalous.assign(bins, 0);
  for (const auto& s : scores) {
    auto b = static_cast<std::size_t>(std::floor(s.error / upper * static_cast<double>(bins)));
    b = std::min(b, bins - 1);
    (s.true_label == Label::anomalous ? h.anomalous : h.benign)[b] += 1;
  }
  return h;
}

std::vector<std::size_t> resolve_features(const FeatureSchema& schema,
                                          const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& name : names) {
    auto idx = schema.index_of(name);
    if (!idx)
      fail(ErrorKind::invalid_input, "volume feature '" + name + "' is not in the schema");
    out.push_back(*idx);
  }
  return out;
}

ModelBundle fit_model(const FeatureSeries& train, const FeatureSeries& validation,
                      const PipelineConfig& pipeline, const TrainConfig& autoencoder,
                      const DetectorConfig& detectors) {
  if (train.schema().feature_names != validation.schema().feature_names)
    fail(ErrorKind::schema, "training and validation series have different schemas");
  const auto volume = stage("heartbeat", [&] {
    return resolve_features(train.schema(), detectors.volume_features);
  });
  ModelBundle m;
  m.schema = train.schema();
  m.window = pipeline.window;
  m.stride = pipeline.stride;
  m.standardizer = stage("standardize", [&] { return fit_standardizer(train); });
  const auto train_windows = stage("window", [&] {
    return make_windows(transform(m.standardizer, train), pipeline.window, pipeline.stride);
  });
  const auto val_windows = stage("window", [&] {
    return make_windows(transform(m.standardizer, validation), pipeline.window, pipeline.stride);
  });
  if (val_windows.empty())
    fail(ErrorKind::invalid_input, "stage 'window': validation series is shorter than one window");
  auto trained = stage("train", [&] { return bgpbs::train(autoencoder, train_windows, val_windows); });
  m.autoencoder = std::move(trained.params);
  m.train_report = std::move(trained.report);
  m.train_config = autoencoder;
  m.threshold = stage("calibrate", [&] {
    const auto errors = reconstruction_errors(m.autoencoder, val_windows);
    return calibrate_threshold(errors, detectors.percentile);
  });
  m.heartbeat = stage("heartbeat", [&] {
    return heartbeat_fit(train, volume, detectors.heartbeat_k, detectors.heartbeat_n, detectors.epsilon_floor);
  });
  m.cusum = default_cusum(m.heartbeat);
  if (detectors.cusum_slack) m.cusum.slack = *detectors.cusum_slack;
  if (detectors.cusum_decision) m.cusum.decision = *detectors.cusum_decision;
  return m;
}

SeriesScores score_series(const ModelBundle& model, const FeatureSeries& series) {
  if (series.schema().feature_names != model.schema.feature_names)
    fail(ErrorKind::schema, "series schema does not match the model schema");
  SeriesScores out;
  const auto windows =
      make_windows(transform(model.standardizer, series), model.window, model.stride);
  out.recon = score_windows(model.autoencoder, model.threshold, windows);
  out.bin_alerts = heartbeat_score(model.heartbeat, series);
  out.heartbeat_flags = window_alerts(out.bin_alerts, model.window, model.stride);
  out.hybrid = hybrid_classify(out.recon, out.bin_alerts, model.window, model.stride);
  const auto volume = summed_volume(series, model.heartbeat.volume_features);
  for (auto t : cusum_downward(volume, model.cusum.reference, model.cusum.slack,
                               model.cusum.decision))
    out.cusum_change_bins.push_back(series[t].bin_index);
  return out;
}

void write_scores_csv(const SeriesScores& scores, const std::filesystem::path& path,
                      bool with_hybrid) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  out << "start_bin,error,flagged,label";
  if (with_hybrid) out << ",heartbeat,verdict";
  out << '\n';
  for (std::size_t k = 0; k < scores.recon.size(); ++k) {
    const auto& s = scores.recon[k];
    out << s.start_bin << ',' << text::format_double(s.error) << ',' << (s.flagged ? 1 : 0) << ','
        << (s.true_label == Label::anomalous ? 1 : 0);
    if (with_hybrid)
      out << ',' << (scores.heartbeat_flags[k] ? 1 : 0) << ',' << to_string(scores.hybrid[k].verdict);
    out << '\n';
  }
  out.flush();
  if (!out) fail(ErrorKind::io, "write failure on " + path.string());
}

const ScenarioResult* DetectionReport::find(const std::string& name) const {
  for (const auto& s : scenarios)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

ScenarioResult evaluate_scenario(const std::string& name, const ModelBundle& model,
                                 const FeatureSeries& series) {
  ScenarioResult r;
  r.name = name;
  r.scores = score_series(model, series);
  const auto& recon = r.scores.recon;
  if (recon.empty())
    fail(ErrorKind::invalid_input, "scenario '" + name + "' is shorter than one window");
  const auto labels = labels_of(recon);
  r.windows = recon.size();
  r.anomalous_windows =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::anomalous));
  r.recon = compute_metrics(recon);
  r.heartbeat = compute_metrics(r.scores.heartbeat_flags, labels);
  r.hybrid = compute_metrics(r.scores.hybrid, labels);

  std::size_t benign_bins = 0, benign_alerts = 0;
  for (std::size_t t = 0; t < series.size(); ++t)
    if (!series[t].anomalous()) {
      ++benign_bins;
      benign_alerts += r.scores.bin_alerts[t] ? 1 : 0;
    }
  if (benign_bins > 0)
    r.heartbeat_benign_alert_fraction =
        static_cast<double>(benign_alerts) / static_cast<double>(benign_bins);

  r.cusum_change_bins = r.scores.cusum_change_bins;
  std::vector<double> benign_err, anomalous_err;
  for (const auto& s : recon)
    (s.true_label == Label::anomalous ? anomalous_err : benign_err).push_back(s.error);
  r.median_error.benign = median_of(std::move(benign_err));
  r.median_error.anomalous = median_of(std::move(anomalous_err));
  r.histogram = error_histogram(recon);
  return r;
}

}  // namespace

DetectionReport run_experiment(const ExperimentConfig& config) {
  config.validate();

  FeatureSeries train_series;
  std::vector<std::pair<std::string, FeatureSeries>> eval_series;
  if (config.data) {
    stage("load", [&] {
      train_series = load_series(config.data->train);
      const auto expected = train_series.schema();
      eval_series.emplace_back("benign_test", load_series(config.data->test, expected));
      for (const auto& [name, path] : config.data->scenarios)
        eval_series.emplace_back(name, load_series(path, expected));
      return 0;
    });
  } else {
    stage("generate", [&] {
      auto suite = make_scenario_suite(config.suite);
      train_series = std::move(suite.benign_train);
      eval_series.emplace_back("benign_test", std::move(suite.benign_test));
      for (auto& s : suite.scenarios) eval_series.emplace_back(s.name, std::move(s.series));
      return 0;
    });
  }

  auto [train_part, val_part] = stage("split", [&] {
    return split_chronological(train_series, config.pipeline.train_fraction);
  });

  const auto model =
      fit_model(train_part, val_part, config.pipeline, config.autoencoder, config.detectors);

  DetectionReport report;
  report.config = to_json(config);
  report.threshold = model.threshold;
  report.training = model.train_report;
  report.heartbeat = model.heartbeat;
  report.cusum = model.cusum;
  stage("score", [&] {
    for (const auto& [name, series] : eval_series)
      report.scenarios.push_back(evaluate_scenario(name, model, series));
    return 0;
  });
  return report;
}

ordered_json to_json(const DetectionReport& report) {
  ordered_json j;
  j["config"] = report.config;
  j["window_labeling"] =
      "a window is anomalous iff at least ceil(W/2) of its bins are anomalous; "
      "recall and false-positive rate count windows";
  j["threshold"] = to_json(report.threshold);
  j["training"] = to_json(report.training);
  j["detectors"] = detectors_to_json(report.threshold, report.heartbeat, report.cusum);
  ordered_json scenarios = ordered_json::array();
  for (const auto& s : report.scenarios) {
    ordered_json e;
    e["name"] = s.name;
    e["windows"] = s.windows;
    e["anomalous_windows"] = s.anomalous_windows;
    e["metrics"] = {{"recon", metrics_json(s.recon)},
                    {"heartbeat", metrics_json(s.heartbeat)},
                    {"hybrid", metrics_json(s.hybrid)}};
    e["heartbeat_benign_alert_fraction"] = opt_json(s.heartbeat_benign_alert_fraction);
    e["cusum_change_bins"] = s.cusum_change_bins;
    e["median_error"] = {{"benign", opt_json(s.median_error.benign)},
                         {"anomalous", opt_json(s.median_error.anomalous)}};
    e["histogram"] = {{"edges", s.histogram.edges},
                      {"benign", s.histogram.benign},
                      {"anomalous", s.histogram.anomalous}};
    scenarios.push_back(std::move(e));
  }
  j["scenarios"] = scenarios;
  return j;
}

DetectionReport report_from_json(const json& j) {
  try {
    DetectionReport r;
    r.config = j.at("config");
    r.threshold = threshold_from_json(j.at("threshold"));
    r.training = train_report_from_json(j.at("training"));
    Threshold unused;
    detectors_from_json(j.at("detectors"), unused, r.heartbeat, r.cusum);
    for (const auto& e : j.at("scenarios")) {
      ScenarioResult s;
      s.name = e.at("name").get<std::string>();
      s.windows = e.at("windows").get<std::size_t>();
      s.anomalous_windows = e.at("anomalous_windows").get<std::size_t>();
      s.recon = metrics_from(e.at("metrics").at("recon"));
      s.heartbeat = metrics_from(e.at("metrics").at("heartbeat"));
      s.hybrid = metrics_from(e.at("metrics").at("hybrid"));
      s.heartbeat_benign_alert_fraction = opt_from(e.at("heartbeat_benign_alert_fraction"));
      s.cusum_change_bins = e.at("cusum_change_bins").get<std::vector<std::uint64_t>>();
      s.median_error.benign = opt_from(e.at("median_error").at("benign"));
      s.median_error.anomalous = opt_from(e.at("median_error").at("anomalous"));
      s.histogram.edges = e.at("histogram").at("edges").get<std::vector<double>>();
      s.histogram.benign = e.at("histogram").at("benign").get<std::vector<std::size_t>>();
      s.histogram.anomalous = e.at("histogram").at("anomalous").get<std::vector<std::size_t>>();
      r.scenarios.push_back(std::move(s));
    }
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::invalid_input, std::string("report: ") + e.what());
  }
}

void emit_report(const DetectionReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());

  write_json_file(to_json(report), out_dir / "report.json");

  std::ofstream metrics(out_dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!metrics) fail(ErrorKind::io, "cannot open metrics.csv for writing");
  metrics << "scenario,detector,tp,fp,tn,fn,recall,false_positive_rate\n";
  for (const auto& s : report.scenarios) {
    const EvalMetrics* rows[] = {&s.recon, &s.heartbeat, &s.hybrid};
    for (std::size_t d = 0; d < 3; ++d) {
      const auto& m = *rows[d];
      metrics << s.name << ',' << kDetectorNames[d] << ',' << m.tp << ',' << m.fp << ',' << m.tn
              << ',' << m.fn << ',' << opt_csv(m.recall) << ',' << opt_csv(m.false_positive_rate)
              << '\n';
    }
  }
  metrics.flush();
  if (!metrics) fail(ErrorKind::io, "write failure on metrics.csv");

  for (const auto& s : report.scenarios)
    if (!s.scores.recon.empty())
      write_scores_csv(s.scores, out_dir / ("errors_" + s.name + ".csv"), false);
}

void write_suite(const ScenarioSuite& suite, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());
  save_series(suite.benign_train, out_dir / "benign_train.csv");
  save_series(suite.benign_test, out_dir / "benign_test.csv");
  for (const auto& s : suite.scenarios) save_series(s.series, out_dir / (s.name + ".csv"));
}

}  // namespace bgpbs
