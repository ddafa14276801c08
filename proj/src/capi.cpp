#include "bgpbs/bgpbs.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <sstream>
#include <string>

#include "bgpbs/config.hpp"
#include "bgpbs/error.hpp"
#include "bgpbs/evaluation.hpp"
#include "bgpbs/serialize.hpp"

struct bgpbs_series {
  bgpbs::FeatureSeries series;
};

struct bgpbs_model {
  bgpbs::ModelBundle bundle;
};

struct bgpbs_report {
  bgpbs::DetectionReport report;
};

namespace {

thread_local std::string g_last_error;

int set_error(int status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class F>
int guard(F&& f) noexcept {
  try {
    f();
    return BGPBS_OK;
  } catch (const bgpbs::Error& e) {
    return set_error(bgpbs::exit_code(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(BGPBS_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(BGPBS_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(BGPBS_E_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) bgpbs::fail(bgpbs::ErrorKind::invalid_input, what);
}

bgpbs::ExperimentConfig resolve_config(const char* config_path, const uint64_t* seed_override) {
  auto config = config_path != nullptr ? bgpbs::load_experiment_config(config_path)
                                       : bgpbs::default_experiment_config();
  if (seed_override != nullptr) {
    config.set_seed(*seed_override);
  } else if (auto env = bgpbs::seed_from_environment()) {
    config.set_seed(*env);
  }
  return config;
}

std::vector<std::string> split_names(const char* csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

extern "C" {

const char* bgpbs_version(void) { return "1.0.0"; }

const char* bgpbs_last_error(void) { return g_last_error.c_str(); }

const char* bgpbs_status_string(int status) {
  switch (status) {
    case BGPBS_OK: return "ok";
    case BGPBS_E_INVALID: return "invalid input";
    case BGPBS_E_IO: return "I/O error";
    case BGPBS_E_DIVERGED: return "training diverged";
    case BGPBS_E_INTERNAL: return "internal error";
    default: return "unknown status";
  }
}

int bgpbs_series_load(const char* path, bgpbs_series** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto s = std::make_unique<bgpbs_series>();
    s->series = bgpbs::load_series(std::filesystem::path(path));
    *out = s.release();
  });
}

int bgpbs_series_save(const bgpbs_series* series, const char* path) {
  return guard([&] {
    require(series != nullptr && path != nullptr, "null argument");
    bgpbs::save_series(series->series, std::filesystem::path(path));
  });
}

void bgpbs_series_free(bgpbs_series* series) { delete series; }

size_t bgpbs_series_length(const bgpbs_series* series) {
  return series != nullptr ? series->series.size() : 0;
}

size_t bgpbs_series_dimension(const bgpbs_series* series) {
  return series != nullptr ? series->series.dimension() : 0;
}

size_t bgpbs_series_count_anomalous(const bgpbs_series* series) {
  return series != nullptr ? series->series.count_anomalous() : 0;
}

const char* bgpbs_series_feature_name(const bgpbs_series* series, size_t col) {
  if (series == nullptr || col >= series->series.dimension()) return nullptr;
  return series->series.schema().feature_names[col].c_str();
}

int bgpbs_series_value(const bgpbs_series* series, size_t row, size_t col, double* out) {
  return guard([&] {
    require(series != nullptr && out != nullptr, "null argument");
    require(row < series->series.size() && col < series->series.dimension(), "index out of range");
    *out = series->series[row].values[col];
  });
}

int bgpbs_series_label(const bgpbs_series* series, size_t row, int* out) {
  return guard([&] {
    require(series != nullptr && out != nullptr, "null argument");
    require(row < series->series.size(), "index out of range");
    *out = series->series[row].anomalous() ? 1 : 0;
  });
}

int bgpbs_generate_suite(const char* config_path, const uint64_t* seed_override,
                         const char* out_dir) {
  return guard([&] {
    require(out_dir != nullptr, "null output directory");
    const auto config = resolve_config(config_path, seed_override);
    bgpbs::write_suite(bgpbs::make_scenario_suite(config.suite), out_dir);
  });
}

int bgpbs_train_options_init(bgpbs_train_options* options) {
  return guard([&] {
    require(options != nullptr, "null argument");
    const auto defaults = bgpbs::default_experiment_config();
    options->window = defaults.pipeline.window;
    options->stride = defaults.pipeline.stride;
    options->hidden = defaults.autoencoder.hidden;
    options->epochs = defaults.autoencoder.epochs;
    options->batch_size = defaults.autoencoder.batch_size;
    options->learning_rate = defaults.autoencoder.learning_rate;
    options->seed = defaults.autoencoder.seed;
    options->percentile = defaults.detectors.percentile;
    options->heartbeat_k = defaults.detectors.heartbeat_k;
    options->heartbeat_n = defaults.detectors.heartbeat_n;
    options->volume_features = nullptr;
    if (auto env = bgpbs::seed_from_environment()) options->seed = *env;
  });
}

int bgpbs_model_train(const bgpbs_series* train, const bgpbs_series* validation,
                      const bgpbs_train_options* options, bgpbs_model** out) {
  return guard([&] {
    require(train != nullptr && validation != nullptr && options != nullptr && out != nullptr,
            "null argument");
    *out = nullptr;
    auto config = bgpbs::default_experiment_config();
    config.pipeline.window = options->window;
    config.pipeline.stride = options->stride;
    config.autoencoder.hidden = options->hidden;
    config.autoencoder.epochs = options->epochs;
    config.autoencoder.batch_size = options->batch_size;
    config.autoencoder.learning_rate = options->learning_rate;
    config.autoencoder.seed = options->seed;
    config.detectors.percentile = options->percentile;
    config.detectors.heartbeat_k = options->heartbeat_k;
    config.detectors.heartbeat_n = options->heartbeat_n;
    if (options->volume_features != nullptr)
      config.detectors.volume_features = split_names(options->volume_features);
    config.validate();
    auto m = std::make_unique<bgpbs_model>();
    m->bundle = bgpbs::fit_model(train->series, validation->series, config.pipeline,
                                 config.autoencoder, config.detectors);
    *out = m.release();
  });
}

int bgpbs_model_save(const bgpbs_model* model, const char* path) {
  return guard([&] {
    require(model != nullptr && path != nullptr, "null argument");
    bgpbs::save_model(model->bundle, path);
  });
}

int bgpbs_model_load(const char* path, bgpbs_model** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto m = std::make_unique<bgpbs_model>();
    m->bundle = bgpbs::load_model(path);
    *out = m.release();
  });
}

void bgpbs_model_free(bgpbs_model* model) { delete model; }

double bgpbs_model_threshold(const bgpbs_model* model) {
  return model != nullptr ? model->bundle.threshold.value
                          : std::numeric_limits<double>::quiet_NaN();
}

size_t bgpbs_model_window(const bgpbs_model* model) {
  return model != nullptr ? model->bundle.window : 0;
}

size_t bgpbs_model_stride(const bgpbs_model* model) {
  return model != nullptr ? model->bundle.stride : 0;
}

int bgpbs_model_loss_curve(const bgpbs_model* model, double* first, double* last) {
  return guard([&] {
    require(model != nullptr && first != nullptr && last != nullptr, "null argument");
    const auto& loss = model->bundle.train_report.epoch_loss;
    require(!loss.empty(), "model has no recorded training loss");
    *first = loss.front();
    *last = loss.back();
  });
}

int bgpbs_model_score(const bgpbs_model* model, const bgpbs_series* series, const char* out_csv,
                      bgpbs_score_summary* summary) {
  return guard([&] {
    require(model != nullptr && series != nullptr, "null argument");
    const auto scores = bgpbs::score_series(model->bundle, series->series);
    if (out_csv != nullptr) bgpbs::write_scores_csv(scores, out_csv, true);
    if (summary != nullptr) {
      *summary = {};
      summary->windows = scores.recon.size();
      for (std::size_t k = 0; k < scores.recon.size(); ++k) {
        summary->anomalous_windows += scores.recon[k].true_label == bgpbs::Label::anomalous;
        summary->recon_flagged += scores.recon[k].flagged;
        summary->heartbeat_flagged += scores.heartbeat_flags[k];
        summary->verdict_type1 += scores.hybrid[k].verdict == bgpbs::Verdict::type1;
        summary->verdict_type2 += scores.hybrid[k].verdict == bgpbs::Verdict::type2;
      }
    }
  });
}

int bgpbs_evaluate(const char* config_path, const uint64_t* seed_override, const char* out_dir,
                   bgpbs_report** out) {
  return guard([&] {
    if (out != nullptr) *out = nullptr;
    const auto config = resolve_config(config_path, seed_override);
    auto r = std::make_unique<bgpbs_report>();
    r->report = bgpbs::run_experiment(config);
    if (out_dir != nullptr) bgpbs::emit_report(r->report, out_dir);
    if (out != nullptr) *out = r.release();
  });
}

void bgpbs_report_free(bgpbs_report* report) { delete report; }

size_t bgpbs_report_scenario_count(const bgpbs_report* report) {
  return report != nullptr ? report->report.scenarios.size() : 0;
}

const char* bgpbs_report_scenario_name(const bgpbs_report* report, size_t index) {
  if (report == nullptr || index >= report->report.scenarios.size()) return nullptr;
  return report->report.scenarios[index].name.c_str();
}

int bgpbs_report_metric(const bgpbs_report* report, const char* scenario, const char* detector,
                        const char* metric, double* out) {
  return guard([&] {
    require(report != nullptr && scenario != nullptr && detector != nullptr && metric != nullptr &&
                out != nullptr,
            "null argument");
    const auto* s = report->report.find(scenario);
    if (s == nullptr)
      bgpbs::fail(bgpbs::ErrorKind::invalid_input, std::string("no scenario '") + scenario + "'");
    const std::string d = detector;
    const bgpbs::EvalMetrics* m = d == "recon"       ? &s->recon
                                  : d == "heartbeat" ? &s->heartbeat
                                  : d == "hybrid"    ? &s->hybrid
                                                     : nullptr;
    if (m == nullptr) bgpbs::fail(bgpbs::ErrorKind::invalid_input, "unknown detector '" + d + "'");
    const std::string name = metric;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (name == "recall") *out = m->recall.value_or(nan);
    else if (name == "false_positive_rate") *out = m->false_positive_rate.value_or(nan);
    else if (name == "tp") *out = static_cast<double>(m->tp);
    else if (name == "fp") *out = static_cast<double>(m->fp);
    else if (name == "tn") *out = static_cast<double>(m->tn);
    else if (name == "fn") *out = static_cast<double>(m->fn);
    else bgpbs::fail(bgpbs::ErrorKind::invalid_input, "unknown metric '" + name + "'");
  });
}

double bgpbs_report_threshold(const bgpbs_report* report) {
  return report != nullptr ? report->report.threshold.value
                           : std::numeric_limits<double>::quiet_NaN();
}

}  // extern "C"
