// Command-line front end. Links only the C API in bgpbs.h.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bgpbs/bgpbs.h"

namespace {

struct SeriesDeleter {
  void operator()(bgpbs_series* s) const { bgpbs_series_free(s); }
};
struct ModelDeleter {
  void operator()(bgpbs_model* m) const { bgpbs_model_free(m); }
};
struct ReportDeleter {
  void operator()(bgpbs_report* r) const { bgpbs_report_free(r); }
};
using SeriesPtr = std::unique_ptr<bgpbs_series, SeriesDeleter>;
using ModelPtr = std::unique_ptr<bgpbs_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<bgpbs_report, ReportDeleter>;

int report_failure(const char* what, int status) {
  std::fprintf(stderr, "bgpbs %s: %s: %s\n", what, bgpbs_status_string(status), bgpbs_last_error());
  return status;
}

const char* c_str_or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

SeriesPtr load(const std::string& path, int& status) {
  bgpbs_series* raw = nullptr;
  status = bgpbs_series_load(path.c_str(), &raw);
  return SeriesPtr(raw);
}

std::string fmt_rate(double v) {
  if (std::isnan(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BGP anomaly detection toolkit: LSTM autoencoder plus signal-loss detector"};
  app.set_version_flag("--version", bgpbs_version());
  app.require_subcommand(1);
  app.footer(
      "Seed precedence: --seed flag, then BGPBS_SEED, then the config file.\n"
      "Exit codes: 0 success, 1 invalid input/config, 2 I/O error, 3 training diverged.");

  std::optional<std::uint64_t> seed;

  // generate
  std::string gen_config, gen_out;
  auto* gen = app.add_subcommand("generate", "Write the synthetic scenario suite as CSVs");
  gen->add_option("--config", gen_config, "Suite/experiment config JSON (defaults when omitted)");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the config seed");

  // train
  std::string train_path, val_path, model_out, volume_features;
  bgpbs_train_options opts{};
  if (int st = bgpbs_train_options_init(&opts); st != BGPBS_OK) return report_failure("init", st);
  auto* tr = app.add_subcommand(
      "train", "Fit standardizer and autoencoder, calibrate the threshold, fit the heartbeat");
  tr->add_option("--train", train_path, "Benign training CSV")->required();
  tr->add_option("--val", val_path, "Benign validation CSV (chronologically after --train)")
      ->required();
  tr->add_option("--out", model_out, "Model JSON to write")->required();
  tr->add_option("--window", opts.window, "Window length W")->capture_default_str();
  tr->add_option("--stride", opts.stride, "Window stride")->capture_default_str();
  tr->add_option("--hidden", opts.hidden, "LSTM hidden/latent size H")->capture_default_str();
  tr->add_option("--epochs", opts.epochs, "Training epochs")->capture_default_str();
  tr->add_option("--batch-size", opts.batch_size, "Minibatch size")->capture_default_str();
  tr->add_option("--learning-rate", opts.learning_rate, "Adam learning rate")->capture_default_str();
  tr->add_option("--percentile", opts.percentile, "Threshold percentile of validation errors")
      ->capture_default_str();
  tr->add_option("--heartbeat-k", opts.heartbeat_k, "Heartbeat floor depth in sigmas")
      ->capture_default_str();
  tr->add_option("--heartbeat-n", opts.heartbeat_n, "Heartbeat persistence in bins")
      ->capture_default_str();
  tr->add_option("--volume-features", volume_features,
                 "Comma-separated features summed into update volume "
                 "(default n_announcements,n_withdrawals)");
  tr->add_option("--seed", seed, "Training seed");

  // score
  std::string score_model, score_data, score_out;
  auto* sc = app.add_subcommand("score", "Score one series with a trained model");
  sc->add_option("--model", score_model, "Model JSON from 'train'")->required();
  sc->add_option("--data", score_data, "Series CSV")->required();
  sc->add_option("--out", score_out, "Scores CSV to write")->required();

  // evaluate
  std::string eval_config, eval_out;
  auto* ev = app.add_subcommand("evaluate", "Run the full experiment and write a report");
  ev->add_option("--config", eval_config, "Experiment config JSON (defaults when omitted)");
  ev->add_option("--out", eval_out, "Report directory")->required();
  ev->add_option("--seed", seed, "Override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : BGPBS_E_INVALID;
  }

  const std::uint64_t* seed_ptr = seed ? &*seed : nullptr;

  if (*gen) {
    const int st = bgpbs_generate_suite(c_str_or_null(gen_config), seed_ptr, gen_out.c_str());
    if (st != BGPBS_OK) return report_failure("generate", st);
    std::printf("wrote scenario suite to %s\n", gen_out.c_str());
    return 0;
  }

  if (*tr) {
    if (seed) opts.seed = *seed;
    if (!volume_features.empty()) opts.volume_features = volume_features.c_str();
    int st = BGPBS_OK;
    auto train = load(train_path, st);
    if (st != BGPBS_OK) return report_failure("train", st);
    auto val = load(val_path, st);
    if (st != BGPBS_OK) return report_failure("train", st);
    bgpbs_model* raw = nullptr;
    st = bgpbs_model_train(train.get(), val.get(), &opts, &raw);
    ModelPtr model(raw);
    if (st != BGPBS_OK) return report_failure("train", st);
    st = bgpbs_model_save(model.get(), model_out.c_str());
    if (st != BGPBS_OK) return report_failure("train", st);
    double first = 0.0, last = 0.0;
    bgpbs_model_loss_curve(model.get(), &first, &last);
    std::printf("trained: loss %.6f -> %.6f, threshold %.6f; wrote %s\n", first, last,
                bgpbs_model_threshold(model.get()), model_out.c_str());
    return 0;
  }

  if (*sc) {
    bgpbs_model* raw = nullptr;
    int st = bgpbs_model_load(score_model.c_str(), &raw);
    ModelPtr model(raw);
    if (st != BGPBS_OK) return report_failure("score", st);
    auto data = load(score_data, st);
    if (st != BGPBS_OK) return report_failure("score", st);
    bgpbs_score_summary summary{};
    st = bgpbs_model_score(model.get(), data.get(), score_out.c_str(), &summary);
    if (st != BGPBS_OK) return report_failure("score", st);
    std::printf("windows %zu (anomalous %zu): recon flagged %zu, heartbeat flagged %zu, "
                "type1 %zu, type2 %zu; wrote %s\n",
                summary.windows, summary.anomalous_windows, summary.recon_flagged,
                summary.heartbeat_flagged, summary.verdict_type1, summary.verdict_type2,
                score_out.c_str());
    return 0;
  }

  if (*ev) {
    bgpbs_report* raw = nullptr;
    const int st = bgpbs_evaluate(c_str_or_null(eval_config), seed_ptr, eval_out.c_str(), &raw);
    ReportPtr report(raw);
    if (st != BGPBS_OK) return report_failure("evaluate", st);
    std::printf("threshold %.6f\n", bgpbs_report_threshold(report.get()));
    std::printf("%-16s %-10s %-8s %-8s\n", "scenario", "detector", "recall", "fpr");
    for (size_t i = 0; i < bgpbs_report_scenario_count(report.get()); ++i) {
      const char* name = bgpbs_report_scenario_name(report.get(), i);
      for (const char* det : {"recon", "heartbeat", "hybrid"}) {
        double recall = 0.0, fpr = 0.0;
        bgpbs_report_metric(report.get(), name, det, "recall", &recall);
        bgpbs_report_metric(report.get(), name, det, "false_positive_rate", &fpr);
        std::printf("%-16s %-10s %-8s %-8s\n", name, det, fmt_rate(recall).c_str(),
                    fmt_rate(fpr).c_str());
      }
    }
    std::printf("wrote %s/report.json\n", eval_out.c_str());
    return 0;
  }
  return BGPBS_E_INVALID;
}
