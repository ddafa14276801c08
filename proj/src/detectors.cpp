#include "bgpbs/detectors.hpp"

#include <algorithm>
#include <cmath>

#include "bgpbs/error.hpp"

namespace bgpbs {

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) fail(ErrorKind::invalid_input, "percentile of an empty list");
  if (!(percentile > 0.0 && percentile <= 100.0))
    fail(ErrorKind::invalid_input, "percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  // p*n is exact for integral p, which keeps ceil(99*100/100) at 99.
  const double rank = std::ceil(percentile * static_cast<double>(n) / 100.0);
  const auto r = std::clamp<std::size_t>(static_cast<std::size_t>(rank), 1, n);
  return values[r - 1];
}

Threshold calibrate_threshold(std::span<const double> validation_errors, double percentile) {
  if (validation_errors.empty())
    fail(ErrorKind::invalid_input, "threshold calibration needs at least one error");
  for (double e : validation_errors)
    if (!(e >= 0.0) || !std::isfinite(e))
      fail(ErrorKind::invalid_input, "calibration errors must be finite and non-negative");
  Threshold t;
  t.percentile = percentile;
  t.n_calibration = validation_errors.size();
  t.value = nearest_rank_percentile({validation_errors.begin(), validation_errors.end()},
                                    percentile);
  return t;
}

std::vector<AnomalyScore> flag_errors(std::span<const double> errors, const Threshold& threshold,
                                      std::span<const SequenceWindow> windows) {
  if (errors.size() != windows.size())
    fail(ErrorKind::invalid_input, "error count does not match window count");
  std::vector<AnomalyScore> out;
  out.reserve(errors.size());
  for (std::size_t k = 0; k < errors.size(); ++k)
    out.push_back({windows[k].start_bin, errors[k], threshold.exceeds(errors[k]), windows[k].label});
  return out;
}

std::vector<AnomalyScore> score_windows(const AutoencoderParams& params, const Threshold& threshold,
                                        std::span<const SequenceWindow> windows) {
  const auto errors = reconstruction_errors(params, windows);
  return flag_errors(errors, threshold, windows);
}

double HeartbeatDetector::effective_floor() const noexcept {
  return std::max(floor(), epsilon_floor);
}

std::vector<double> summed_volume(const FeatureSeries& series,
                                  std::span<const std::size_t> features) {
  for (auto f : features)
    if (f >= series.dimension())
      fail(ErrorKind::invalid_input, "volume feature index " + std::to_string(f) +
                                         " outside a schema of dimension " +
                                         std::to_string(series.dimension()));
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& r : series.records()) {
    double v = 0.0;
    for (auto f : features) v += r.values[f];
    out.push_back(v);
  }
  return out;
}

HeartbeatDetector heartbeat_fit(const FeatureSeries& benign, std::vector<std::size_t> volume_features,
                                double k, std::size_t persistence, double epsilon_floor) {
  if (benign.empty()) fail(ErrorKind::invalid_input, "heartbeat baseline series is empty");
  if (!benign.all_benign())
    fail(ErrorKind::invalid_input, "heartbeat baseline contains anomalous records");
  if (volume_features.empty())
    fail(ErrorKind::invalid_input, "heartbeat needs at least one volume feature");
  if (!(k > 0.0) || persistence == 0 || !(epsilon_floor > 0.0))
    fail(ErrorKind::invalid_input, "heartbeat needs k > 0, N >= 1 and a positive floor guard");

  const auto volume = summed_volume(benign, volume_features);
  const auto n = static_cast<double>(volume.size());
  double mean = 0.0;
  for (double v : volume) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : volume) ss += (v - mean) * (v - mean);

  HeartbeatDetector d;
  d.volume_features = std::move(volume_features);
  d.mean = mean;
  d.stddev = std::sqrt(ss / n);
  d.k = k;
  d.persistence = persistence;
  d.epsilon_floor = epsilon_floor;
  return d;
}

std::vector<bool> heartbeat_score(const HeartbeatDetector& detector, const FeatureSeries& series) {
  const auto volume = summed_volume(series, detector.volume_features);
  const double floor = detector.effective_floor();
  std::vector<bool> alerts(volume.size(), false);
  std::size_t run = 0;
  for (std::size_t t = 0; t < volume.size(); ++t) {
    run = volume[t] < floor ? run + 1 : 0;
    alerts[t] = run >= detector.persistence;
  }
  return alerts;
}

CusumParams default_cusum(const HeartbeatDetector& heartbeat) {
  const double sigma = heartbeat.stddev > 0.0 ? heartbeat.stddev : heartbeat.epsilon_floor;
  return {heartbeat.mean, sigma, 8.0 * sigma};
}

std::vector<std::size_t> cusum_downward(std::span<const double> volumes, double reference,
                                        double slack, double decision) {
  if (!(decision > 0.0)) fail(ErrorKind::invalid_input, "CUSUM decision interval must be > 0");
  if (!(slack >= 0.0)) fail(ErrorKind::invalid_input, "CUSUM slack must be >= 0");
  std::vector<std::size_t> changes;
  double s = 0.0;
  for (std::size_t t = 0; t < volumes.size(); ++t) {
    s = std::max(0.0, s + (reference - slack - volumes[t]));
    if (s > decision) {
      changes.push_back(t);
      s = 0.0;
    }
  }
  return changes;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::normal: return "normal";
    case Verdict::type1: return "type1";
    case Verdict::type2: return "type2";
  }
  return "?";
}

std::vector<bool> window_alerts(const std::vector<bool>& bin_alerts, std::size_t window,
                                std::size_t stride) {
  const auto count = window_count(bin_alerts.size(), window, stride);
  std::vector<bool> out(count, false);
  const auto need = majority_count(window);
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t hits = 0;
    for (std::size_t t = k * stride; t < k * stride + window; ++t) hits += bin_alerts[t] ? 1 : 0;
    out[k] = hits >= need;
  }
  return out;
}

std::vector<HybridVerdict> hybrid_classify(std::span<const AnomalyScore> recon,
                                           const std::vector<bool>& heartbeat_alerts,
                                           std::size_t window, std::size_t stride) {
  if (window < 2 || stride < 1) fail(ErrorKind::invalid_input, "invalid window/stride");
  const auto type2 = window_alerts(heartbeat_alerts, window, stride);
  if (type2.size() != recon.size())
    fail(ErrorKind::invalid_input, std::to_string(recon.size()) + " scores but " +
                                       std::to_string(type2.size()) +
                                       " windows implied by the heartbeat alerts");
  std::vector<HybridVerdict> out;
  out.reserve(recon.size());
  for (std::size_t k = 0; k < recon.size(); ++k) {
    HybridVerdict v;
    v.type1_flag = recon[k].flagged;
    v.type2_flag = type2[k];
    v.verdict = combine_flags(v.type1_flag, v.type2_flag);
    out.push_back(v);
  }
  return out;
}

}  // namespace bgpbs
