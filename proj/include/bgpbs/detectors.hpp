#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bgpbs/autoencoder.hpp"
#include "bgpbs/dataset.hpp"
#include "bgpbs/pipeline.hpp"

namespace bgpbs {

struct Threshold {
  double value = 0.0;
  double percentile = 99.0;
  std::size_t n_calibration = 0;

  // Strictly greater: an error equal to the threshold is not an alert.
  bool exceeds(double error) const noexcept { return error > value; }
};

// Nearest-rank percentile: element at 1-based rank ceil(p/100 * n) of the
// ascending sort.
double nearest_rank_percentile(std::vector<double> values, double percentile);

Threshold calibrate_threshold(std::span<const double> validation_errors, double percentile);

struct AnomalyScore {
  std::uint64_t start_bin = 0;
  double error = 0.0;
  bool flagged = false;
  Label true_label = Label::benign;
};

std::vector<AnomalyScore> score_windows(const AutoencoderParams& params, const Threshold& threshold,
                                        std::span<const SequenceWindow> windows);

// Same as score_windows but from errors already computed for `windows`.
std::vector<AnomalyScore> flag_errors(std::span<const double> errors, const Threshold& threshold,
                                      std::span<const SequenceWindow> windows);

/// Signal-loss monitor on the summed raw volume of a set of count features.
///
/// A bin alerts once the volume has stayed below the floor for `persistence`
/// consecutive bins, and keeps alerting while it stays there.
struct HeartbeatDetector {
  std::vector<std::size_t> volume_features;
  double mean = 0.0;    // baseline volume
  double stddev = 0.0;  // population std of the baseline volume
  double k = 3.0;
  std::size_t persistence = 3;
  double epsilon_floor = 1.0;

  double floor() const noexcept { return mean - k * stddev; }
  double effective_floor() const noexcept;
};

std::vector<double> summed_volume(const FeatureSeries& series,
                                  std::span<const std::size_t> features);

HeartbeatDetector heartbeat_fit(const FeatureSeries& benign, std::vector<std::size_t> volume_features,
                                double k, std::size_t persistence, double epsilon_floor = 1.0);

std::vector<bool> heartbeat_score(const HeartbeatDetector& detector, const FeatureSeries& series);

struct CusumParams {
  double reference = 0.0;  // in-control mean
  double slack = 0.0;      // k_c
  double decision = 1.0;   // h
};

// Defaults derived from a fitted heartbeat baseline: reference = mean,
// slack = sigma, decision = 8 * sigma, with sigma floored at epsilon_floor
// so the decision interval stays positive on a constant baseline.
CusumParams default_cusum(const HeartbeatDetector& heartbeat);

// One-sided lower CUSUM. S_t = max(0, S_{t-1} + (reference - slack - v_t));
// records t whenever S_t > decision, then resets S to 0.
std::vector<std::size_t> cusum_downward(std::span<const double> volumes, double reference,
                                        double slack, double decision);

enum class Verdict { normal, type1, type2 };

const char* to_string(Verdict v) noexcept;

struct HybridVerdict {
  bool type1_flag = false;
  bool type2_flag = false;
  Verdict verdict = Verdict::normal;

  bool alert() const noexcept { return verdict != Verdict::normal; }
};

// Signal loss dominates: type2 > type1 > normal.
constexpr Verdict combine_flags(bool type1, bool type2) noexcept {
  return type2 ? Verdict::type2 : (type1 ? Verdict::type1 : Verdict::normal);
}

// Window i covers alerts [i*stride, i*stride + W); it is type2 when at least
// ceil(W/2) of those bins alert.
std::vector<bool> window_alerts(const std::vector<bool>& bin_alerts, std::size_t window,
                                std::size_t stride);

std::vector<HybridVerdict> hybrid_classify(std::span<const AnomalyScore> recon,
                                           const std::vector<bool>& heartbeat_alerts,
                                           std::size_t window, std::size_t stride);

}  // namespace bgpbs
