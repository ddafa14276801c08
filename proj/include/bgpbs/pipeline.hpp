#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "bgpbs/dataset.hpp"

namespace bgpbs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Per-feature z-score scaling fitted on benign training data.
///
/// `stds` holds the effective divisor: a feature that was constant during
/// fitting has its zero population std replaced by 1, so it maps to 0.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stds;
  std::size_t fitted_on = 0;

  std::size_t dimension() const noexcept { return means.size(); }
  bool operator==(const Standardizer&) const = default;
};

Standardizer fit_standardizer(const FeatureSeries& train);

// value' = (value - mean) / std; labels and bin indices preserved.
FeatureSeries transform(const Standardizer& s, const FeatureSeries& series);

struct SequenceWindow {
  std::uint64_t start_bin = 0;  // bin_index of the first timestep
  Matrix values;                // W x D
  Label label = Label::benign;

  bool anomalous() const noexcept { return label == Label::anomalous; }
};

// floor((n - W) / stride) + 1 for n >= W, otherwise 0.
std::size_t window_count(std::size_t n, std::size_t window, std::size_t stride) noexcept;

// Smallest number of anomalous timesteps that makes a window anomalous.
constexpr std::size_t majority_count(std::size_t window) noexcept { return (window + 1) / 2; }

std::vector<SequenceWindow> make_windows(const FeatureSeries& series, std::size_t window,
                                         std::size_t stride);

}  // namespace bgpbs
