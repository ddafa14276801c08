#include "bgpbs/pipeline.hpp"

#include <cmath>

#include "bgpbs/error.hpp"

namespace bgpbs {

Standardizer fit_standardizer(const FeatureSeries& train) {
  if (train.empty()) fail(ErrorKind::invalid_input, "cannot fit a standardizer on an empty series");
  if (!train.all_benign())
    fail(ErrorKind::invalid_input, "standardizer fit data contains anomalous records");
  const auto d = train.dimension();
  const auto n = static_cast<double>(train.size());
  Standardizer s;
  s.fitted_on = train.size();
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  for (const auto& r : train.records())
    for (std::size_t f = 0; f < d; ++f) s.means[f] += r.values[f];
  for (auto& m : s.means) m /= n;
  for (const auto& r : train.records())
    for (std::size_t f = 0; f < d; ++f) {
      const double dv = r.values[f] - s.means[f];
      s.stds[f] += dv * dv;
    }
  for (auto& sd : s.stds) {
    sd = std::sqrt(sd / n);
    if (sd == 0.0) sd = 1.0;
  }
  return s;
}

FeatureSeries transform(const Standardizer& s, const FeatureSeries& series) {
  if (s.dimension() != series.dimension() || s.stds.size() != s.means.size())
    fail(ErrorKind::invalid_input, "standardizer dimension " + std::to_string(s.dimension()) +
                                       " does not match series dimension " +
                                       std::to_string(series.dimension()));
  std::vector<FeatureRecord> out = series.records();
  for (auto& r : out)
    for (std::size_t f = 0; f < r.values.size(); ++f)
      r.values[f] = (r.values[f] - s.means[f]) / s.stds[f];
  return FeatureSeries(series.schema(), std::move(out));
}

std::size_t window_count(std::size_t n, std::size_t window, std::size_t stride) noexcept {
  if (window == 0 || stride == 0 || n < window) return 0;
  return (n - window) / stride + 1;
}

std::vector<SequenceWindow> make_windows(const FeatureSeries& series, std::size_t window,
                                         std::size_t stride) {
  if (window < 2) fail(ErrorKind::invalid_input, "window length must be >= 2");
  if (stride < 1) fail(ErrorKind::invalid_input, "stride must be >= 1");
  const auto count = window_count(series.size(), window, stride);
  const auto d = series.dimension();
  std::vector<SequenceWindow> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto start = k * stride;
    SequenceWindow w;
    w.start_bin = series[start].bin_index;
    w.values.resize(static_cast<Eigen::Index>(window), static_cast<Eigen::Index>(d));
    std::size_t anomalous = 0;
    for (std::size_t t = 0; t < window; ++t) {
      const auto& rec = series[start + t];
      anomalous += rec.anomalous() ? 1 : 0;
      for (std::size_t f = 0; f < d; ++f)
        w.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(f)) = rec.values[f];
    }
    w.label = anomalous >= majority_count(window) ? Label::anomalous : Label::benign;
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace bgpbs
