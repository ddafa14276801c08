#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bgpbs {

enum class Label : std::uint8_t { benign = 0, anomalous = 1 };

struct FeatureSchema {
  std::vector<std::string> feature_names;
  std::int64_t bin_width_seconds = 60;  // metadata only

  std::size_t dimension() const noexcept { return feature_names.size(); }

  // Throws schema error on empty/duplicate names or non-positive bin width.
  void validate() const;

  std::optional<std::size_t> index_of(const std::string& name) const;

  bool operator==(const FeatureSchema&) const = default;
};

struct FeatureRecord {
  std::uint64_t bin_index = 0;
  std::vector<double> values;
  Label label = Label::benign;

  bool anomalous() const noexcept { return label == Label::anomalous; }
  bool operator==(const FeatureRecord&) const = default;
};

/// Time-ordered, gap-free series of feature vectors sharing one schema.
///
/// Construction validates every invariant: record dimensions match the
/// schema, values are finite, and bin indices are consecutive integers.
class FeatureSeries {
 public:
  FeatureSeries() = default;
  FeatureSeries(FeatureSchema schema, std::vector<FeatureRecord> records);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<FeatureRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t dimension() const noexcept { return schema_.dimension(); }
  const FeatureRecord& operator[](std::size_t i) const { return records_[i]; }

  std::size_t count_anomalous() const noexcept;
  bool all_benign() const noexcept { return count_anomalous() == 0; }

  // Column f as a contiguous vector.
  std::vector<double> column(std::size_t f) const;

  bool operator==(const FeatureSeries&) const = default;

 private:
  FeatureSchema schema_;
  std::vector<FeatureRecord> records_;
};

// CSV header: [bin_index,]<feature_1>,...,<feature_D>[,label]
FeatureSeries load_series(std::istream& in,
                          const std::optional<FeatureSchema>& expected = std::nullopt);
FeatureSeries load_series(const std::filesystem::path& path,
                          const std::optional<FeatureSchema>& expected = std::nullopt);

// Always writes bin_index and label columns, LF line endings, shortest
// round-trip decimal representation.
void save_series(const FeatureSeries& series, std::ostream& out);
void save_series(const FeatureSeries& series, const std::filesystem::path& path);

// First floor(train_fraction * n) records, then the remainder.
std::pair<FeatureSeries, FeatureSeries> split_chronological(const FeatureSeries& series,
                                                            double train_fraction);

}  // namespace bgpbs
