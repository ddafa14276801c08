#include "bgpbs/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "bgpbs/error.hpp"
#include "text.hpp"

namespace bgpbs {

void FeatureSchema::validate() const {
  if (feature_names.empty()) fail(ErrorKind::schema, "schema has no features");
  if (bin_width_seconds <= 0) fail(ErrorKind::schema, "bin width must be positive");
  std::set<std::string> seen;
  for (const auto& name : feature_names) {
    if (name.empty()) fail(ErrorKind::schema, "empty feature name");
    if (name == "bin_index" || name == "label")
      fail(ErrorKind::schema, "reserved column name used as feature: " + name);
    if (!seen.insert(name).second) fail(ErrorKind::schema, "duplicate feature name: " + name);
  }
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < feature_names.size(); ++i)
    if (feature_names[i] == name) return i;
  return std::nullopt;
}

FeatureSeries::FeatureSeries(FeatureSchema schema, std::vector<FeatureRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  schema_.validate();
  const auto d = schema_.dimension();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.values.size() != d)
      fail(ErrorKind::invalid_input, "record " + std::to_string(i) + " has " +
                                         std::to_string(r.values.size()) + " values, schema has " +
                                         std::to_string(d));
    for (double v : r.values)
      if (!std::isfinite(v))
        fail(ErrorKind::invalid_input, "record " + std::to_string(i) + " has a non-finite value");
    if (i > 0 && r.bin_index != records_[i - 1].bin_index + 1)
      fail(ErrorKind::invalid_input,
           "bin_index must be consecutive; record " + std::to_string(i) + " has " +
               std::to_string(r.bin_index) + " after " + std::to_string(records_[i - 1].bin_index));
  }
}

std::size_t FeatureSeries::count_anomalous() const noexcept {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.anomalous() ? 1 : 0;
  return n;
}

std::vector<double> FeatureSeries::column(std::size_t f) const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.values.at(f));
  return out;
}

FeatureSeries load_series(std::istream& in, const std::optional<FeatureSchema>& expected) {
  std::string line;
  std::size_t line_no = 0;

  // Header: first non-blank line.
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!text::trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) fail(ErrorKind::empty_input, "input is empty");

  std::string_view header_line = line;
  if (header_line.size() >= 3 && header_line.substr(0, 3) == "\xEF\xBB\xBF")
    header_line.remove_prefix(3);
  auto header = text::split_fields(header_line);
  const bool has_index = !header.empty() && header.front() == "bin_index";
  const bool has_label = header.size() > (has_index ? 1u : 0u) && header.back() == "label";

  FeatureSchema schema;
  for (std::size_t c = has_index ? 1 : 0; c < header.size() - (has_label ? 1 : 0); ++c)
    schema.feature_names.emplace_back(header[c]);
  if (expected) {
    schema.bin_width_seconds = expected->bin_width_seconds;
    if (schema.feature_names != expected->feature_names)
      fail(ErrorKind::schema, "CSV header does not match the expected schema");
  }
  schema.validate();

  const std::size_t d = schema.dimension();
  const std::size_t ncols = header.size();
  std::vector<FeatureRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto fields = text::split_fields(line);
    const std::string where = "row " + std::to_string(line_no);
    if (fields.size() != ncols)
      fail(ErrorKind::parse, where + ": expected " + std::to_string(ncols) + " columns, found " +
                                 std::to_string(fields.size()));
    FeatureRecord rec;
    std::size_t c = 0;
    if (has_index) {
      auto idx = text::parse_uint(fields[c++]);
      if (!idx) fail(ErrorKind::parse, where + ": bin_index is not a non-negative integer");
      rec.bin_index = *idx;
    } else {
      rec.bin_index = records.size();
    }
    rec.values.reserve(d);
    for (std::size_t f = 0; f < d; ++f, ++c) {
      auto v = text::parse_double(fields[c]);
      if (!v || !std::isfinite(*v))
        fail(ErrorKind::parse, where + ": value '" + std::string(fields[c]) + "' in column " +
                                   schema.feature_names[f] + " is not a finite number");
      rec.values.push_back(*v);
    }
    if (has_label) {
      const auto lab = fields[c];
      if (lab == "0") {
        rec.label = Label::benign;
      } else if (lab == "1") {
        rec.label = Label::anomalous;
      } else {
        fail(ErrorKind::parse, where + ": label must be 0 or 1");
      }
    }
    if (!records.empty() && rec.bin_index != records.back().bin_index + 1)
      fail(ErrorKind::parse, where + ": bin_index is not consecutive");
    records.push_back(std::move(rec));
  }
  if (in.bad()) fail(ErrorKind::io, "read failure");
  if (records.empty()) fail(ErrorKind::empty_input, "input has a header but no data rows");
  return FeatureSeries(std::move(schema), std::move(records));
}

FeatureSeries load_series(const std::filesystem::path& path,
                          const std::optional<FeatureSchema>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  try {
    return load_series(in, expected);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_series(const FeatureSeries& series, std::ostream& out) {
  out << "bin_index";
  for (const auto& name : series.schema().feature_names) out << ',' << name;
  out << ",label\n";
  for (const auto& r : series.records()) {
    out << r.bin_index;
    for (double v : r.values) out << ',' << text::format_double(v);
    out << ',' << (r.anomalous() ? '1' : '0') << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failure");
}

void save_series(const FeatureSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  save_series(series, out);
  out.flush();
  if (!out) fail(ErrorKind::io, "write failure on " + path.string());
}

std::pair<FeatureSeries, FeatureSeries> split_chronological(const FeatureSeries& series,
                                                            double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(ErrorKind::invalid_input, "train fraction must lie in (0, 1)");
  if (series.empty()) fail(ErrorKind::invalid_input, "cannot split an empty series");
  if (!series.all_benign())
    fail(ErrorKind::invalid_input, "chronological split requires an all-benign series");
  const auto n = series.size();
  const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  if (cut == 0 || cut >= n)
    fail(ErrorKind::split, "split of " + std::to_string(n) + " records at fraction " +
                               text::format_double(train_fraction) + " leaves one side empty");
  const auto& recs = series.records();
  std::vector<FeatureRecord> head(recs.begin(), recs.begin() + static_cast<std::ptrdiff_t>(cut));
  std::vector<FeatureRecord> tail(recs.begin() + static_cast<std::ptrdiff_t>(cut), recs.end());
  return {FeatureSeries(series.schema(), std::move(head)),
          FeatureSeries(series.schema(), std::move(tail))};
}

}  // namespace bgpbs
