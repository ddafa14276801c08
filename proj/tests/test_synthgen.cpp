#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "bgpbs/error.hpp"
#include "bgpbs/synthgen.hpp"

using namespace bgpbs;

namespace {

double mean_of(const FeatureSeries& s, std::size_t f, std::size_t from, std::size_t to) {
  double sum = 0.0;
  for (std::size_t i = from; i < to; ++i) sum += s[i].values[f];
  return sum / static_cast<double>(to - from);
}

double std_of(const FeatureSeries& s, std::size_t f, std::size_t from, std::size_t to) {
  const double m = mean_of(s, f, from, to);
  double ss = 0.0;
  for (std::size_t i = from; i < to; ++i) ss += (s[i].values[f] - m) * (s[i].values[f] - m);
  return std::sqrt(ss / static_cast<double>(to - from));
}

std::string csv(const FeatureSeries& s) {
  std::ostringstream out;
  save_series(s, out);
  return out.str();
}

FeatureSeries benign(std::size_t n, std::uint64_t seed) {
  const auto m = default_benign_model(seed);
  return generate_benign(m, n, m.schema());
}

}  // namespace

TEST_CASE("default model has the eight documented features") {
  const auto m = default_benign_model();
  const auto s = m.schema();
  CHECK(s.feature_names == std::vector<std::string>{
                               "n_announcements", "n_withdrawals", "n_new_paths", "n_duplicates",
                               "avg_aspath_len", "max_aspath_len", "avg_edit_distance",
                               "max_edit_distance"});
  CHECK(m.count_features() == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("generation is deterministic in the seed") {
  CHECK(csv(benign(500, 9)) == csv(benign(500, 9)));
  CHECK(csv(benign(500, 9)) != csv(benign(500, 10)));
}

TEST_CASE("count means track their rates") {
  BenignModel m = default_benign_model(3);
  for (auto& f : m.features) {
    f.kind = FeatureKind::count;
    f.rate = 100.0;
  }
  const auto s = generate_benign(m, 10000, m.schema());
  for (std::size_t f = 0; f < s.dimension(); ++f) {
    const double mean = mean_of(s, f, 0, s.size());
    CHECK(std::abs(mean - 100.0) < 5.0);
  }
}

TEST_CASE("generated values are non-negative and no benign bin is all zero") {
  BenignModel m = default_benign_model(4);
  for (auto& f : m.features) {
    if (f.is_count()) f.rate = 0.05;
    else f.mean = -1.0;
  }
  const auto s = generate_benign(m, 3000, m.schema());
  for (const auto& r : s.records()) {
    bool any = false;
    for (double v : r.values) {
      CHECK(v >= 0.0);
      any = any || v != 0.0;
    }
    CHECK(any);
    CHECK(!r.anomalous());
  }
}

TEST_CASE("bad generation inputs") {
  const auto m = default_benign_model();
  CHECK_THROWS_AS(generate_benign(m, 0, m.schema()), Error);
  auto other = m.schema();
  other.feature_names[0] = "x";
  CHECK_THROWS_AS(generate_benign(m, 10, other), Error);
  auto bad = m;
  bad.features[0].rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = m;
  bad.diurnal_amplitude = 1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("signal loss zeroes exactly its window") {
  const auto m = default_benign_model(1);
  const auto base = benign(200, 1);
  ScenarioSpec spec{ScenarioKind::signal_loss, 50, 30, {}, 7, {}};
  const auto s = inject_scenario(base, spec, m);
  CHECK(s.count_anomalous() == 30);
  for (std::size_t i = 50; i < 80; ++i) {
    CHECK(s[i].anomalous());
    for (double v : s[i].values) CHECK(v == 0.0);
  }
  CHECK(s[49] == base[49]);
  CHECK(s[80] == base[80]);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i < 50 || i >= 80) CHECK(s[i] == base[i]);
}

TEST_CASE("storm inflates counts, paths and edit distances") {
  const auto m = default_benign_model(2);
  const auto base = benign(2000, 2);
  ScenarioSpec spec{ScenarioKind::storm, 800, 400, 25.0, 8, {}};
  const auto s = inject_scenario(base, spec, m);
  const double inside = mean_of(s, 0, 800, 1200);
  const double outside = (mean_of(s, 0, 0, 800) * 800 + mean_of(s, 0, 1200, 2000) * 800) / 1600;
  CHECK(inside >= 10.0 * outside);
  // path length shifted by at least 10, edit distance scaled by 5
  for (std::size_t i = 800; i < 1200; ++i) {
    CHECK(s[i].values[4] >= base[i].values[4] + 10.0);
    CHECK(s[i].values[4] <= base[i].values[4] + 30.0);
    CHECK(s[i].values[6] == doctest::Approx(5.0 * base[i].values[6]));
  }
  CHECK(s[799] == base[799]);
  CHECK(s[1200] == base[1200]);
}

TEST_CASE("storm counts are overdispersed") {
  const auto m = default_benign_model(5);
  const auto base = benign(6000, 5);
  const auto s = inject_scenario(base, {ScenarioKind::storm, 0, 6000, 25.0, 3, {}}, m);
  const double mean = mean_of(s, 0, 0, 6000);
  const double sd = std_of(s, 0, 0, 6000);
  CHECK(sd * sd > 1.5 * mean);
}

TEST_CASE("low deviation moves only its two targets") {
  const auto m = default_benign_model(6);
  const auto base = benign(4000, 6);
  ScenarioSpec spec{ScenarioKind::low_deviation, 1600, 800, {}, 9, {}};
  CHECK(low_deviation_targets(spec, m) == std::vector<std::size_t>{0, 1});
  const auto s = inject_scenario(base, spec, m);
  CHECK(s.count_anomalous() == 800);
  for (std::size_t f = 0; f < s.dimension(); ++f) {
    const double in = mean_of(s, f, 1600, 2400);
    const double out = mean_of(s, f, 0, 1600);
    const double sigma = std_of(s, f, 0, 1600);
    if (f < 2) {
      CHECK(in > out);
    } else {
      CHECK(std::abs(in - out) < 3.0 * sigma);
      for (std::size_t i = 1600; i < 2400; ++i) CHECK(s[i].values[f] == base[i].values[f]);
    }
  }
}

TEST_CASE("low deviation targets must be two count features") {
  const auto m = default_benign_model();
  const auto base = benign(100, 0);
  ScenarioSpec spec{ScenarioKind::low_deviation, 10, 10, {}, 1, {0}};
  CHECK_THROWS_AS(inject_scenario(base, spec, m), Error);
  spec.target_features = {0, 5};
  CHECK_THROWS_AS(inject_scenario(base, spec, m), Error);
  spec.target_features = {2, 3};
  const auto s = inject_scenario(base, spec, m);
  for (std::size_t i = 10; i < 20; ++i) {
    CHECK(s[i].values[0] == base[i].values[0]);
    CHECK(s[i].values[4] == base[i].values[4]);
  }
}

TEST_CASE("injection errors") {
  const auto m = default_benign_model();
  const auto base = benign(100, 0);
  CHECK_THROWS_AS(inject_scenario(base, {ScenarioKind::storm, 90, 11, {}, 0, {}}, m), Error);
  CHECK_THROWS_AS(inject_scenario(base, {ScenarioKind::storm, 10, 0, {}, 0, {}}, m), Error);
  CHECK_THROWS_AS(inject_scenario(base, {ScenarioKind::storm, 10, 5, -1.0, 0, {}}, m), Error);
  const auto once = inject_scenario(base, {ScenarioKind::storm, 10, 5, {}, 0, {}}, m);
  CHECK_THROWS_AS(inject_scenario(once, {ScenarioKind::signal_loss, 50, 5, {}, 0, {}}, m), Error);
  CHECK_NOTHROW(inject_scenario(base, {ScenarioKind::signal_loss, 90, 10, {}, 0, {}}, m));
}

TEST_CASE("default suite") {
  SuiteConfig cfg;
  cfg.lengths = {1000, 500, 500};
  const auto suite = make_scenario_suite(cfg);
  REQUIRE(suite.scenarios.size() == 3);
  CHECK(suite.benign_train.size() == 1000);
  CHECK(suite.benign_test.size() == 500);
  CHECK(suite.benign_train.all_benign());
  CHECK(suite.benign_test.count_anomalous() == 0);
  for (const char* name : {"storm", "signal_loss", "low_deviation"}) {
    const auto* sc = suite.find(name);
    REQUIRE(sc != nullptr);
    CHECK(sc->series.size() == 500);
    CHECK(sc->spec.duration_bins == 100);
    CHECK(sc->spec.start_bin == 200);
    CHECK(sc->series.count_anomalous() == sc->spec.duration_bins);
    for (std::size_t i = 0; i < sc->series.size(); ++i) {
      const bool inside = i >= sc->spec.start_bin && i < sc->spec.start_bin + sc->spec.duration_bins;
      CHECK(sc->series[i].anomalous() == inside);
    }
    CHECK(sc->series.schema() == suite.benign_train.schema());
  }

  const auto again = make_scenario_suite(cfg);
  CHECK(csv(again.benign_train) == csv(suite.benign_train));
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(csv(again.scenarios[k].series) == csv(suite.scenarios[k].series));

  cfg.seed = 43;
  CHECK(csv(make_scenario_suite(cfg).benign_train) != csv(suite.benign_train));
}

TEST_CASE("derived seeds differ across streams") {
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}
