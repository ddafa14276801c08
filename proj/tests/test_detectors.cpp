#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bgpbs/detectors.hpp"
#include "bgpbs/error.hpp"
#include "bgpbs/synthgen.hpp"

using namespace bgpbs;

namespace {

FeatureSeries volume_series(const std::vector<double>& v) {
  std::vector<FeatureRecord> recs(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    recs[i].bin_index = i;
    recs[i].values = {v[i], 0.0, 1.0};
  }
  return FeatureSeries(FeatureSchema{{"ann", "wd", "other"}}, recs);
}

std::vector<double> repeat(double v, std::size_t n) { return std::vector<double>(n, v); }

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<SequenceWindow> blank_windows(std::size_t n) {
  std::vector<SequenceWindow> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i].start_bin = i;
    w[i].values = Matrix::Zero(2, 1);
  }
  return w;
}

}  // namespace

TEST_CASE("nearest rank percentile examples") {
  std::vector<double> hundred(100);
  std::iota(hundred.begin(), hundred.end(), 1.0);
  std::shuffle(hundred.begin(), hundred.end(), std::mt19937_64(1));
  CHECK(nearest_rank_percentile(hundred, 99.0) == 99.0);
  CHECK(nearest_rank_percentile(hundred, 100.0) == 100.0);
  CHECK(nearest_rank_percentile(hundred, 0.5) == 1.0);
  CHECK(nearest_rank_percentile(hundred, 50.0) == 50.0);
  CHECK(nearest_rank_percentile(hundred, 50.5) == 51.0);
  for (double p : {1.0, 37.0, 99.0, 100.0}) CHECK(nearest_rank_percentile(repeat(0.5, 17), p) == 0.5);
  CHECK(nearest_rank_percentile({3.0}, 99.0) == 3.0);
  CHECK_THROWS_AS(nearest_rank_percentile({}, 99.0), Error);
  CHECK_THROWS_AS(nearest_rank_percentile({1.0}, 0.0), Error);
  CHECK_THROWS_AS(nearest_rank_percentile({1.0}, 101.0), Error);
}

TEST_CASE("percentile is monotone in p") {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng() % 300);
    for (auto& x : v) x = e(rng);
    double prev = -1.0;
    for (double p = 0.25; p <= 100.0; p += 0.25) {
      const double q = nearest_rank_percentile(v, p);
      CHECK(q >= prev);
      prev = q;
    }
  }
}

TEST_CASE("calibration records its inputs") {
  const std::vector<double> errs = {0.3, 0.1, 0.2};
  const auto t = calibrate_threshold(errs, 99.0);
  CHECK(t.value == 0.3);
  CHECK(t.n_calibration == 3);
  CHECK(t.percentile == 99.0);
  CHECK_THROWS_AS(calibrate_threshold(std::vector<double>{}, 99.0), Error);
  CHECK_THROWS_AS(calibrate_threshold(std::vector<double>{-1.0}, 99.0), Error);
}

TEST_CASE("flagging is strict") {
  Threshold t{0.5, 99.0, 10};
  CHECK(!t.exceeds(0.5));
  CHECK(t.exceeds(std::nextafter(0.5, 1.0)));
  const std::vector<double> errs = {0.5, 0.6, 0.4};
  const auto scores = flag_errors(errs, t, blank_windows(3));
  CHECK(!scores[0].flagged);
  CHECK(scores[1].flagged);
  CHECK(!scores[2].flagged);
  CHECK(scores[1].start_bin == 1);
  CHECK_THROWS_AS(flag_errors(errs, t, blank_windows(2)), Error);
}

TEST_CASE("an exact reconstruction scores zero") {
  const AutoencoderDims dims{3, 4, 2};
  auto p = AutoencoderParams::zeros(dims);
  p.projection_bias << 0.25, -1.0, 2.0;
  SequenceWindow w;
  w.values = p.projection_bias.transpose().replicate(4, 1);
  const std::vector<SequenceWindow> ws = {w};
  for (double thr : {1e-12, 0.5, 3.0}) {
    const auto s = score_windows(p, Threshold{thr, 99.0, 1}, ws);
    CHECK(s[0].error == 0.0);
    CHECK(!s[0].flagged);
  }
  SequenceWindow bad;
  bad.values = Matrix::Zero(4, 2);
  CHECK_THROWS_AS(score_windows(p, Threshold{}, std::vector<SequenceWindow>{bad}), Error);
}

TEST_CASE("heartbeat baseline statistics") {
  std::vector<double> alt;
  for (int i = 0; i < 40; ++i) alt.push_back(i % 2 ? 110.0 : 90.0);
  const auto d = heartbeat_fit(volume_series(alt), {0}, 3.0, 3);
  CHECK(d.mean == 100.0);
  CHECK(d.stddev == 10.0);
  CHECK(d.floor() == 70.0);

  const auto c = heartbeat_fit(volume_series(repeat(100.0, 30)), {0, 1}, 2.0, 3);
  CHECK(c.mean == 100.0);
  CHECK(c.stddev == 0.0);
  CHECK(c.floor() == 100.0);
  CHECK(heartbeat_fit(volume_series(repeat(100.0, 30)), {0}, 7.5, 3).floor() == 100.0);

  auto recs = volume_series(alt).records();
  recs[5].label = Label::anomalous;
  CHECK_THROWS_AS(heartbeat_fit(FeatureSeries(volume_series(alt).schema(), recs), {0}, 3.0, 3), Error);
  CHECK_THROWS_AS(heartbeat_fit(volume_series(alt), {}, 3.0, 3), Error);
  CHECK_THROWS_AS(heartbeat_fit(volume_series(alt), {9}, 3.0, 3), Error);
}

TEST_CASE("heartbeat persistence") {
  HeartbeatDetector d;
  d.volume_features = {0};
  d.mean = 100.0;
  d.stddev = 10.0;
  const auto alerts = heartbeat_score(d, volume_series(concat(repeat(100.0, 50), repeat(0.0, 20))));
  for (std::size_t t = 0; t < 52; ++t) CHECK(!alerts[t]);
  for (std::size_t t = 52; t < 70; ++t) CHECK(alerts[t]);

  auto dip = repeat(100.0, 30);
  dip[12] = 0.0;
  const auto none = heartbeat_score(d, volume_series(dip));
  CHECK(std::none_of(none.begin(), none.end(), [](bool b) { return b; }));

  auto recover = concat(concat(repeat(100.0, 5), repeat(0.0, 4)), repeat(100.0, 5));
  const auto r = heartbeat_score(d, volume_series(recover));
  CHECK(r[7]);
  CHECK(r[8]);
  CHECK(!r[9]);
}

TEST_CASE("the epsilon floor guards a collapsed baseline") {
  HeartbeatDetector d;
  d.volume_features = {0};
  d.mean = 2.0;
  d.stddev = 5.0;
  CHECK(d.effective_floor() == 1.0);
  const auto a = heartbeat_score(d, volume_series({0.5, 0.5, 0.5, 1.0, 1.0, 1.0}));
  CHECK(a == std::vector<bool>{false, false, true, false, false, false});
}

TEST_CASE("heartbeat flags an injected silence from start + N - 1") {
  SuiteConfig cfg;
  cfg.lengths = {3000, 1000, 1000};
  const auto suite = make_scenario_suite(cfg);
  const auto* sl = suite.find("signal_loss");
  REQUIRE(sl != nullptr);
  const auto d = heartbeat_fit(suite.benign_train, {0, 1}, 3.0, 3);
  const auto alerts = heartbeat_score(d, sl->series);
  const auto start = sl->spec.start_bin, end = start + sl->spec.duration_bins;
  for (std::size_t t = start + 2; t < end; ++t) CHECK(alerts[t]);
  const auto benign = heartbeat_score(d, suite.benign_test);
  const auto hits = std::count(benign.begin(), benign.end(), true);
  CHECK(static_cast<double>(hits) / static_cast<double>(benign.size()) <= 0.01);
}

TEST_CASE("cusum recurrence") {
  const auto v = concat(repeat(100.0, 50), repeat(0.0, 10));
  const auto changes = cusum_downward(v, 100.0, 10.0, 150.0);
  REQUIRE(!changes.empty());
  CHECK(changes.front() == 51);
  CHECK(changes == std::vector<std::size_t>{51, 53, 55, 57, 59});

  CHECK(cusum_downward(repeat(100.0, 500), 100.0, 0.5, 1.0).empty());
  CHECK(cusum_downward(std::vector<double>{}, 1.0, 0.0, 1.0).empty());
  CHECK_THROWS_AS(cusum_downward(v, 100.0, 10.0, 0.0), Error);
  CHECK_THROWS_AS(cusum_downward(v, 100.0, -1.0, 1.0), Error);
}

TEST_CASE("cusum is silent while volume stays above reference minus slack") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1000);
    for (auto& x : v) x = 90.0 + u(rng);
    CHECK(cusum_downward(v, 100.0, 10.0, 1e-6).empty());
  }
}

TEST_CASE("cusum false alarms on benign volume") {
  const auto m = default_benign_model(77);
  const auto s = generate_benign(m, 10000, m.schema());
  const std::vector<std::size_t> vf = {0, 1};
  const auto d = heartbeat_fit(s, vf, 3.0, 3);
  const auto p = default_cusum(d);
  CHECK(p.slack == d.stddev);
  CHECK(p.decision == 8.0 * d.stddev);
  const auto vol = summed_volume(s, vf);
  CHECK(cusum_downward(vol, p.reference, p.slack, p.decision).size() <= 2);

  std::mt19937_64 rng(12);
  std::poisson_distribution<int> pois(6.0);
  std::vector<double> iid(10000);
  for (auto& x : iid) x = pois(rng);
  const double sd = std::sqrt(6.0);
  CHECK(cusum_downward(iid, 6.0, sd, 8.0 * sd).size() <= 2);

  HeartbeatDetector flat;
  flat.mean = 5.0;
  const auto f = default_cusum(flat);
  CHECK(f.slack == 1.0);
  CHECK(f.decision == 8.0);
}

TEST_CASE("hybrid verdict precedence") {
  CHECK(combine_flags(true, false) == Verdict::type1);
  CHECK(combine_flags(false, true) == Verdict::type2);
  CHECK(combine_flags(true, true) == Verdict::type2);
  CHECK(combine_flags(false, false) == Verdict::normal);

  // bins 0..5, W=4 stride 1: windows 0,1,2
  std::vector<AnomalyScore> recon(3);
  recon[0].flagged = true;
  recon[1].error = 0.0;
  const std::vector<bool> alerts = {false, false, false, false, true, true};
  const auto v = hybrid_classify(recon, alerts, 4, 1);
  CHECK(v[0].verdict == Verdict::type1);
  CHECK(v[1].verdict == Verdict::normal);
  CHECK(v[2].verdict == Verdict::type2);
  CHECK(!v[1].alert());
  CHECK(v[2].alert());
  CHECK_THROWS_AS(hybrid_classify(std::vector<AnomalyScore>(2), alerts, 4, 1), Error);
}

TEST_CASE("hybrid verdicts are a function of the flags") {
  std::mt19937_64 rng(31);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t w = 2 + rng() % 8, stride = 1 + rng() % 3, n = w + rng() % 40;
    std::vector<bool> alerts(n);
    for (std::size_t i = 0; i < n; ++i) alerts[i] = coin(rng);
    std::vector<AnomalyScore> recon(window_count(n, w, stride));
    for (auto& r : recon) {
      r.flagged = coin(rng);
      r.error = std::uniform_real_distribution<double>(0, 10)(rng);
    }
    const auto v = hybrid_classify(recon, alerts, w, stride);
    REQUIRE(v.size() == recon.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
      std::size_t hits = 0;
      for (std::size_t t = k * stride; t < k * stride + w; ++t) hits += alerts[t];
      const bool t2 = hits >= (w + 1) / 2;
      CHECK(v[k].type2_flag == t2);
      CHECK(v[k].type1_flag == recon[k].flagged);
      CHECK(v[k].verdict == (t2 ? Verdict::type2 : recon[k].flagged ? Verdict::type1 : Verdict::normal));
    }
  }
}
