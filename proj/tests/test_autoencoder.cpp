#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bgpbs/autoencoder.hpp"
#include "bgpbs/error.hpp"
#include "gradient_check.hpp"
#include "reference_lstm.hpp"

using namespace bgpbs;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

AutoencoderParams random_params(std::mt19937_64& rng, const AutoencoderDims& dims, double scale) {
  auto p = AutoencoderParams::zeros(dims);
  for_each_tensor(
      [&](auto& t) {
        const Matrix r = random_matrix(rng, t.rows(), t.cols(), scale);
        t = r;
      },
      p);
  return p;
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

SequenceWindow benign_window(const Matrix& m) {
  SequenceWindow w;
  w.values = m;
  return w;
}

}  // namespace

TEST_CASE("lstm_step with zero parameters keeps a zero state") {
  const auto cell = LstmCellParams::zeros(3, 4);
  const Vector x = Vector::Constant(3, 2.5);
  const auto s = lstm_step(cell, x, Vector::Zero(4), Vector::Zero(4));
  CHECK(s.h.isZero(0.0));
  CHECK(s.c.isZero(0.0));
}

TEST_CASE("lstm_step hidden output stays strictly inside (-1, 1)") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    LstmCellParams cell{random_matrix(rng, 20, 3, 3.0), random_matrix(rng, 20, 5, 3.0),
                        random_matrix(rng, 20, 1, 3.0).col(0)};
    const Vector x = random_matrix(rng, 3, 1, 5.0).col(0);
    const Vector h = random_matrix(rng, 5, 1, 1.0).col(0);
    const Vector c = random_matrix(rng, 5, 1, 2.0).col(0);
    const auto s = lstm_step(cell, x, h, c);
    CHECK(s.h.cwiseAbs().maxCoeff() < 1.0);
    CHECK(s.c.allFinite());
  }
}

TEST_CASE("lstm_step rejects mismatched shapes") {
  const auto cell = LstmCellParams::zeros(3, 4);
  CHECK_THROWS_AS(lstm_step(cell, Vector::Zero(2), Vector::Zero(4), Vector::Zero(4)), Error);
  CHECK_THROWS_AS(lstm_step(cell, Vector::Zero(3), Vector::Zero(3), Vector::Zero(4)), Error);
}

TEST_CASE("lstm cell backward matches central finite differences") {
  std::mt19937_64 rng(5);
  const Eigen::Index D = 3, H = 4;
  LstmCellParams cell{random_matrix(rng, 4 * H, D, 0.7), random_matrix(rng, 4 * H, H, 0.7),
                      random_matrix(rng, 4 * H, 1, 0.7).col(0)};
  const Matrix x = random_matrix(rng, D, 1, 1.0);
  const Matrix h = random_matrix(rng, H, 1, 0.8);
  const Matrix c = random_matrix(rng, H, 1, 0.8);
  const Vector a = random_matrix(rng, H, 1, 1.0).col(0);
  const Vector b = random_matrix(rng, H, 1, 1.0).col(0);

  // loss = a.h' + b.c'
  auto loss = [&](const LstmCellParams& p) {
    reference::State s{{h.data(), h.data() + H}, {c.data(), c.data() + H}};
    const auto out = reference::cell_step(p, {x.data(), x.data() + D}, s);
    reference::Real l = 0.0L;
    for (Eigen::Index j = 0; j < H; ++j) l += a(j) * out.h[j] + b(j) * out.c[j];
    return l;
  };

  LstmStepCache cache;
  lstm_forward(cell, x, h, c, cache);
  auto grad = LstmCellParams::zeros(D, H);
  Matrix dx, dh_prev, dc_prev;
  lstm_backward(cell, cache, a, b, grad, &dx, dh_prev, dc_prev);

  const double step = 1e-5;
  double worst = 0.0;
  auto check_tensor = [&](auto member) {
    auto& analytic = grad.*member;
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      auto plus = cell, minus = cell;
      (plus.*member).data()[i] += step;
      (minus.*member).data()[i] -= step;
      const double numeric = static_cast<double>((loss(plus) - loss(minus)) / (2 * step));
      worst = std::max(worst, rel_error(analytic.data()[i], numeric));
    }
  };
  check_tensor(&LstmCellParams::input_weights);
  check_tensor(&LstmCellParams::recurrent_weights);
  check_tensor(&LstmCellParams::bias);
  CHECK(worst < 1e-4);
}

TEST_CASE("reconstruct agrees with the scalar reference") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const AutoencoderDims dims{3, 5, 4};
    const auto p = random_params(rng, dims, 0.6);
    const Matrix w = random_matrix(rng, 5, 3, 2.0);
    const Matrix ours = reconstruct(p, w);
    const Matrix ref = reference::reconstruct(p, w);
    CHECK(ours.rows() == 5);
    CHECK(ours.cols() == 3);
    CHECK((ours - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("zero parameters reconstruct the projection bias at every step") {
  auto p = AutoencoderParams::zeros({2, 4, 3});
  p.projection_bias << 0.25, -1.5;
  std::mt19937_64 rng(1);
  const Matrix out = reconstruct(p, random_matrix(rng, 4, 2, 3.0));
  for (Eigen::Index t = 0; t < 4; ++t) {
    CHECK(out(t, 0) == 0.25);
    CHECK(out(t, 1) == -1.5);
  }
}

TEST_CASE("reconstruct rejects a window of the wrong shape") {
  const auto p = AutoencoderParams::zeros({2, 4, 3});
  CHECK_THROWS_AS(reconstruct(p, Matrix::Zero(3, 2)), Error);
  CHECK_THROWS_AS(reconstruct(p, Matrix::Zero(4, 3)), Error);
}

TEST_CASE("BPTT gradients match finite differences on random small instances") {
  const auto r = gradcheck::run(2024, 25, 1e-5);
  CHECK(r.instances == 25);
  CHECK(r.max_loss_gap < 1e-12);
  CHECK_MESSAGE(r.worst_relative < 1e-4, "analytic ", r.worst_analytic, " numeric ",
                r.worst_numeric);
  MESSAGE("worst relative error over ", r.entries, " entries: ", r.worst_relative);
}

TEST_CASE("reconstruction_error is the mean absolute difference") {
  const Matrix a = Matrix::Ones(3, 2);
  CHECK(reconstruction_error(a, a) == 0.0);
  CHECK(reconstruction_error(a, Matrix::Zero(3, 2)) == 1.0);

  Matrix x(2, 2), y(2, 2);
  x << 0.1, 0.3, 0.2, 0.6;
  y.setZero();
  CHECK(reconstruction_error(x, y) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(reconstruction_error(a, Matrix::Zero(2, 3)), Error);
}

TEST_CASE("batched reconstruction_errors match per-window reconstruction") {
  std::mt19937_64 rng(8);
  const auto p = random_params(rng, {3, 4, 5}, 0.5);
  std::vector<SequenceWindow> windows;
  for (int k = 0; k < 300; ++k) windows.push_back(benign_window(random_matrix(rng, 4, 3, 2.0)));
  const auto errors = reconstruction_errors(p, windows);
  REQUIRE(errors.size() == windows.size());
  for (std::size_t k = 0; k < windows.size(); k += 37)
    CHECK(errors[k] ==
          doctest::Approx(reconstruction_error(windows[k].values, reconstruct(p, windows[k].values)))
              .epsilon(1e-12));
}

TEST_CASE("training on all-zero windows drives the loss below 1e-3") {
  std::vector<SequenceWindow> windows(64, benign_window(Matrix::Zero(8, 4)));
  TrainConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  const auto result = train(cfg, windows, {});
  CHECK(result.report.epoch_loss.size() == 50);
  CHECK(result.report.epoch_loss.back() < 1e-3);
}

TEST_CASE("training is deterministic and does not end worse than it started") {
  std::mt19937_64 rng(99);
  std::vector<SequenceWindow> train_w, val_w;
  for (int k = 0; k < 96; ++k) train_w.push_back(benign_window(random_matrix(rng, 5, 3, 1.0)));
  for (int k = 0; k < 16; ++k) val_w.push_back(benign_window(random_matrix(rng, 5, 3, 1.0)));
  TrainConfig cfg;
  cfg.hidden = 6;
  cfg.epochs = 15;
  cfg.batch_size = 32;
  cfg.learning_rate = 5e-3;
  cfg.seed = 17;
  const auto a = train(cfg, train_w, val_w);
  const auto b = train(cfg, train_w, val_w);
  CHECK(a.report.epoch_loss == b.report.epoch_loss);
  CHECK(a.params.projection == b.params.projection);
  CHECK(a.params.encoder.recurrent_weights == b.params.encoder.recurrent_weights);
  CHECK(a.report.epoch_loss.back() <= a.report.epoch_loss.front());
  CHECK(a.report.validation.count == 16);
  for (double l : a.report.epoch_loss) CHECK((std::isfinite(l) && l >= 0.0));

  cfg.seed = 18;
  const auto c = train(cfg, train_w, val_w);
  CHECK(c.report.epoch_loss != a.report.epoch_loss);
}

TEST_CASE("a model trained on one repeated window memorizes it") {
  std::mt19937_64 rng(4);
  const Matrix target = random_matrix(rng, 6, 3, 1.5);
  std::vector<SequenceWindow> windows(16, benign_window(target));
  TrainConfig cfg;
  cfg.hidden = 16;
  cfg.epochs = 400;
  cfg.batch_size = 16;
  cfg.learning_rate = 1e-2;
  const auto result = train(cfg, windows, {});
  const double mae = reconstruction_error(target, reconstruct(result.params, target));
  MESSAGE("memorization MAE: ", mae);
  CHECK(mae < 0.05);
}

TEST_CASE("an absurd learning rate is reported as divergence") {
  std::mt19937_64 rng(6);
  std::vector<SequenceWindow> windows;
  for (int k = 0; k < 8; ++k) windows.push_back(benign_window(random_matrix(rng, 4, 2, 1.0)));
  TrainConfig cfg;
  cfg.hidden = 4;
  cfg.epochs = 5;
  cfg.batch_size = 2;
  cfg.learning_rate = 1e200;
  try {
    train(cfg, windows, {});
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::diverged);
    CHECK(std::string(e.what()).find("epoch") != std::string::npos);
  }
}

TEST_CASE("training refuses anomalous windows and bad configs") {
  std::vector<SequenceWindow> windows(4, benign_window(Matrix::Zero(4, 2)));
  windows[2].label = Label::anomalous;
  TrainConfig cfg;
  cfg.hidden = 3;
  cfg.epochs = 1;
  try {
    train(cfg, windows, {});
    FAIL("expected leakage error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::leakage);
  }
  windows[2].label = Label::benign;
  CHECK_THROWS_AS(train(cfg, {}, {}), Error);
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(train(cfg, windows, {}), Error);
  cfg.beta1 = 0.9;
  cfg.hidden = 8;  // H must stay below W*D = 8
  CHECK_THROWS_AS(train(cfg, windows, {}), Error);
}

TEST_CASE("initialization follows the documented ranges") {
  const AutoencoderDims dims{8, 8, 32};
  const auto p = AutoencoderParams::initialize(dims, 1);
  const double bound = 1.0 / std::sqrt(32.0);
  CHECK(p.encoder.input_weights.cwiseAbs().maxCoeff() <= bound);
  CHECK(p.decoder.recurrent_weights.cwiseAbs().maxCoeff() <= bound);
  CHECK(p.projection.cwiseAbs().maxCoeff() <= bound);
  CHECK(LstmCellParams::gate_rows(p.encoder.bias, Gate::forget, 32).isOnes(0.0));
  CHECK(LstmCellParams::gate_rows(p.decoder.bias, Gate::input, 32).isZero(0.0));
  CHECK(p.projection_bias.isZero(0.0));
  CHECK(p.parameter_count() == 4 * 32 * (8 + 32 + 1) + 4 * 32 * (32 + 32 + 1) + 8 * 32 + 8);
}
