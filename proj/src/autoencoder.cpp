#include "bgpbs/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "bgpbs/error.hpp"

namespace bgpbs {

namespace {

constexpr std::size_t kScoreChunk = 256;

struct ForwardCache {
  std::vector<LstmStepCache> encoder;
  std::vector<LstmStepCache> decoder;
  Matrix latent;
  std::vector<Matrix> outputs;  // W entries of D x B
};

// Timestep t of every window in the batch as a D x B matrix.
Matrix batch_step(std::span<const Matrix* const> batch, Eigen::Index t) {
  const auto d = batch.front()->cols();
  Matrix x(d, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b)
    x.col(static_cast<Eigen::Index>(b)) = batch[b]->row(t).transpose();
  return x;
}

void forward(const AutoencoderParams& p, std::span<const Matrix* const> batch,
             ForwardCache& cache) {
  const auto W = static_cast<Eigen::Index>(p.dims.window);
  const auto H = static_cast<Eigen::Index>(p.dims.hidden);
  const auto B = static_cast<Eigen::Index>(batch.size());

  cache.encoder.resize(p.dims.window);
  cache.decoder.resize(p.dims.window);
  cache.outputs.resize(p.dims.window);

  Matrix h = Matrix::Zero(H, B);
  Matrix c = Matrix::Zero(H, B);
  for (Eigen::Index t = 0; t < W; ++t) {
    auto& step = cache.encoder[static_cast<std::size_t>(t)];
    lstm_forward(p.encoder, batch_step(batch, t), h, c, step);
    h = step.h;
    c = step.c;
  }
  cache.latent = h;

  h.setZero();
  c.setZero();
  for (Eigen::Index t = 0; t < W; ++t) {
    auto& step = cache.decoder[static_cast<std::size_t>(t)];
    lstm_forward(p.decoder, cache.latent, h, c, step);
    h = step.h;
    c = step.c;
    Matrix y = p.projection * h;
    y.colwise() += p.projection_bias;
    cache.outputs[static_cast<std::size_t>(t)] = std::move(y);
  }
}

void check_window(const AutoencoderParams& p, const Matrix& w) {
  if (static_cast<std::size_t>(w.rows()) != p.dims.window ||
      static_cast<std::size_t>(w.cols()) != p.dims.features)
    fail(ErrorKind::invalid_input, "window is " + std::to_string(w.rows()) + "x" +
                                       std::to_string(w.cols()) + ", model expects " +
                                       std::to_string(p.dims.window) + "x" +
                                       std::to_string(p.dims.features));
}

}  // namespace

AutoencoderParams AutoencoderParams::zeros(const AutoencoderDims& dims) {
  AutoencoderParams p;
  p.dims = dims;
  p.encoder = LstmCellParams::zeros(dims.features, dims.hidden);
  p.decoder = LstmCellParams::zeros(dims.hidden, dims.hidden);
  p.projection = Matrix::Zero(static_cast<Eigen::Index>(dims.features),
                              static_cast<Eigen::Index>(dims.hidden));
  p.projection_bias = Vector::Zero(static_cast<Eigen::Index>(dims.features));
  return p;
}

AutoencoderParams AutoencoderParams::initialize(const AutoencoderDims& dims, std::uint64_t seed) {
  auto p = zeros(dims);
  p.validate();
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  auto fill = [&](Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
  };
  fill(p.encoder.input_weights);
  fill(p.encoder.recurrent_weights);
  fill(p.decoder.input_weights);
  fill(p.decoder.recurrent_weights);
  fill(p.projection);
  LstmCellParams::gate_rows(p.encoder.bias, Gate::forget, dims.hidden).setOnes();
  LstmCellParams::gate_rows(p.decoder.bias, Gate::forget, dims.hidden).setOnes();
  return p;
}

void AutoencoderParams::validate() const {
  if (dims.features == 0 || dims.window == 0 || dims.hidden == 0)
    fail(ErrorKind::invalid_input, "autoencoder dimensions must be positive");
  if (dims.hidden >= dims.window * dims.features)
    fail(ErrorKind::invalid_input, "latent size H must be smaller than W*D");
  encoder.validate();
  decoder.validate();
  if (encoder.input_dim() != dims.features || encoder.hidden_dim() != dims.hidden ||
      decoder.input_dim() != dims.hidden || decoder.hidden_dim() != dims.hidden)
    fail(ErrorKind::invalid_input, "LSTM cell shapes do not match autoencoder dimensions");
  if (static_cast<std::size_t>(projection.rows()) != dims.features ||
      static_cast<std::size_t>(projection.cols()) != dims.hidden ||
      static_cast<std::size_t>(projection_bias.size()) != dims.features)
    fail(ErrorKind::invalid_input, "output projection shape does not match dimensions");
  if (!projection.allFinite() || !projection_bias.allFinite())
    fail(ErrorKind::invalid_input, "output projection has non-finite entries");
}

std::size_t AutoencoderParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for_each_tensor([&](const auto& t) { n += static_cast<std::size_t>(t.size()); }, *this);
  return n;
}

Matrix reconstruct(const AutoencoderParams& p, const Matrix& window) {
  check_window(p, window);
  const Matrix* batch[] = {&window};
  ForwardCache cache;
  forward(p, batch, cache);
  Matrix out(window.rows(), window.cols());
  for (Eigen::Index t = 0; t < window.rows(); ++t)
    out.row(t) = cache.outputs[static_cast<std::size_t>(t)].col(0).transpose();
  return out;
}

double reconstruction_error(const Matrix& window, const Matrix& reconstruction) {
  if (window.rows() != reconstruction.rows() || window.cols() != reconstruction.cols())
    fail(ErrorKind::invalid_input, "reconstruction shape does not match the window");
  if (window.size() == 0) fail(ErrorKind::invalid_input, "empty window");
  return (window - reconstruction).cwiseAbs().mean();
}

std::vector<double> reconstruction_errors(const AutoencoderParams& p,
                                          std::span<const SequenceWindow> windows) {
  std::vector<double> errors;
  errors.reserve(windows.size());
  std::vector<const Matrix*> batch;
  ForwardCache cache;
  const auto W = static_cast<Eigen::Index>(p.dims.window);
  for (std::size_t start = 0; start < windows.size(); start += kScoreChunk) {
    const auto end = std::min(windows.size(), start + kScoreChunk);
    batch.clear();
    for (std::size_t k = start; k < end; ++k) {
      check_window(p, windows[k].values);
      batch.push_back(&windows[k].values);
    }
    forward(p, batch, cache);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      double sum = 0.0;
      for (Eigen::Index t = 0; t < W; ++t)
        sum += (cache.outputs[static_cast<std::size_t>(t)].col(static_cast<Eigen::Index>(b)) -
                batch[b]->row(t).transpose())
                   .cwiseAbs()
                   .sum();
      errors.push_back(sum / static_cast<double>(batch[b]->size()));
    }
  }
  return errors;
}

double mse_loss(const AutoencoderParams& p, std::span<const Matrix* const> batch,
                AutoencoderParams* grad) {
  if (batch.empty()) fail(ErrorKind::invalid_input, "empty batch");
  for (const auto* w : batch) check_window(p, *w);

  ForwardCache cache;
  forward(p, batch, cache);

  const auto W = static_cast<Eigen::Index>(p.dims.window);
  const auto H = static_cast<Eigen::Index>(p.dims.hidden);
  const auto B = static_cast<Eigen::Index>(batch.size());
  const double scale = 1.0 / static_cast<double>(B * W * static_cast<Eigen::Index>(p.dims.features));

  std::vector<Matrix> residual(p.dims.window);
  double loss = 0.0;
  for (Eigen::Index t = 0; t < W; ++t) {
    auto& r = residual[static_cast<std::size_t>(t)];
    r = cache.outputs[static_cast<std::size_t>(t)] - batch_step(batch, t);
    loss += r.squaredNorm();
  }
  loss *= scale;
  if (grad == nullptr) return loss;

  *grad = AutoencoderParams::zeros(p.dims);
  Matrix dh = Matrix::Zero(H, B);
  Matrix dc = Matrix::Zero(H, B);
  Matrix dh_prev, dc_prev, dx;
  Matrix dlatent = Matrix::Zero(H, B);
  for (Eigen::Index t = W - 1; t >= 0; --t) {
    const auto& step = cache.decoder[static_cast<std::size_t>(t)];
    const Matrix dy = (2.0 * scale) * residual[static_cast<std::size_t>(t)];
    grad->projection.noalias() += dy * step.h.transpose();
    grad->projection_bias += dy.rowwise().sum();
    dh.noalias() += p.projection.transpose() * dy;
    lstm_backward(p.decoder, step, dh, dc, grad->decoder, &dx, dh_prev, dc_prev);
    dlatent += dx;
    dh.swap(dh_prev);
    dc.swap(dc_prev);
  }

  dh = dlatent;
  dc.setZero();
  for (Eigen::Index t = W - 1; t >= 0; --t) {
    lstm_backward(p.encoder, cache.encoder[static_cast<std::size_t>(t)], dh, dc, grad->encoder,
                  nullptr, dh_prev, dc_prev);
    dh.swap(dh_prev);
    dc.swap(dc_prev);
  }
  return loss;
}

void TrainConfig::validate() const {
  if (hidden == 0 || epochs == 0 || batch_size == 0)
    fail(ErrorKind::invalid_input, "hidden, epochs and batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    fail(ErrorKind::invalid_input, "learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    fail(ErrorKind::invalid_input, "Adam betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) fail(ErrorKind::invalid_input, "Adam epsilon must be positive");
}

ErrorStats summarize_errors(std::vector<double> errors) {
  ErrorStats s;
  s.count = errors.size();
  if (errors.empty()) return s;
  std::sort(errors.begin(), errors.end());
  const auto n = errors.size();
  s.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
  s.median = n % 2 == 1 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  const auto rank = std::max<std::size_t>(1, (99 * n + 99) / 100);  // ceil(0.99 n)
  s.p99 = errors[std::min(rank, n) - 1];
  s.max = errors.back();
  return s;
}

TrainResult train(const TrainConfig& config, std::span<const SequenceWindow> train_windows,
                  std::span<const SequenceWindow> val_windows) {
  config.validate();
  if (train_windows.empty()) fail(ErrorKind::invalid_input, "no training windows");
  for (const auto& w : train_windows)
    if (w.anomalous()) fail(ErrorKind::leakage, "anomalous window in training data");
  for (const auto& w : val_windows)
    if (w.anomalous()) fail(ErrorKind::leakage, "anomalous window in validation data");

  AutoencoderDims dims;
  dims.window = static_cast<std::size_t>(train_windows.front().values.rows());
  dims.features = static_cast<std::size_t>(train_windows.front().values.cols());
  dims.hidden = config.hidden;

  TrainResult result;
  auto& p = result.params;
  p = AutoencoderParams::initialize(dims, config.seed);
  for (const auto& w : train_windows) check_window(p, w.values);
  for (const auto& w : val_windows) check_window(p, w.values);

  auto m = AutoencoderParams::zeros(dims);
  auto v = AutoencoderParams::zeros(dims);
  AutoencoderParams g;

  std::mt19937_64 rng(config.seed ^ 0x5DEECE66DULL);
  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Matrix*> batch;
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(&train_windows[order[k]].values);

      const double loss = mse_loss(p, batch, &g);
      if (!std::isfinite(loss))
        fail(ErrorKind::diverged, "training diverged in epoch " + std::to_string(epoch + 1) +
                                      ": non-finite batch loss");
      epoch_sum += loss * static_cast<double>(batch.size());

      ++step;
      const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for_each_tensor(
          [&](auto& param, auto& grad, auto& m1, auto& m2) {
            m1 = config.beta1 * m1 + (1.0 - config.beta1) * grad;
            m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad.cwiseAbs2();
            param.array() -= config.learning_rate * (m1.array() / bc1) /
                             ((m2.array() / bc2).sqrt() + config.epsilon);
          },
          p, g, m, v);
    }
    const double epoch_loss = epoch_sum / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss))
      fail(ErrorKind::diverged,
           "training diverged in epoch " + std::to_string(epoch + 1) + ": non-finite loss");
    result.report.epoch_loss.push_back(epoch_loss);
  }

  bool finite = true;
  for_each_tensor([&](const auto& t) { finite = finite && t.allFinite(); }, p);
  if (!finite)
    fail(ErrorKind::diverged, "training diverged: non-finite parameters after the last epoch");

  result.report.validation = summarize_errors(reconstruction_errors(p, val_windows));
  return result;
}

}  // namespace bgpbs
