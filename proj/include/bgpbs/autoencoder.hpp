#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bgpbs/lstm.hpp"
#include "bgpbs/pipeline.hpp"

namespace bgpbs {

struct AutoencoderDims {
  std::size_t features = 0;  // D
  std::size_t window = 0;    // W
  std::size_t hidden = 0;    // H, also the latent size

  bool operator==(const AutoencoderDims&) const = default;
};

/// LSTM encoder-decoder. The encoder's final hidden state is the latent
/// code; the decoder receives it as input at every step and a linear
/// projection maps each decoder hidden state back to D features.
struct AutoencoderParams {
  AutoencoderDims dims;
  LstmCellParams encoder;  // input D, hidden H
  LstmCellParams decoder;  // input H, hidden H
  Matrix projection;       // D x H
  Vector projection_bias;  // D

  static AutoencoderParams zeros(const AutoencoderDims& dims);
  // Weights ~ U(-1/sqrt(H), 1/sqrt(H)); biases 0 except forget gates at 1.
  static AutoencoderParams initialize(const AutoencoderDims& dims, std::uint64_t seed);

  void validate() const;
  std::size_t parameter_count() const noexcept;
};

// Applies f to each parameter tensor of every argument in lockstep.
template <class F, class... P>
void for_each_tensor(F&& f, P&... p) {
  f(p.encoder.input_weights...);
  f(p.encoder.recurrent_weights...);
  f(p.encoder.bias...);
  f(p.decoder.input_weights...);
  f(p.decoder.recurrent_weights...);
  f(p.decoder.bias...);
  f(p.projection...);
  f(p.projection_bias...);
}

Matrix reconstruct(const AutoencoderParams& p, const Matrix& window);

// Mean absolute difference over all W*D entries.
double reconstruction_error(const Matrix& window, const Matrix& reconstruction);

// Batched reconstruction MAE for every window, order preserved.
std::vector<double> reconstruction_errors(const AutoencoderParams& p,
                                          std::span<const SequenceWindow> windows);

// Mean squared reconstruction error over the batch. When `grad` is non-null it
// is overwritten with dLoss/dparams computed by backpropagation through time.
double mse_loss(const AutoencoderParams& p, std::span<const Matrix* const> batch,
                AutoencoderParams* grad);

struct TrainConfig {
  std::size_t hidden = 32;
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct ErrorStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

ErrorStats summarize_errors(std::vector<double> errors);

struct TrainReport {
  std::vector<double> epoch_loss;  // mean training MSE per epoch
  ErrorStats validation;           // MAE of validation windows after training
};

struct TrainResult {
  AutoencoderParams params;
  TrainReport report;
};

// Adam on MSE with full-window BPTT. Batch order is reshuffled every epoch
// from a generator seeded by `config.seed`. Throws leakage error on any
// anomalous window and diverged error on a non-finite batch loss.
TrainResult train(const TrainConfig& config, std::span<const SequenceWindow> train_windows,
                  std::span<const SequenceWindow> val_windows);

}  // namespace bgpbs
