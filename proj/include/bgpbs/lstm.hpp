#pragma once

#include <cstddef>

#include "bgpbs/pipeline.hpp"

namespace bgpbs {

// Row blocks of the stacked gate matrices, each hidden_dim rows tall.
enum class Gate : int { input = 0, forget = 1, output = 2, candidate = 3 };

/// Weights of one LSTM cell with the four gates stacked row-wise in the
/// order input, forget, output, candidate.
struct LstmCellParams {
  Matrix input_weights;      // 4H x D
  Matrix recurrent_weights;  // 4H x H
  Vector bias;               // 4H

  static LstmCellParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(input_weights.cols()); }
  std::size_t hidden_dim() const noexcept {
    return static_cast<std::size_t>(recurrent_weights.cols());
  }

  // Rows of `m` belonging to `gate`.
  template <class M>
  static auto gate_rows(M& m, Gate gate, std::size_t hidden) {
    return m.middleRows(static_cast<Eigen::Index>(gate) * static_cast<Eigen::Index>(hidden),
                        static_cast<Eigen::Index>(hidden));
  }

  void validate() const;
};

struct LstmState {
  Vector h;
  Vector c;
};

// i, f, o = sigmoid(affine); g = tanh(affine); c' = f*c + i*g; h' = o*tanh(c').
LstmState lstm_step(const LstmCellParams& cell, const Vector& x, const Vector& h, const Vector& c);

// Batched forward/backward over column-major batches (one sample per column).
struct LstmStepCache {
  Matrix x, h_prev, c_prev;
  Matrix i, f, o, g;
  Matrix c, tanh_c, h;
};

void lstm_forward(const LstmCellParams& cell, const Matrix& x, const Matrix& h_prev,
                  const Matrix& c_prev, LstmStepCache& cache);

// Accumulates parameter gradients into `grad` given upstream dL/dh' and dL/dc'.
// Writes dL/dx into `dx` when non-null, and dL/dh, dL/dc of the previous state.
void lstm_backward(const LstmCellParams& cell, const LstmStepCache& cache, const Matrix& dh,
                   const Matrix& dc, LstmCellParams& grad, Matrix* dx, Matrix& dh_prev,
                   Matrix& dc_prev);

}  // namespace bgpbs
