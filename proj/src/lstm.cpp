#include "bgpbs/lstm.hpp"

#include "bgpbs/error.hpp"

namespace bgpbs {

namespace {

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

LstmCellParams LstmCellParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  const auto d = static_cast<Eigen::Index>(input_dim);
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  return {Matrix::Zero(4 * h, d), Matrix::Zero(4 * h, h), Vector::Zero(4 * h)};
}

void LstmCellParams::validate() const {
  const auto h = recurrent_weights.cols();
  if (h == 0 || recurrent_weights.rows() != 4 * h || input_weights.rows() != 4 * h ||
      input_weights.cols() == 0 || bias.size() != 4 * h)
    fail(ErrorKind::invalid_input, "inconsistent LSTM cell shapes");
  if (!input_weights.allFinite() || !recurrent_weights.allFinite() || !bias.allFinite())
    fail(ErrorKind::invalid_input, "LSTM cell has non-finite parameters");
}

void lstm_forward(const LstmCellParams& cell, const Matrix& x, const Matrix& h_prev,
                  const Matrix& c_prev, LstmStepCache& cache) {
  const auto hd = cell.hidden_dim();
  const auto H = static_cast<Eigen::Index>(hd);
  Matrix z = cell.input_weights * x + cell.recurrent_weights * h_prev;
  z.colwise() += cell.bias;

  cache.x = x;
  cache.h_prev = h_prev;
  cache.c_prev = c_prev;
  cache.i = sigmoid(z.middleRows(0, H));
  cache.f = sigmoid(z.middleRows(H, H));
  cache.o = sigmoid(z.middleRows(2 * H, H));
  cache.g = z.middleRows(3 * H, H).array().tanh().matrix();
  cache.c = (cache.f.array() * c_prev.array() + cache.i.array() * cache.g.array()).matrix();
  cache.tanh_c = cache.c.array().tanh().matrix();
  cache.h = (cache.o.array() * cache.tanh_c.array()).matrix();
}

void lstm_backward(const LstmCellParams& cell, const LstmStepCache& cache, const Matrix& dh,
                   const Matrix& dc, LstmCellParams& grad, Matrix* dx, Matrix& dh_prev,
                   Matrix& dc_prev) {
  const auto H = static_cast<Eigen::Index>(cell.hidden_dim());
  const auto B = dh.cols();

  const Eigen::ArrayXXd dc_total =
      dc.array() + dh.array() * cache.o.array() * (1.0 - cache.tanh_c.array().square());

  Matrix dz(4 * H, B);
  dz.middleRows(0, H) =
      (dc_total * cache.g.array() * cache.i.array() * (1.0 - cache.i.array())).matrix();
  dz.middleRows(H, H) =
      (dc_total * cache.c_prev.array() * cache.f.array() * (1.0 - cache.f.array())).matrix();
  dz.middleRows(2 * H, H) =
      (dh.array() * cache.tanh_c.array() * cache.o.array() * (1.0 - cache.o.array())).matrix();
  dz.middleRows(3 * H, H) =
      (dc_total * cache.i.array() * (1.0 - cache.g.array().square())).matrix();

  grad.input_weights.noalias() += dz * cache.x.transpose();
  grad.recurrent_weights.noalias() += dz * cache.h_prev.transpose();
  grad.bias += dz.rowwise().sum();

  if (dx != nullptr) dx->noalias() = cell.input_weights.transpose() * dz;
  dh_prev.noalias() = cell.recurrent_weights.transpose() * dz;
  dc_prev = (dc_total * cache.f.array()).matrix();
}

LstmState lstm_step(const LstmCellParams& cell, const Vector& x, const Vector& h, const Vector& c) {
  cell.validate();
  const auto hd = static_cast<Eigen::Index>(cell.hidden_dim());
  if (x.size() != static_cast<Eigen::Index>(cell.input_dim()) || h.size() != hd || c.size() != hd)
    fail(ErrorKind::invalid_input, "lstm_step input shapes do not match the cell");
  LstmStepCache cache;
  lstm_forward(cell, x, h, c, cache);
  return {cache.h.col(0), cache.c.col(0)};
}

}  // namespace bgpbs
