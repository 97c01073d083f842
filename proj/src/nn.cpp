#include "wgs/nn.hpp"

#include <cmath>

namespace wgs {

Mlp Mlp::create(const std::vector<int>& dims, RandomStream& rng, bool zero_last) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least two layer dims");
  Mlp net;
  net.layer_dims = dims;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l], fan_out = dims[l + 1];
    Matrix W(fan_out, fan_in);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) W(i, j) = rng.uniform(-bound, bound);
    if (zero_last && l + 2 == dims.size()) W.setZero();
    net.layers.push_back({Param(std::move(W)), Param(Matrix::Zero(fan_out, 1))});
  }
  return net;
}

Matrix Mlp::forward(const Matrix& x) const {
  if (x.cols() != layer_dims.front())
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  Matrix h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix y = h * layers[l].W.value.transpose();
    y.rowwise() += layers[l].b.value.col(0).transpose();
    if (l + 1 < layers.size()) y = y.cwiseMax(act_slope * y);
    h = std::move(y);
  }
  return h;
}

Vector Mlp::forward(const Vector& x) const {
  return forward(Matrix(x.transpose())).row(0).transpose();
}

Tape::Id Mlp::forward_tape(Tape& tape, Tape::Id x) {
  Tape::Id h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = tape.affine(h, layers[l].W, layers[l].b);
    if (l + 1 < layers.size()) h = tape.leaky_relu(h, act_slope);
  }
  return h;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers)
    n += static_cast<std::size_t>(layer.W.size() + layer.b.size());
  return n;
}

void Mlp::collect_params(std::vector<Param*>& out) {
  for (auto& layer : layers) {
    out.push_back(&layer.W);
    out.push_back(&layer.b);
  }
}

void AdamState::init(const std::vector<Param*>& params) {
  step = 0;
  first_moment.clear();
  second_moment.clear();
  for (const Param* p : params) {
    first_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    second_moment.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void adam_step(std::vector<Param*>& params, AdamState& state) {
  adam_step(params, state, state.lr.at(state.step));
}

void adam_step(std::vector<Param*>& params, AdamState& state, double lr) {
  if (state.first_moment.size() != params.size())
    throw std::invalid_argument("adam_step: state not initialized for these params");
  for (const Param* p : params)
    if (!p->grad.allFinite())
      throw TrainingDivergence("adam_step: non-finite gradient at step " +
                               std::to_string(state.step + 1));
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = *params[k];
    Matrix& m = state.first_moment[k];
    Matrix& v = state.second_moment[k];
    m = state.beta1 * m + (1.0 - state.beta1) * p.grad;
    v = state.beta2 * v + (1.0 - state.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps_adam);
  }
}

}  // namespace wgs
