#include "wgs/tape.hpp"

#include <stdexcept>

namespace wgs {

using Id = Tape::Id;

Id Tape::affine(Id x, Param& W, Param& b) {
  Eigen::MatrixXd y = nodes_[x].val * W.value.transpose();
  y.rowwise() += b.value.col(0).transpose();
  const Id id = push(std::move(y), true);
  nodes_[id].pull = [x, &W, &b](Tape& t, Id self) {
    const Eigen::MatrixXd& g = t.bar(self);
    W.grad.noalias() += g.transpose() * t.nodes_[x].val;
    b.grad.col(0).noalias() += g.colwise().sum().transpose();
    if (t.needs_grad(x)) t.bar(x).noalias() += g * W.value;
  };
  return id;
}

Id Tape::leaky_relu(Id x, double slope) {
  const Eigen::MatrixXd& v = nodes_[x].val;
  Eigen::MatrixXd y = v.cwiseMax(slope * v);
  const Id id = push(std::move(y), nodes_[x].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, slope](Tape& t, Id self) {
      const auto& v = t.nodes_[x].val.array();
      t.bar(x).array() +=
          t.bar(self).array() * ((v > 0.0).cast<double>() * (1.0 - slope) + slope);
    };
  return id;
}

Id Tape::tanh_scale(Id x, double cap) {
  Eigen::MatrixXd y = cap * (nodes_[x].val.array() / cap).tanh();
  const Id id = push(std::move(y), nodes_[x].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, cap](Tape& t, Id self) {
      // d/dx [cap tanh(x/cap)] = 1 - (y/cap)^2
      const auto& y = t.nodes_[self].val.array();
      t.bar(x).array() += t.bar(self).array() * (1.0 - (y / cap).square());
    };
  return id;
}

Id Tape::gather_cols(Id x, std::vector<int> idx) {
  const Eigen::MatrixXd& v = nodes_[x].val;
  Eigen::MatrixXd y(v.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) y.col(j) = v.col(idx[j]);
  const Id id = push(std::move(y), nodes_[x].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, idx = std::move(idx)](Tape& t, Id self) {
      const Eigen::MatrixXd& g = t.bar(self);
      Eigen::MatrixXd& gx = t.bar(x);
      for (std::size_t j = 0; j < idx.size(); ++j) gx.col(idx[j]) += g.col(j);
    };
  return id;
}

Id Tape::combine_cols(Id a, const std::vector<int>& idx_a, Id b,
                      const std::vector<int>& idx_b, int width) {
  const Eigen::MatrixXd& va = nodes_[a].val;
  const Eigen::MatrixXd& vb = nodes_[b].val;
  Eigen::MatrixXd y(va.rows(), width);
  for (std::size_t j = 0; j < idx_a.size(); ++j) y.col(idx_a[j]) = va.col(j);
  for (std::size_t j = 0; j < idx_b.size(); ++j) y.col(idx_b[j]) = vb.col(j);
  const Id id = push(std::move(y), nodes_[a].needs_grad || nodes_[b].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [a, b, idx_a, idx_b](Tape& t, Id self) {
      const Eigen::MatrixXd& g = t.bar(self);
      if (t.needs_grad(a)) {
        Eigen::MatrixXd& ga = t.bar(a);
        for (std::size_t j = 0; j < idx_a.size(); ++j) ga.col(j) += g.col(idx_a[j]);
      }
      if (t.needs_grad(b)) {
        Eigen::MatrixXd& gb = t.bar(b);
        for (std::size_t j = 0; j < idx_b.size(); ++j) gb.col(j) += g.col(idx_b[j]);
      }
    };
  return id;
}

Id Tape::coupling_combine(Id a, Id t_id, Id s_id) {
  Eigen::MatrixXd e = (-nodes_[s_id].val.array()).exp();
  Eigen::MatrixXd y =
      (nodes_[a].val.array() - nodes_[t_id].val.array()) * e.array();
  const Id id = push(std::move(y), true);
  nodes_[id].pull = [a, t_id, s_id, e = std::move(e)](Tape& t, Id self) {
    // y = (a - t) e^{-s}:  dy/da = e^{-s}, dy/dt = -e^{-s}, dy/ds = -y.
    const Eigen::MatrixXd& g = t.bar(self);
    if (t.needs_grad(a)) t.bar(a).array() += g.array() * e.array();
    if (t.needs_grad(t_id)) t.bar(t_id).array() -= g.array() * e.array();
    if (t.needs_grad(s_id))
      t.bar(s_id).array() -= g.array() * t.nodes_[self].val.array();
  };
  return id;
}

Id Tape::add(Id x, Id y) {
  const Id id =
      push(nodes_[x].val + nodes_[y].val, nodes_[x].needs_grad || nodes_[y].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, y](Tape& t, Id self) {
      t.accumulate(x, t.bar(self));
      t.accumulate(y, t.bar(self));
    };
  return id;
}

Id Tape::sub(Id x, Id y) {
  const Id id =
      push(nodes_[x].val - nodes_[y].val, nodes_[x].needs_grad || nodes_[y].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, y](Tape& t, Id self) {
      t.accumulate(x, t.bar(self));
      t.accumulate(y, -t.bar(self));
    };
  return id;
}

Id Tape::mul(Id x, Id y) {
  const Id id = push(nodes_[x].val.cwiseProduct(nodes_[y].val),
                     nodes_[x].needs_grad || nodes_[y].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, y](Tape& t, Id self) {
      if (t.needs_grad(x)) t.bar(x) += t.bar(self).cwiseProduct(t.nodes_[y].val);
      if (t.needs_grad(y)) t.bar(y) += t.bar(self).cwiseProduct(t.nodes_[x].val);
    };
  return id;
}

Id Tape::scale(Id x, double c) {
  const Id id = push(c * nodes_[x].val, nodes_[x].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, c](Tape& t, Id self) { t.bar(x) += c * t.bar(self); };
  return id;
}

Id Tape::square(Id x) {
  const Id id = push(nodes_[x].val.cwiseProduct(nodes_[x].val), nodes_[x].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x](Tape& t, Id self) {
      t.bar(x).array() += 2.0 * t.bar(self).array() * t.nodes_[x].val.array();
    };
  return id;
}

Id Tape::sum(Id x) {
  Eigen::MatrixXd y(1, 1);
  y(0, 0) = nodes_[x].val.sum();
  const Id id = push(std::move(y), nodes_[x].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x](Tape& t, Id self) {
      t.bar(x).array() += t.bar(self)(0, 0);
    };
  return id;
}

Id Tape::mean(Id x) {
  const double inv = 1.0 / static_cast<double>(nodes_[x].val.size());
  Eigen::MatrixXd y(1, 1);
  y(0, 0) = nodes_[x].val.sum() * inv;
  const Id id = push(std::move(y), nodes_[x].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, inv](Tape& t, Id self) {
      t.bar(x).array() += inv * t.bar(self)(0, 0);
    };
  return id;
}

Id Tape::add_scaled(Id x, Id z, double c) {
  const Id id =
      push(nodes_[x].val + c * nodes_[z].val, nodes_[x].needs_grad || nodes_[z].needs_grad);
  if (nodes_[id].needs_grad)
    nodes_[id].pull = [x, z, c](Tape& t, Id self) {
      t.accumulate(x, t.bar(self));
      t.accumulate(z, c * t.bar(self));
    };
  return id;
}

Id Tape::custom(Eigen::MatrixXd value, std::vector<Id> inputs,
                std::function<void(Tape&, Id)> pull) {
  bool needs = false;
  for (Id in : inputs) needs = needs || nodes_[in].needs_grad;
  const Id id = push(std::move(value), needs);
  if (needs) nodes_[id].pull = std::move(pull);
  return id;
}

void Tape::backward(Id loss) {
  if (nodes_[loss].val.size() != 1)
    throw std::invalid_argument("backward: loss node must be scalar");
  bar(loss)(0, 0) = 1.0;
  for (Id id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.pull && n.bar.size() != 0) n.pull(*this, id);
  }
}

}  // namespace wgs
