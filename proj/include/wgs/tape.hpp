#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace wgs {

/// A trainable tensor: value plus gradient accumulator of the same shape.
struct Param {
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  explicit Param(Eigen::MatrixXd v = {})
      : value(std::move(v)), grad(Eigen::MatrixXd::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

/**
 * Reverse-mode tape over matrix-valued nodes.  A node's value is an N x k
 * matrix (batches are rows; scalars are 1 x 1).  Operations record a pull
 * closure that routes the node's cotangent to its inputs and accumulates
 * parameter cotangents directly into Param::grad.  Gradients of constants are
 * never formed; gradients accumulate additively across parameter reuse.
 *
 * The tape is rebuilt for every loss evaluation (reset() keeps capacity).
 */
class Tape {
 public:
  using Id = int;

  Id constant(Eigen::MatrixXd v) { return push(std::move(v), false); }

  /// Leaf bound to a parameter; backward adds the cotangent into p.grad.
  Id leaf(Param& p) {
    const Id id = push(p.value, true);
    nodes_[id].pull = [&p](Tape& t, Id self) { p.grad += t.bar(self); };
    return id;
  }

  /// y = x W^T + 1 b^T  (x: N x in, W: out x in, b: out x 1).
  Id affine(Id x, Param& W, Param& b);

  /// Elementwise max(x, slope * x).
  Id leaky_relu(Id x, double slope);

  /// Elementwise cap * tanh(x / cap) — soft clamp to (-cap, cap).
  Id tanh_scale(Id x, double cap);

  /// Column subset y = x(:, idx).
  Id gather_cols(Id x, std::vector<int> idx);

  /// N x width matrix with columns idx_a taken from a and idx_b from b.
  Id combine_cols(Id a, const std::vector<int>& idx_a, Id b,
                  const std::vector<int>& idx_b, int width);

  /// Affine-coupling combine: y = (a - t) .* exp(-s)  (all N x k).
  Id coupling_combine(Id a, Id t, Id s);

  Id add(Id x, Id y);
  Id sub(Id x, Id y);
  Id mul(Id x, Id y);  // elementwise
  Id scale(Id x, double c);
  Id square(Id x);
  Id sum(Id x);   // -> 1 x 1
  Id mean(Id x);  // -> 1 x 1

  /// y = x + c * z for scalar nodes (loss assembly).
  Id add_scaled(Id x, Id z, double c);

  /**
   * Escape hatch for fused operations (the weak-form residual and the
   * boundary penalty live in the trainer): value computed by the caller,
   * pull routes the cotangent to the inputs.
   */
  Id custom(Eigen::MatrixXd value, std::vector<Id> inputs,
            std::function<void(Tape&, Id)> pull);

  const Eigen::MatrixXd& value(Id id) const { return nodes_[id].val; }

  /// Cotangent accumulator (allocated as zeros on first use).
  Eigen::MatrixXd& bar(Id id) {
    Node& n = nodes_[id];
    if (n.bar.size() == 0) n.bar = Eigen::MatrixXd::Zero(n.val.rows(), n.val.cols());
    return n.bar;
  }

  bool needs_grad(Id id) const { return nodes_[id].needs_grad; }

  /// Add delta into the cotangent of id unless the subgraph is constant.
  template <typename Derived>
  void accumulate(Id id, const Eigen::MatrixBase<Derived>& delta) {
    if (nodes_[id].needs_grad) bar(id) += delta;
  }

  /**
   * Reverse sweep from a scalar loss node: seeds d(loss)/d(loss) = 1 and
   * pulls cotangents through every recorded operation in reverse order.
   */
  void backward(Id loss);

  void reset() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd val;
    Eigen::MatrixXd bar;
    bool needs_grad = false;
    std::function<void(Tape&, Id)> pull;  // null for leaves and constants
  };

  Id push(Eigen::MatrixXd v, bool needs_grad) {
    nodes_.push_back(Node{std::move(v), {}, needs_grad, nullptr});
    return static_cast<Id>(nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

}  // namespace wgs
