#pragma once

#include <string>
#include <utility>
#include <vector>

#include "wgs/nn.hpp"
#include "wgs/random.hpp"
#include "wgs/tape.hpp"

namespace wgs {

/**
 * One affine coupling layer.  The active coordinates are transformed as
 *   forward:  active <- (active - t(cond)) .* exp(-s(cond))
 *   inverse:  active <- active .* exp(+s(cond)) + t(cond)
 * and the conditioning coordinates pass through unchanged.  The scale output
 * is soft-clamped to |s| <= s_cap by s_cap*tanh(s/s_cap) before exp.
 */
struct CouplingLayer {
  std::vector<int> active;  // indices transformed by this layer
  std::vector<int> cond;    // indices feeding the t and s nets
  Mlp t_net;
  Mlp s_net;
};

/**
 * RealNVP transport map G = g_L o ... o g_1 with base N(0, base_std^2 I).
 * Partitions are half-half splits of a seeded random coordinate permutation,
 * redrawn every two layers with the two halves swapping roles, so every
 * coordinate is active at least once in each consecutive layer pair.
 */
struct FlowModel {
  int dim = 0;
  double base_std = 1.0;
  double s_cap = 5.0;
  std::vector<CouplingLayer> layers;

  static FlowModel create(int dim, int n_layers, int hidden_width, RandomStream& rng,
                          double base_std = 1.0);

  /// Pushforward x = G(z), batch rows.
  Matrix forward(const Matrix& z) const;
  Vector forward(const Vector& z) const;

  /// Exact layer-by-layer inverse z = G^{-1}(x).
  Matrix inverse(const Matrix& x) const;
  Vector inverse(const Vector& x) const;

  /// log p_theta(x) = log rho(G^{-1}(x)) + sum of s over layers (per row).
  Vector log_density(const Matrix& x) const;
  double log_density(const Vector& x) const;

  /// Draw z ~ base and return (z, G(z)); the trainer needs both.
  std::pair<Matrix, Matrix> sample_batch(int n, RandomStream& rng) const;

  /// Taped forward pass for training.
  Tape::Id forward_tape(Tape& tape, Tape::Id z);

  std::size_t param_count() const;
  void collect_params(std::vector<Param*>& out);
};

/**
 * Checkpoint i/o.  JSON with a format-version field holding the architecture
 * (dims, masks, widths, base) and all parameter arrays; doubles are written
 * with shortest round-trip precision so save/load is bit-exact.
 */
void save_checkpoint(const FlowModel& flow, const std::string& path,
                     std::uint64_t seed, const std::string& config_hash);
FlowModel load_checkpoint(const std::string& path);

}  // namespace wgs
