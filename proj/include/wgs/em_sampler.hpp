#pragma once

#include <cstdint>

#include "wgs/random.hpp"
#include "wgs/sde_model.hpp"

namespace wgs {

struct EmConfig {
  double dt = 1e-3;
  double t_total = 0.0;          // simulated time per trajectory
  double t_burn_in = 0.0;        // states before this time are discarded
  int thin_steps = 1;            // keep every thin_steps-th state after burn-in
  int n_trajectories = 1;
  Vector init_lo;                // uniform initial box
  Vector init_hi;
  double guard_radius = 1e6;     // |X| beyond this drops the trajectory
  std::uint64_t seed = 0;

  void validate(int dim) const;
};

struct EmResult {
  Matrix samples;        // pooled kept states, one per row
  int dropped = 0;       // trajectories discarded by the guard
  int n_trajectories = 0;
};

/**
 * Euler-Maruyama ensemble:  X_{k+1} = X_k + b(X_k) dt + sqrt(2 dt) sigma(X_k) xi_k.
 * Trajectory t draws from RandomStream(seed).split(t) — initial point first,
 * then one Gaussian vector per step — so the ensemble is reproducible and
 * order-independent.
 */
EmResult em_sample(const SdeSystem& system, const EmConfig& config);

}  // namespace wgs
