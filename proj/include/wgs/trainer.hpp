#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wgs/flow.hpp"
#include "wgs/sde_model.hpp"
#include "wgs/test_functions.hpp"

namespace wgs {

/**
 * Boundary penalty  L_b = mean_i sigmoid(c * rbar^2 * (q_i - 1))  with
 * q_i = sum_k ((x_ik - center_k)/radii_k)^2 and rbar^2 = mean_k radii_k^2.
 * For equal radii r this is exactly sigmoid(c (|x - x0|^2 - r^2)).
 */
struct BoundaryParams {
  double lambda = 0.0;
  double c = 1.0;
  Vector center;
  Vector radii;

  static BoundaryParams isotropic(double lambda, double c, double radius,
                                  const Vector& center);
  double rbar2() const { return radii.squaredNorm() / radii.size(); }
};

/// Mean boundary penalty over a batch of points (rows).
double boundary_penalty(const Matrix& points, const BoundaryParams& boundary);

/// All Algorithm-level hyper-parameters for one training run.
struct TrainConfig {
  int n_samples = 0;     // N base samples per outer iteration
  int n_test = 0;        // N_phi test functions per outer iteration
  int n_test_batch = 0;  // N_phi^b mini-batch size
  int n_iters = 0;       // N_I outer iterations
  CenterNoise center_noise;
  KappaSchedule kappa;
  BoundaryParams boundary;
  LrSchedule lr;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int snapshot_every = 0;    // 0 -> max(1, n_iters/100)
  int checkpoint_every = 0;  // outer iterations between checkpoints; 0 = final only
  std::string out_dir;       // when set: train_record.csv + checkpoints
  bool deterministic = true; // suppresses wall-clock bytes in the CSV

  void validate(int flow_dim) const;
};

/// Append-only per-inner-iteration record plus periodic metric snapshots.
struct TrainRecord {
  struct Row {
    int outer_iter = 0;
    int inner_iter = 0;  // global inner step index
    double weak_loss = 0.0;
    double boundary_loss = 0.0;
    double kappa = 0.0;  // mean kappa in effect for the mini-batch
    double lr = 0.0;
    double wall_seconds = 0.0;
  };
  struct Snapshot {
    int outer_iter = 0;
    std::map<std::string, double> metrics;
  };
  std::vector<Row> rows;
  std::vector<Snapshot> snapshots;
  bool aborted = false;
  std::string abort_reason;
};

/// Loss value broken into its parts plus batch diagnostics.
struct WgsLossValue {
  double total = 0.0;
  double weak = 0.0;
  double boundary = 0.0;
  double median_x_norm = 0.0;
  double max_x_norm = 0.0;
};

/**
 * Randomized weak loss (Eq.-2.15 shape):
 *   (1/m) sum_j [ (1/N) sum_i L*phi_j(G(z_i)) ]^2 + lambda * L_b
 * with gradients for every flow parameter accumulated into Param::grad
 * (call with zeroed grads).  The same forward pass x = G(z) is shared by all
 * test functions in the mini-batch.  Throws TrainingDivergence on NaN/Inf
 * with the offending kappa, center norm, and max |x_i| in the message.
 */
WgsLossValue wgs_loss(FlowModel& flow, const Matrix& z_batch, const Matrix& centers,
                      const Vector& kappas, const SdeSystem& system,
                      const BoundaryParams& boundary);

/// Forward-only loss evaluation (finite-difference oracle support).
WgsLossValue wgs_loss_value(const FlowModel& flow, const Matrix& z_batch,
                            const Matrix& centers, const Vector& kappas,
                            const SdeSystem& system, const BoundaryParams& boundary);

/// Optional training callbacks: periodic metric snapshots and early stopping.
struct TrainHooks {
  /// Called every snapshot interval; returned metrics land in the record/CSV.
  std::function<std::map<std::string, double>(const FlowModel&, int outer_iter)>
      snapshot;
  /// When it returns true on a snapshot, training stops after that iteration.
  std::function<bool(const std::map<std::string, double>&)> early_stop;
  /// Names of the snapshot metrics, fixing the CSV column set up front.
  std::vector<std::string> metric_names;
};

/**
 * Algorithm-1 training loop.  Per outer iteration: draw the z-batch, push it
 * forward once, select all N_phi centers from that x-batch (plus gamma
 * noise), split them into ceil(N_phi/N_phi^b) mini-batches, and for each
 * mini-batch re-evaluate the loss at the current parameters and take one
 * Adam step.  On divergence a checkpoint is written (when out_dir is set)
 * and TrainingDivergence is rethrown.
 */
TrainRecord train(const SdeSystem& system, FlowModel& flow, const TrainConfig& config,
                  const TrainHooks& hooks = {});

}  // namespace wgs
