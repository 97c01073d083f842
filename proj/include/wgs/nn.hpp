#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "wgs/random.hpp"
#include "wgs/tape.hpp"

namespace wgs {

/// Thrown when training blows up (NaN/Inf loss or gradients); carries the
/// diagnostic the trainer attaches before aborting.
struct TrainingDivergence : std::runtime_error {
  explicit TrainingDivergence(const std::string& what) : std::runtime_error(what) {}
};

/// Learning-rate schedule: constant | exponential decay | step decay.
struct LrSchedule {
  enum class Kind { constant, exp_decay, step_decay };
  Kind kind = Kind::constant;
  double lr0 = 1e-3;
  double factor = 0.1;  // total multiplier reached at `span` (exp) or per step (step)
  int span = 1;         // exp: steps to reach lr0*factor (held after); step: steps per drop

  double at(int step) const {
    switch (kind) {
      case Kind::constant:
        return lr0;
      case Kind::exp_decay: {
        const double t =
            span <= 0 ? 1.0 : std::min(1.0, static_cast<double>(step) / span);
        return lr0 * std::pow(factor, t);
      }
      case Kind::step_decay:
        return lr0 * std::pow(factor, span <= 0 ? 0 : step / span);
    }
    return lr0;
  }
};

/**
 * Dense MLP with three hidden layers and LeakyReLU activations (linear output
 * layer).  Weights init uniform in +-sqrt(6/(fan_in+fan_out)), biases zero;
 * `zero_last` additionally zeroes the output layer so the net starts as the
 * constant zero function (used for the coupling scale nets).
 */
struct Mlp {
  std::vector<int> layer_dims;  // input, hidden x3, output
  struct Layer {
    Param W;  // out x in
    Param b;  // out x 1
  };
  std::vector<Layer> layers;
  double act_slope = 0.01;

  static Mlp create(const std::vector<int>& dims, RandomStream& rng,
                    bool zero_last = false);

  /// Plain forward pass over a batch (rows are inputs).
  Matrix forward(const Matrix& x) const;
  Vector forward(const Vector& x) const;

  /// Taped forward pass for gradient accumulation.
  Tape::Id forward_tape(Tape& tape, Tape::Id x);

  std::size_t param_count() const;
  void collect_params(std::vector<Param*>& out);
};

/// Adam with bias correction; learning rate taken from the schedule per step.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  LrSchedule lr;
  int step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;

  void init(const std::vector<Param*>& params);
};

/**
 * One Adam update from the gradients currently held in the params.  Throws
 * TrainingDivergence if any gradient is non-finite (training blow-up signal).
 * The two-argument form reads the learning rate from the state's schedule,
 * indexed by Adam step; the trainer instead passes the rate for the current
 * outer iteration so that mini-batches within an iteration share it.
 */
void adam_step(std::vector<Param*>& params, AdamState& state, double lr);
void adam_step(std::vector<Param*>& params, AdamState& state);

}  // namespace wgs
