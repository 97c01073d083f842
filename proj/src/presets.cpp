#include "wgs/presets.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wgs {

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

KappaSchedule fixed_kappa(double value) {
  KappaSchedule k;
  k.kind = KappaSchedule::Kind::fixed;
  k.start = k.end = value;
  return k;
}

KappaSchedule linear_kappa(double start, double end, int span) {
  KappaSchedule k;
  k.kind = KappaSchedule::Kind::linear_decay;
  k.start = start;
  k.end = end;
  k.span = span;
  return k;
}

KappaSchedule exp_kappa(double start, double end, int span) {
  KappaSchedule k;
  k.kind = KappaSchedule::Kind::exponential_decay;
  k.start = start;
  k.end = end;
  k.span = span;
  return k;
}

KappaSchedule uniform_kappa(double lo, double hi) {
  KappaSchedule k;
  k.kind = KappaSchedule::Kind::uniform_random;
  k.lo = lo;
  k.hi = hi;
  return k;
}

LrSchedule exp_lr(double lr0, double factor, int span) {
  LrSchedule lr;
  lr.kind = LrSchedule::Kind::exp_decay;
  lr.lr0 = lr0;
  lr.factor = factor;
  lr.span = span;
  return lr;
}

LrSchedule const_lr(double lr0) {
  LrSchedule lr;
  lr.kind = LrSchedule::Kind::constant;
  lr.lr0 = lr0;
  return lr;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"example1", "example2", "lorenz",
                                                 "coupled10d", "diag_ou"};
  return names;
}

Preset make_preset(const std::string& name,
                   const std::map<std::string, double>& params) {
  Preset preset;
  preset.name = name;
  preset.problem = name;
  preset.problem_params = params;

  if (name == "example1") {
    preset.flow_layers = 6;
    preset.flow_width = 32;
    TrainConfig& t = preset.train;
    t.n_samples = 8000;
    t.n_test = 500;
    t.n_test_batch = 500;  // full batch
    t.n_iters = 10000;
    t.center_noise.gamma = 0.5;
    t.kappa = fixed_kappa(1.0);
    t.boundary = BoundaryParams::isotropic(10.0, 6.0, 6.0, Vector::Zero(2));
    // "Adam with a decay weight of learning rate": exponential to 0.1x.
    t.lr = exp_lr(1e-3, 0.1, t.n_iters);
    preset.has_eval_grid = true;
    preset.eval_grid = GridSpec::square2d(-3.0, 5.0, 200);
    return preset;
  }

  if (name == "example2") {
    const double eps = param_or(params, "eps", 0.2);
    preset.problem_params["eps"] = eps;
    preset.flow_layers = 6;
    preset.flow_width = 32;
    TrainConfig& t = preset.train;
    t.n_samples = 10000;
    t.n_test = 2000;
    t.n_test_batch = 400;
    t.n_iters = 50000;
    t.center_noise.gamma = 0.8;
    const int decay_span = 20000;  // kappa holds for the final 30000 iterations
    if (eps >= 0.15)
      t.kappa = linear_kappa(0.5, 0.25, decay_span);
    else if (eps >= 0.075)
      t.kappa = linear_kappa(0.45, 0.18, decay_span);
    else
      t.kappa = linear_kappa(0.45, 0.10, decay_span);
    t.boundary = BoundaryParams::isotropic(20.0, 10.0, 4.0, Vector::Zero(2));
    t.lr = exp_lr(1e-3, 0.1, t.n_iters);
    preset.has_eval_grid = true;
    Vector lo(2), hi(2);
    lo << -2.5, -3.0;
    hi << 2.5, 3.0;
    preset.eval_grid = GridSpec::box(lo, hi, {400, 400});
    return preset;
  }

  if (name == "lorenz") {
    preset.flow_layers = 12;
    preset.flow_width = 64;
    preset.base_std = std::sqrt(20.0);  // base N(0, 20 I)
    TrainConfig& t = preset.train;
    t.n_samples = 10000;
    t.n_test = 10000;
    t.n_test_batch = 1000;
    t.n_iters = 7500;
    t.center_noise.gamma = 5.0;
    t.kappa = fixed_kappa(5.0);
    Vector center(3), radii(3);
    center << 0.0, 0.0, 25.0;
    radii << 30.0, 40.0, 40.0;
    BoundaryParams bp;
    bp.lambda = 5.0;
    bp.c = 5.0;
    bp.center = center;
    bp.radii = radii;
    t.boundary = bp;
    t.lr = const_lr(2e-4);

    preset.has_em_reference = true;
    EmConfig& em = preset.em;
    em.dt = 1e-3;
    em.t_total = 1e5;
    em.t_burn_in = 100.0;
    em.thin_steps = 1000;
    em.n_trajectories = 1000;
    em.init_lo = Vector(3);
    em.init_hi = Vector(3);
    em.init_lo << -25.0, -30.0, -10.0;
    em.init_hi << 25.0, 30.0, 60.0;
    em.guard_radius = 1e4;
    Vector lo(2), hi(2);
    lo << -30.0, -40.0;
    hi << 30.0, 40.0;
    preset.em_marginal = GridSpec::box(lo, hi, {100, 100});  // (x, y) plane
    return preset;
  }

  if (name == "coupled10d") {
    const double eps = param_or(params, "eps", 0.1);
    preset.problem_params["eps"] = eps;
    preset.flow_layers = 12;
    preset.flow_width = 64;
    TrainConfig& t = preset.train;
    t.n_samples = 30000;
    t.n_test = 30000;
    t.n_test_batch = 100;
    t.n_iters = 100;
    t.center_noise.gamma = 0.3;
    t.kappa = linear_kappa(0.8, 0.4, t.n_iters);
    t.boundary = BoundaryParams::isotropic(5.0, 6.0, 2.0, Vector::Zero(10));
    t.lr = const_lr(1e-4);
    return preset;
  }

  if (name == "diag_ou") {
    const int d = static_cast<int>(param_or(params, "d", 40.0));
    preset.problem_params["d"] = d;
    preset.flow_layers = 20;
    preset.flow_width = 128;
    TrainConfig& t = preset.train;
    t.n_samples = 10000;
    t.n_iters = d >= 100 ? 50000 : 30000;
    t.center_noise.gamma = 0.7;
    t.center_noise.gamma_end = d >= 100 ? 0.14 : 0.21;
    t.center_noise.decay_span = t.n_iters;
    t.center_noise.exponential = true;
    t.boundary = BoundaryParams::isotropic(10.0, 6.0, 6.0, Vector::Zero(d));
    t.lr = exp_lr(1e-4, 0.1, t.n_iters);

    // Mixed kappa groups; published values at d = 40 and 100, scaled as
    // sqrt(d) elsewhere (kernel width tracks the sample-norm scale).
    const double kappa0 = d == 100 ? 15.0 : 11.0 * std::sqrt(d / 40.0);
    KappaSchedule mixed;
    mixed.kind = KappaSchedule::Kind::mixed_groups;
    if (d >= 100) {
      t.n_test = 300;
      mixed.group_sizes = {100, 100, 100};
      mixed.group_schedules = {fixed_kappa(kappa0),
                               exp_kappa(kappa0, 0.2 * kappa0, t.n_iters),
                               uniform_kappa(7.0, 9.8)};
    } else {
      t.n_test = 2 * std::max(1, 100 * d / 40);
      mixed.group_sizes = {t.n_test / 2, t.n_test - t.n_test / 2};
      mixed.group_schedules = {fixed_kappa(kappa0),
                               exp_kappa(kappa0, 0.2 * kappa0, t.n_iters)};
    }
    t.n_test_batch = t.n_test;  // full batch
    t.kappa = mixed;
    return preset;
  }

  std::ostringstream msg;
  msg << "unknown preset '" << name << "'; known:";
  for (const std::string& known : preset_names()) msg << " " << known;
  throw std::invalid_argument(msg.str());
}

}  // namespace wgs
