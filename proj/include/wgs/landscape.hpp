#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgs/random.hpp"

namespace wgs {

/// Two-mode 1-D Gaussian mixture target (modes at +-mu_star, unit variance).
struct MixtureTarget {
  double mu_star = 2.0;
  double w_star = 0.5;  // weight of the +mu_star component

  void validate() const;
};

/// Offsets of the parametric family around the target: weight, mean, variance.
struct MixtureParams {
  double theta_w = 0.0;
  double theta_mu = 0.0;
  double theta_sigma = 0.0;

  void validate(const MixtureTarget& target) const;  // 1+theta_sigma > 0 etc.
};

struct MixtureValue {
  double p = 0.0;
  double dp = 0.0;
  double ddp = 0.0;
};

/// Closed-form mixture density and first two x-derivatives.
MixtureValue mixture_density_and_derivs(const MixtureTarget& target,
                                        const MixtureParams& params, double x);

/// b(x) = (p*)'(x) / p*(x) — the drift whose invariant density is the target.
double drift_from_target(const MixtureTarget& target, double x);
double drift_derivative(const MixtureTarget& target, double x);

/// Fokker-Planck residual  Lp_theta = p'' - b' p - b p'  in closed form.
double fp_residual(const MixtureTarget& target, const MixtureParams& params, double x);

/// One exact draw from the parametric mixture (component choice + Gaussian).
double sample_mixture(const MixtureTarget& target, const MixtureParams& params,
                      RandomStream& rng);

/// Normalized Gaussian test function N(alpha, kappa2) with derivatives.
struct NormalizedTest1d {
  double alpha = 2.0;
  double kappa2 = 8.0;

  double value(double x) const;
  double deriv1(double x) const;
  double deriv2(double x) const;
};

/// L* phi (x) = b(x) phi'(x) + phi''(x) for the 1-D lab (D = 1).
double generator_on_test1d(const MixtureTarget& target, const NormalizedTest1d& test,
                           double x);

struct LossEstimate {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo standard error of `value`
};

/// E_{p_theta}[(Lp_theta)^2] by exact-mixture Monte Carlo.
LossEstimate pinn_loss(const MixtureTarget& target, const MixtureParams& params,
                       int n_mc, RandomStream& rng);

/**
 * (E_{p_theta}[L* phi])^2 by exact-mixture Monte Carlo; the standard error
 * uses the second-order delta method, which stays honest when the mean is
 * near zero: Var(m^2) ~ 4 m^2 s^2/n + 2 (s^2/n)^2.
 */
LossEstimate wgs_loss_single(const MixtureTarget& target, const MixtureParams& params,
                             const NormalizedTest1d& test, int n_mc, RandomStream& rng);

/// Adaptive quadrature of the PINN loss integral (oracle for the MC path).
double pinn_loss_quadrature(const MixtureTarget& target, const MixtureParams& params);

enum class SweepAxis { weight, mean, sigma };
enum class SweepLoss { pinn, wgs };

struct SweepConfig {
  SweepLoss loss = SweepLoss::pinn;
  SweepAxis axis = SweepAxis::sigma;
  std::vector<double> values;
  MixtureParams fixed;  // the two non-swept components
  NormalizedTest1d test;
  int n_mc = 1000000;
  std::uint64_t seed = 0;
};

struct SweepPoint {
  double theta = 0.0;
  bool ok = false;
  std::string error;  // invariant violation message when !ok
  double loss = 0.0;
  double std_error = 0.0;
};

/// One-axis sweep; per-point RNG streams split from the seed by point index.
std::vector<SweepPoint> sweep(const MixtureTarget& target, const SweepConfig& config);

/// Sweep CSV plus a gnuplot companion script ("<path>.gp").
void write_sweep_csv(const std::string& path, const MixtureTarget& target,
                     const SweepConfig& config, const std::vector<SweepPoint>& points);

}  // namespace wgs
