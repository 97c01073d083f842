#pragma once

#include <functional>
#include <map>
#include <string>

#include <Eigen/Dense>

namespace wgs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/**
 * An Ito SDE  dX = b(X) dt + sqrt(2) sigma(X) dW  with diffusion matrix
 * D = sigma sigma^T.  Drift and diffusion are pure callbacks; D is cached
 * when sigma is constant (true for every shipped benchmark).
 */
struct SdeSystem {
  int dim = 0;
  std::function<Vector(const Vector&)> drift;
  std::function<Matrix(const Vector&)> diffusion;         // sigma(x), d x w
  std::function<Matrix(const Vector&)> diffusion_matrix;  // D(x) = sigma sigma^T
  /// Jacobian of the drift, J[i][j] = d b_i / d x_j.  Analytic for all
  /// benchmarks; defaults to central finite differences when unset.
  std::function<Matrix(const Vector&)> drift_jacobian;
  bool constant_diffusion = false;
  Matrix constant_D;  // only valid when constant_diffusion

  /// Drift evaluated row-wise on a batch (rows are states).
  Matrix drift_batch(const Matrix& states) const;
  /// Drift Jacobian at one state (finite-difference fallback if no analytic one).
  Matrix jacobian(const Vector& x) const;
};

/// One of the paper-style benchmark problems together with its reference kind.
struct BenchmarkProblem {
  SdeSystem system;
  std::string name;
  std::map<std::string, double> params;
  enum class Reference { analytic, finite_difference, monte_carlo, factorized_2d };
  Reference reference = Reference::analytic;
  /// Mixing matrix of the coupled 10-d problem (empty otherwise).
  Matrix mixing;          // B
  Matrix mixing_inverse;  // B^{-1}
};

/**
 * L* phi(x) = b(x) . grad + D(x) : hess  for a scalar test function phi with
 * precomputed gradient and Hessian at x.
 */
double generator_apply(const SdeSystem& system, const Vector& grad, const Matrix& hess,
                       const Vector& x);

/**
 * Construct a benchmark by name: example1 | example2 | lorenz | coupled10d | diag_ou.
 * Recognized params: eps (example2, lorenz, coupled10d), beta1/beta2/beta3 (lorenz),
 * d (diag_ou).  Missing entries take the published defaults.
 */
BenchmarkProblem make_benchmark(const std::string& name,
                                const std::map<std::string, double>& params = {});

/// The banded 10x10 mixing matrix of the coupled 10-d problem.
Matrix coupled10d_mixing_matrix();

/**
 * The decoupled 2-d subsystem (u, v) of the coupled 10-d problem with
 * D = eps I; its stationary density is the p0 factor of the product-form
 * reference.
 */
SdeSystem coupled_pair_system(double eps);

}  // namespace wgs
