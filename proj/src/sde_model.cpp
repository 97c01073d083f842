#include "wgs/sde_model.hpp"

#include <cmath>
#include <stdexcept>

namespace wgs {

Matrix SdeSystem::drift_batch(const Matrix& states) const {
  Matrix out(states.rows(), states.cols());
  for (Eigen::Index i = 0; i < states.rows(); ++i)
    out.row(i) = drift(states.row(i).transpose()).transpose();
  return out;
}

Matrix SdeSystem::jacobian(const Vector& x) const {
  if (drift_jacobian) return drift_jacobian(x);
  // Central finite differences, column by column.
  const double h = 1e-6 * std::max(1.0, x.norm());
  Matrix J(dim, dim);
  Vector xp = x, xm = x;
  for (int j = 0; j < dim; ++j) {
    xp(j) += h;
    xm(j) -= h;
    J.col(j) = (drift(xp) - drift(xm)) / (2.0 * h);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  return J;
}

double generator_apply(const SdeSystem& system, const Vector& grad, const Matrix& hess,
                       const Vector& x) {
  if (grad.size() != system.dim || hess.rows() != system.dim ||
      hess.cols() != system.dim || x.size() != system.dim)
    throw std::invalid_argument("generator_apply: dimension mismatch");
  const Matrix D =
      system.constant_diffusion ? system.constant_D : system.diffusion_matrix(x);
  return system.drift(x).dot(grad) + D.cwiseProduct(hess).sum();
}

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

SdeSystem make_constant_diffusion_system(int dim,
                                         std::function<Vector(const Vector&)> drift,
                                         std::function<Matrix(const Vector&)> jac,
                                         Matrix D, Matrix sigma) {
  SdeSystem sys;
  sys.dim = dim;
  sys.drift = std::move(drift);
  sys.drift_jacobian = std::move(jac);
  sys.constant_diffusion = true;
  sys.constant_D = D;
  sys.diffusion = [sigma](const Vector&) { return sigma; };
  sys.diffusion_matrix = [D](const Vector&) { return D; };
  return sys;
}

// Decoupled 2-d subsystem of the 10-d problem: a linear sink spun by a
// state-dependent rotation of rate (1 + sin u).
Vector coupled2d_drift(double u, double v) {
  const double rot = 1.0 + std::sin(u);
  Vector b(2);
  b << -u + v * rot, -v - u * rot;
  return b;
}

Matrix coupled2d_jacobian(double u, double v) {
  const double rot = 1.0 + std::sin(u);
  const double drot = std::cos(u);
  Matrix J(2, 2);
  J << -1.0 + v * drot, rot, -rot - u * drot, -1.0;
  return J;
}

}  // namespace

SdeSystem coupled_pair_system(double eps) {
  auto drift = [](const Vector& y) -> Vector { return coupled2d_drift(y(0), y(1)); };
  auto jac = [](const Vector& y) -> Matrix { return coupled2d_jacobian(y(0), y(1)); };
  return make_constant_diffusion_system(2, drift, jac, eps * Matrix::Identity(2, 2),
                                        std::sqrt(eps) * Matrix::Identity(2, 2));
}

Matrix coupled10d_mixing_matrix() {
  Matrix B = Matrix::Zero(10, 10);
  for (int k = 0; k < 5; ++k) {
    B(2 * k, 2 * k) = 0.8;       // odd diagonal entries (1-based i = 2k-1)
    B(2 * k + 1, 2 * k + 1) = 1.25;  // even diagonal entries
  }
  for (int i = 0; i < 9; ++i) B(i, i + 1) = -0.5;  // first superdiagonal
  return B;
}

BenchmarkProblem make_benchmark(const std::string& name,
                                const std::map<std::string, double>& params) {
  BenchmarkProblem problem;
  problem.name = name;
  problem.params = params;

  if (name == "example1") {
    // dx = -(x-1) dt + sqrt(2) dW1, dy = -(y-1) dt + sqrt(2) dW2.
    auto drift = [](const Vector& x) -> Vector {
      Vector b(2);
      b << -(x(0) - 1.0), -(x(1) - 1.0);
      return b;
    };
    auto jac = [](const Vector&) -> Matrix { return -Matrix::Identity(2, 2); };
    problem.system = make_constant_diffusion_system(2, drift, jac, Matrix::Identity(2, 2),
                                                    Matrix::Identity(2, 2));
    problem.reference = BenchmarkProblem::Reference::analytic;
  } else if (name == "example2") {
    // dx = [x(1-x^2)/5 + y(1+sin x)] dt + sqrt(2 eps/5) dW1,
    // dy = [-y + 2x(1-x^2)(1+sin x)] dt + sqrt(2 eps) dW2.
    const double eps = param_or(params, "eps", 0.2);
    problem.params["eps"] = eps;
    auto drift = [](const Vector& x) -> Vector {
      const double u = x(0), v = x(1);
      const double cubic = u * (1.0 - u * u);
      const double rot = 1.0 + std::sin(u);
      Vector b(2);
      b << 0.2 * cubic + v * rot, -v + 2.0 * cubic * rot;
      return b;
    };
    auto jac = [](const Vector& x) -> Matrix {
      const double u = x(0), v = x(1);
      const double dcubic = 1.0 - 3.0 * u * u;
      const double rot = 1.0 + std::sin(u);
      const double drot = std::cos(u);
      Matrix J(2, 2);
      J << 0.2 * dcubic + v * drot, rot,
          2.0 * dcubic * rot + 2.0 * u * (1.0 - u * u) * drot, -1.0;
      return J;
    };
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = eps / 5.0;
    D(1, 1) = eps;
    Matrix sigma = D.cwiseSqrt();
    problem.system = make_constant_diffusion_system(2, drift, jac, D, sigma);
    problem.reference = BenchmarkProblem::Reference::finite_difference;
  } else if (name == "lorenz") {
    const double beta1 = param_or(params, "beta1", 10.0);
    const double beta2 = param_or(params, "beta2", 28.0);
    const double beta3 = param_or(params, "beta3", 8.0 / 3.0);
    const double eps = param_or(params, "eps", 20.0);
    problem.params = {{"beta1", beta1}, {"beta2", beta2}, {"beta3", beta3}, {"eps", eps}};
    auto drift = [beta1, beta2, beta3](const Vector& x) -> Vector {
      Vector b(3);
      b << beta1 * (x(1) - x(0)), x(0) * (beta2 - x(2)) - x(1), x(0) * x(1) - beta3 * x(2);
      return b;
    };
    auto jac = [beta1, beta2, beta3](const Vector& x) -> Matrix {
      Matrix J(3, 3);
      J << -beta1, beta1, 0.0, beta2 - x(2), -1.0, -x(0), x(1), x(0), -beta3;
      return J;
    };
    problem.system = make_constant_diffusion_system(
        3, drift, jac, eps * Matrix::Identity(3, 3),
        std::sqrt(eps) * Matrix::Identity(3, 3));
    problem.reference = BenchmarkProblem::Reference::monte_carlo;
  } else if (name == "coupled10d") {
    // x = B y where each (y_{2i-1}, y_{2i}) pair follows the decoupled 2-d
    // system; then dx = B g(B^{-1} x) dt + sqrt(2 eps) B dW.
    const double eps = param_or(params, "eps", 0.1);
    problem.params["eps"] = eps;
    Matrix B = coupled10d_mixing_matrix();
    Matrix Binv = B.inverse();
    problem.mixing = B;
    problem.mixing_inverse = Binv;
    auto g = [](const Vector& y) -> Vector {
      Vector out(10);
      for (int k = 0; k < 5; ++k)
        out.segment<2>(2 * k) = coupled2d_drift(y(2 * k), y(2 * k + 1));
      return out;
    };
    auto drift = [B, Binv, g](const Vector& x) -> Vector { return B * g(Binv * x); };
    auto jac = [B, Binv](const Vector& x) -> Matrix {
      const Vector y = Binv * x;
      Matrix Jg = Matrix::Zero(10, 10);
      for (int k = 0; k < 5; ++k)
        Jg.block<2, 2>(2 * k, 2 * k) = coupled2d_jacobian(y(2 * k), y(2 * k + 1));
      return B * Jg * Binv;
    };
    Matrix sigma = std::sqrt(eps) * B;
    problem.system =
        make_constant_diffusion_system(10, drift, jac, eps * B * B.transpose(), sigma);
    problem.reference = BenchmarkProblem::Reference::factorized_2d;
  } else if (name == "diag_ou") {
    // dx_i = -i (x_i - 1) dt + sqrt(2/i) dW_i; invariant N(1, diag(1/i^2)).
    const int d = static_cast<int>(param_or(params, "d", 10.0));
    if (d < 1) throw std::invalid_argument("diag_ou: d must be positive");
    problem.params["d"] = d;
    auto drift = [d](const Vector& x) -> Vector {
      Vector b(d);
      for (int i = 0; i < d; ++i) b(i) = -(i + 1.0) * (x(i) - 1.0);
      return b;
    };
    Vector rates(d);
    for (int i = 0; i < d; ++i) rates(i) = -(i + 1.0);
    auto jac = [J = Matrix(rates.asDiagonal())](const Vector&) -> Matrix { return J; };
    Matrix D = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) D(i, i) = 1.0 / (i + 1.0);
    problem.system = make_constant_diffusion_system(d, drift, jac, D, D.cwiseSqrt());
    problem.reference = BenchmarkProblem::Reference::analytic;
  } else {
    throw std::invalid_argument(
        "unknown benchmark '" + name +
        "'; known: example1, example2, lorenz, coupled10d, diag_ou");
  }
  return problem;
}

}  // namespace wgs
