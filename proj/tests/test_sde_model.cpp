#include <cmath>

#include "doctest.h"
#include "wgs/random.hpp"
#include "wgs/reference.hpp"
#include "wgs/sde_model.hpp"

using namespace wgs;

namespace {

// Independent finite-difference Jacobian for checking the analytic ones.
Matrix fd_jacobian(const SdeSystem& system, const Vector& x, double h = 1e-6) {
  Matrix jac(system.dim, system.dim);
  for (int j = 0; j < system.dim; ++j) {
    Vector hi = x, lo = x;
    hi(j) += h;
    lo(j) -= h;
    jac.col(j) = (system.drift(hi) - system.drift(lo)) / (2 * h);
  }
  return jac;
}

}  // namespace

TEST_CASE("example1 is the unit-shifted OU process") {
  BenchmarkProblem p = make_benchmark("example1");
  CHECK(p.system.dim == 2);
  CHECK(p.reference == BenchmarkProblem::Reference::analytic);
  Vector x(2);
  x << 0.0, 0.0;
  CHECK(p.system.drift(x).isApprox(Vector::Ones(2), 1e-14));
  x << 3.0, -2.0;
  Vector want(2);
  want << -2.0, 3.0;  // -(x - 1)
  CHECK(p.system.drift(x).isApprox(want, 1e-14));
  CHECK(p.system.constant_diffusion);
  CHECK(p.system.constant_D.isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST_CASE("example2 drift matches the hand formula") {
  BenchmarkProblem p = make_benchmark("example2", {{"eps", 0.2}});
  Vector x(2);
  x << 1.0, 2.0;
  const Vector b = p.system.drift(x);
  // b1 = x(1-x^2)/5 + y(1+sin x), b2 = -y + 2x(1-x^2)(1+sin x)
  CHECK(b(0) == doctest::Approx(2.0 * (1.0 + std::sin(1.0))).epsilon(1e-14));
  CHECK(b(1) == doctest::Approx(-2.0).epsilon(1e-14));
  x << 0.5, -1.0;
  const Vector b2 = p.system.drift(x);
  const double s = 1.0 + std::sin(0.5);
  CHECK(b2(0) == doctest::Approx(0.5 * 0.75 / 5.0 - s).epsilon(1e-14));
  CHECK(b2(1) == doctest::Approx(1.0 + 2.0 * 0.5 * 0.75 * s).epsilon(1e-14));
  Matrix want_d = Matrix::Zero(2, 2);
  want_d(0, 0) = 0.2 / 5.0;
  want_d(1, 1) = 0.2;
  CHECK(p.system.constant_D.isApprox(want_d, 1e-14));
}

TEST_CASE("lorenz drift and diffusion match the published system") {
  BenchmarkProblem p = make_benchmark("lorenz");
  CHECK(p.system.dim == 3);
  Vector x(3);
  x << 1.0, 1.0, 1.0;
  const Vector b = p.system.drift(x);
  CHECK(b(0) == doctest::Approx(0.0).epsilon(1e-14));          // 10(y-x)
  CHECK(b(1) == doctest::Approx(26.0).epsilon(1e-14));         // x(28-z)-y
  CHECK(b(2) == doctest::Approx(1.0 - 8.0 / 3.0).epsilon(1e-14));  // xy - 8/3 z
  CHECK(p.system.constant_D.isApprox(20.0 * Matrix::Identity(3, 3), 1e-12));
}

TEST_CASE("lorenz accepts parameter overrides") {
  BenchmarkProblem p =
      make_benchmark("lorenz", {{"eps", 5.0}, {"beta1", 9.0}, {"beta2", 20.0}});
  Vector x(3);
  x << 2.0, 1.0, 0.0;
  CHECK(p.system.drift(x)(0) == doctest::Approx(9.0 * (1.0 - 2.0)).epsilon(1e-14));
  CHECK(p.system.drift(x)(1) == doctest::Approx(2.0 * 20.0 - 1.0).epsilon(1e-14));
  CHECK(p.system.constant_D(0, 0) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("diag_ou has the closed-form moments") {
  BenchmarkProblem p = make_benchmark("diag_ou", {{"d", 3}});
  CHECK(p.system.dim == 3);
  Vector x = Vector::Zero(3);
  const Vector b = p.system.drift(x);  // -i (x_i - 1)
  CHECK(b(0) == doctest::Approx(1.0));
  CHECK(b(1) == doctest::Approx(2.0));
  CHECK(b(2) == doctest::Approx(3.0));
  CHECK(p.system.constant_D(1, 1) == doctest::Approx(0.5));
  Vector mean;
  Matrix cov;
  benchmark_moments(p, mean, cov);
  CHECK(mean.isApprox(Vector::Ones(3), 1e-14));
  Matrix want = Matrix::Zero(3, 3);
  want(0, 0) = 1.0;
  want(1, 1) = 0.25;
  want(2, 2) = 1.0 / 9.0;
  CHECK(cov.isApprox(want, 1e-14));
}

TEST_CASE("example1 closed-form moments") {
  BenchmarkProblem p = make_benchmark("example1");
  Vector mean;
  Matrix cov;
  benchmark_moments(p, mean, cov);
  CHECK(mean.isApprox(Vector::Ones(2), 1e-14));
  CHECK(cov.isApprox(Matrix::Identity(2, 2), 1e-14));
}

TEST_CASE("coupled10d mixes pairwise dynamics through B") {
  BenchmarkProblem p = make_benchmark("coupled10d");
  CHECK(p.system.dim == 10);
  const Matrix B = coupled10d_mixing_matrix();
  CHECK(p.mixing.isApprox(B, 1e-14));
  CHECK((p.mixing * p.mixing_inverse).isApprox(Matrix::Identity(10, 10), 1e-12));

  // Structure: alternating 0.8 / 1.25 diagonal, -0.5 superdiagonal.
  CHECK(B(0, 0) == doctest::Approx(0.8));
  CHECK(B(1, 1) == doctest::Approx(1.25));
  CHECK(B(3, 4) == doctest::Approx(-0.5));
  CHECK(B(4, 3) == doctest::Approx(0.0));

  // x-drift must equal B g(B^{-1} x) with g the stacked pair dynamics.
  RandomStream rng(3);
  const SdeSystem pair = coupled_pair_system(0.1);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector y = rng.normal_vector(10);
    Vector g(10);
    for (int k = 0; k < 5; ++k) g.segment(2 * k, 2) = pair.drift(y.segment(2 * k, 2));
    const Vector x = B * y;
    CHECK(p.system.drift(x).isApprox(B * g, 1e-10));
  }

  // D = eps B B^T with eps = 0.1.
  CHECK(p.system.constant_D.isApprox(0.1 * B * B.transpose(), 1e-12));
}

TEST_CASE("coupled pair system drift formula") {
  const SdeSystem pair = coupled_pair_system(0.1);
  Vector y(2);
  y << 0.3, -0.7;
  const double s = 1.0 + std::sin(0.3);
  const Vector b = pair.drift(y);
  CHECK(b(0) == doctest::Approx(-0.3 - 0.7 * s).epsilon(1e-14));
  CHECK(b(1) == doctest::Approx(0.7 - 0.3 * s).epsilon(1e-14));
  CHECK(pair.constant_D.isApprox(0.1 * Matrix::Identity(2, 2), 1e-14));
}

TEST_CASE("analytic drift Jacobians agree with finite differences") {
  RandomStream rng(8);
  for (const char* name : {"example1", "example2", "lorenz", "coupled10d", "diag_ou"}) {
    BenchmarkProblem p = make_benchmark(name);
    for (int rep = 0; rep < 3; ++rep) {
      const Vector x = rng.normal_vector(p.system.dim) * 1.5;
      const Matrix analytic = p.system.jacobian(x);
      const Matrix numeric = fd_jacobian(p.system, x);
      CHECK((analytic - numeric).cwiseAbs().maxCoeff() <
            1e-5 * std::max(1.0, numeric.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("drift_batch matches row-wise drift") {
  BenchmarkProblem p = make_benchmark("example2");
  RandomStream rng(4);
  const Matrix states = rng.normal_matrix(6, 2);
  const Matrix batch = p.system.drift_batch(states);
  for (int i = 0; i < 6; ++i)
    CHECK(batch.row(i).transpose().isApprox(p.system.drift(states.row(i).transpose()),
                                            1e-14));
}

TEST_CASE("diffusion callback is consistent with D") {
  for (const char* name : {"example1", "example2", "lorenz", "coupled10d", "diag_ou"}) {
    BenchmarkProblem p = make_benchmark(name);
    const Vector x = Vector::Zero(p.system.dim);
    const Matrix sigma = p.system.diffusion(x);
    CHECK((sigma * sigma.transpose()).isApprox(p.system.constant_D, 1e-12));
    CHECK(p.system.diffusion_matrix(x).isApprox(p.system.constant_D, 1e-12));
  }
}

TEST_CASE("generator_apply composes drift and diffusion terms") {
  BenchmarkProblem p = make_benchmark("example1");
  Vector x(2), grad(2);
  x << 2.0, 0.0;
  grad << 0.5, -1.0;
  Matrix hess(2, 2);
  hess << 1.0, 0.2, 0.2, -0.5;
  // b = (-1, 1); b.grad = -0.5 - 1.0; D:hess = trace(hess) = 0.5
  CHECK(generator_apply(p.system, grad, hess, x) ==
        doctest::Approx(-1.5 + 0.5).epsilon(1e-14));
}

TEST_CASE("unknown benchmark name throws") {
  CHECK_THROWS_AS(make_benchmark("nope"), std::invalid_argument);
  CHECK_THROWS_AS(make_benchmark("diag_ou", {{"d", 0}}), std::invalid_argument);
}
