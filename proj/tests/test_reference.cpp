#include <cmath>
#include <cstdio>
#include <numbers>

#include "doctest.h"
#include "wgs/em_sampler.hpp"
#include "wgs/fp_solver.hpp"
#include "wgs/metrics.hpp"
#include "wgs/reference.hpp"

using namespace wgs;

namespace {

double gauss2(double x, double mx, double vx, double y, double my, double vy) {
  const double qx = (x - mx) * (x - mx) / vx;
  const double qy = (y - my) * (y - my) / vy;
  return std::exp(-0.5 * (qx + qy)) /
         (2.0 * std::numbers::pi * std::sqrt(vx * vy));
}

}  // namespace

TEST_CASE("grid spec indexing round-trips and the step is uniform") {
  Vector lo(2), hi(2);
  lo << -1.0, 0.0;
  hi << 3.0, 2.0;
  const GridSpec grid = GridSpec::box(lo, hi, {8, 5});
  CHECK(grid.dim() == 2);
  CHECK(grid.n_cells() == 40);
  CHECK(grid.step(0) == doctest::Approx(0.5));
  CHECK(grid.step(1) == doctest::Approx(0.4));
  CHECK(grid.cell_volume() == doctest::Approx(0.2));
  CHECK(grid.center(0, 0) == doctest::Approx(-0.75));
  CHECK(grid.center(1, 4) == doctest::Approx(1.8));

  for (Eigen::Index flat = 0; flat < grid.n_cells(); ++flat)
    CHECK(grid.flat_index(grid.multi_index(flat)) == flat);

  Vector inside(2), outside(2);
  inside << 2.9, 0.1;
  outside << 3.1, 0.1;
  CHECK(grid.contains(inside));
  CHECK_FALSE(grid.contains(outside));
  CHECK(grid.cell_of(inside)[0] == 7);
  CHECK(grid.cell_of(outside)[0] == 7);  // clamped

  CHECK_THROWS_AS(GridSpec::box(lo, hi, {1, 5}), std::invalid_argument);
  Vector bad_hi(2);
  bad_hi << -2.0, 2.0;
  CHECK_THROWS_AS(GridSpec::box(lo, bad_hi, {8, 5}), std::invalid_argument);
}

TEST_CASE("grid density normalization and exact bilinear interpolation") {
  const GridSpec grid = GridSpec::square2d(0.0, 1.0, 10);
  GridDensity density = GridDensity::zeros(grid);
  // Affine field is reproduced exactly by bilinear interpolation.
  for (Eigen::Index flat = 0; flat < grid.n_cells(); ++flat) {
    const Vector c = grid.cell_center(flat);
    density.values(flat) = 2.0 * c(0) + 3.0 * c(1) + 1.0;
  }
  Vector probe(2);
  probe << 0.4321, 0.634;
  CHECK(density.interp2(probe) ==
        doctest::Approx(2.0 * 0.4321 + 3.0 * 0.634 + 1.0).epsilon(1e-12));
  probe << 1.7, 0.5;  // outside the box
  CHECK(density.interp2(probe) == 0.0);

  density.normalize();
  CHECK(density.integral() == doctest::Approx(1.0).epsilon(1e-12));

  GridDensity flat_zero = GridDensity::zeros(grid);
  CHECK_THROWS_AS(flat_zero.normalize(), std::runtime_error);
}

TEST_CASE("image2d puts the max-x1 row on top") {
  const GridSpec grid = GridSpec::box(Vector::Zero(2), Vector::Ones(2), {3, 2});
  GridDensity density = GridDensity::zeros(grid);
  density.at({2, 1}) = 7.0;  // high x0, high x1
  const Matrix img = density.image2d();
  CHECK(img.rows() == 2);
  CHECK(img.cols() == 3);
  CHECK(img(0, 2) == 7.0);  // top-right
  CHECK(img.sum() == 7.0);
}

TEST_CASE("grid density files round-trip") {
  const GridSpec grid = GridSpec::box(Vector::Zero(2), Vector::Ones(2), {4, 3});
  GridDensity density = GridDensity::zeros(grid);
  RandomStream rng(5);
  for (Eigen::Index i = 0; i < density.values.size(); ++i)
    density.values(i) = rng.uniform() + 0.1;
  const std::string path = "/tmp/wgs_density_roundtrip.csv";
  write_grid_density(path, density, "beef", 9);
  const GridDensity loaded = read_grid_density(path);
  CHECK(loaded.spec.same_as(grid));
  CHECK(loaded.values == density.values);  // %.17g is lossless for doubles
  std::remove(path.c_str());
}

TEST_CASE("stationary solver reproduces the example1 Gaussian") {
  BenchmarkProblem problem = make_benchmark("example1");
  const GridSpec grid = GridSpec::square2d(-3.0, 5.0, 128);
  const FpSolution solution = fd_solve_sfpe_2d(problem.system, grid);
  CHECK(solution.residual <= 1e-8);
  CHECK(solution.density.integral() == doctest::Approx(1.0).epsilon(1e-10));
  const GridDensity exact = analytic_reference(problem, grid);
  CHECK(relative_l2_error(solution.density, exact) < 2e-2);
}

TEST_CASE("stationary solver on pure diffusion gives the uniform density") {
  SdeSystem system;
  system.dim = 2;
  system.drift = [](const Vector&) { return Vector(Vector::Zero(2)); };
  system.diffusion = [](const Vector&) {
    return Matrix(std::sqrt(0.7) * Matrix::Identity(2, 2));
  };
  system.diffusion_matrix = [](const Vector&) {
    return Matrix(0.7 * Matrix::Identity(2, 2));
  };
  system.constant_diffusion = true;
  system.constant_D = 0.7 * Matrix::Identity(2, 2);

  const GridSpec grid = GridSpec::square2d(0.0, 1.0, 32);
  const FpSolution solution = fd_solve_sfpe_2d(system, grid);
  const Vector want = Vector::Constant(grid.n_cells(), 1.0);
  CHECK((solution.density.values - want).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("stationary solver handles anisotropic diagonal diffusion") {
  // diag_ou with d = 2: exact density N((1,1), diag(1, 1/4)).
  BenchmarkProblem problem = make_benchmark("diag_ou", {{"d", 2}});
  Vector lo(2), hi(2);
  lo << -3.0, -1.0;
  hi << 5.0, 3.0;
  const GridSpec grid = GridSpec::box(lo, hi, {96, 96});
  const FpSolution solution = fd_solve_sfpe_2d(problem.system, grid);
  const GridDensity exact = analytic_reference(problem, grid);
  CHECK(relative_l2_error(solution.density, exact) < 2e-2);
}

TEST_CASE("example2 stationary density is bimodal at (+-1, 0)") {
  BenchmarkProblem problem = make_benchmark("example2", {{"eps", 0.2}});
  const GridSpec grid = GridSpec::square2d(-2.5, 2.5, 128);
  const FpSolution solution = fd_solve_sfpe_2d(problem.system, grid);
  const auto peaks = find_local_maxima_2d(solution.density, 0.2, 5);
  REQUIRE(peaks.size() == 2);
  // Modes near (1, 0) and (-1, 0), opposite x signs.
  CHECK(peaks[0].location(0) * peaks[1].location(0) < 0.0);
  for (const GridPeak& peak : peaks) {
    CHECK(std::abs(std::abs(peak.location(0)) - 1.0) < 0.12);
    CHECK(std::abs(peak.location(1)) < 0.12);
  }
}

TEST_CASE("stationary solver rejects unsupported systems") {
  BenchmarkProblem lorenz = make_benchmark("lorenz");
  const GridSpec grid3 = GridSpec::box(Vector::Zero(3), Vector::Ones(3), {4, 4, 4});
  CHECK_THROWS_AS(fd_solve_sfpe_2d(lorenz.system, grid3), std::invalid_argument);

  SdeSystem skewed;
  skewed.dim = 2;
  skewed.drift = [](const Vector& x) { return Vector(-x); };
  Matrix d_off(2, 2);
  d_off << 1.0, 0.4, 0.4, 1.0;
  skewed.diffusion_matrix = [d_off](const Vector&) { return d_off; };
  skewed.diffusion = [d_off](const Vector&) {
    return Matrix(Eigen::LLT<Matrix>(d_off).matrixL());
  };
  skewed.constant_diffusion = true;
  skewed.constant_D = d_off;
  const GridSpec grid = GridSpec::square2d(-2.0, 2.0, 16);
  CHECK_THROWS_AS(fd_solve_sfpe_2d(skewed, grid), std::invalid_argument);
}

TEST_CASE("stationary solver reports non-convergence") {
  BenchmarkProblem problem = make_benchmark("example1");
  const GridSpec grid = GridSpec::square2d(-3.0, 5.0, 16);
  FpSolveOptions options;
  options.max_steps = 1;  // cannot possibly converge
  CHECK_THROWS_AS(fd_solve_sfpe_2d(problem.system, grid, options),
                  std::runtime_error);
}

TEST_CASE("histogram density counts cells and outsiders") {
  const GridSpec grid = GridSpec::square2d(0.0, 1.0, 2);
  Matrix samples(5, 2);
  samples << 0.1, 0.1,   // cell (0,0)
      0.9, 0.1,          // cell (1,0)
      0.6, 0.7,          // cell (1,1)
      0.7, 0.6,          // cell (1,1)
      1.5, 0.5;          // outside
  const HistogramResult hist = histogram_density(samples, grid);
  CHECK(hist.n_outside == 1);
  CHECK(hist.density.at({0, 0}) == doctest::Approx(1.0));   // 1/4 / (1/4)
  CHECK(hist.density.at({1, 0}) == doctest::Approx(1.0));
  CHECK(hist.density.at({1, 1}) == doctest::Approx(2.0));
  CHECK(hist.density.at({0, 1}) == doctest::Approx(0.0));
  CHECK(hist.density.integral() == doctest::Approx(1.0));
}

TEST_CASE("analytic densities match hand formulas") {
  BenchmarkProblem ou = make_benchmark("example1");
  Vector x(2);
  x << 0.3, 1.9;
  CHECK(analytic_density(ou, x) ==
        doctest::Approx(gauss2(0.3, 1.0, 1.0, 1.9, 1.0, 1.0)).epsilon(1e-12));

  BenchmarkProblem diag = make_benchmark("diag_ou", {{"d", 2}});
  CHECK(analytic_density(diag, x) ==
        doctest::Approx(gauss2(0.3, 1.0, 1.0, 1.9, 1.0, 0.25)).epsilon(1e-12));

  BenchmarkProblem bistable = make_benchmark("example2");
  CHECK_THROWS_AS(analytic_density(bistable, x), std::invalid_argument);

  const GridSpec grid = GridSpec::square2d(-4.0, 6.0, 64);
  const GridDensity ref = analytic_reference(ou, grid);
  CHECK(ref.integral() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("euler-maruyama recovers the example1 moments") {
  BenchmarkProblem problem = make_benchmark("example1");
  EmConfig config;
  config.dt = 0.01;
  config.t_total = 60.0;
  config.t_burn_in = 10.0;
  config.thin_steps = 10;
  config.n_trajectories = 40;
  config.init_lo = Vector::Constant(2, -2.0);
  config.init_hi = Vector::Constant(2, 2.0);
  config.seed = 12;

  const EmResult result = em_sample(problem.system, config);
  CHECK(result.dropped == 0);
  // 40 trajectories x (5000 kept steps / 10 thinning)
  CHECK(result.samples.rows() == 40 * 500);
  const Vector mean = result.samples.colwise().mean().transpose();
  CHECK((mean - Vector::Ones(2)).cwiseAbs().maxCoeff() < 0.08);
  const Matrix centered = result.samples.rowwise() - mean.transpose();
  const Matrix cov =
      centered.transpose() * centered / (result.samples.rows() - 1.0);
  CHECK(cov(0, 0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::abs(cov(0, 1)) < 0.1);
}

TEST_CASE("euler-maruyama is deterministic per seed and keeps the step count") {
  BenchmarkProblem problem = make_benchmark("example1");
  EmConfig config;
  config.dt = 0.1;
  config.t_total = 1.0;
  config.t_burn_in = 0.3;
  config.thin_steps = 2;
  config.n_trajectories = 3;
  config.init_lo = Vector::Zero(2);
  config.init_hi = Vector::Zero(2);
  config.seed = 4;
  const EmResult a = em_sample(problem.system, config);
  const EmResult b = em_sample(problem.system, config);
  // 10 steps, 3 burn-in -> kept at steps 5, 7, 9 per trajectory.
  CHECK(a.samples.rows() == 9);
  CHECK(a.samples == b.samples);
}

TEST_CASE("escaping trajectories are dropped; all-escape throws") {
  SdeSystem unstable;
  unstable.dim = 2;
  unstable.drift = [](const Vector& x) { return Vector(3.0 * x); };
  unstable.diffusion = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
  unstable.diffusion_matrix = unstable.diffusion;
  unstable.constant_diffusion = true;
  unstable.constant_D = Matrix::Identity(2, 2);

  EmConfig config;
  config.dt = 0.1;
  config.t_total = 20.0;
  config.t_burn_in = 0.0;
  config.n_trajectories = 4;
  config.init_lo = Vector::Constant(2, 1.0);
  config.init_hi = Vector::Constant(2, 2.0);
  config.guard_radius = 50.0;
  config.seed = 3;
  CHECK_THROWS_AS(em_sample(unstable, config), std::runtime_error);
}

TEST_CASE("product-form reference factorizes through the mixing matrix") {
  BenchmarkProblem problem = make_benchmark("coupled10d");
  const Coupled10dReference ref = make_coupled10d_reference(problem, 80, 2.0);
  CHECK(ref.p0.integral() == doctest::Approx(1.0).epsilon(1e-10));

  // At x = B y the density is |det B|^-1 prod_k p0(y_pair_k).
  Vector y = Vector::Zero(10);
  y << 0.2, -0.1, 0.0, 0.3, -0.2, 0.1, 0.25, 0.0, -0.15, 0.05;
  const Vector x = problem.mixing * y;
  double want = std::exp(-ref.log_det_b);
  for (int k = 0; k < 5; ++k) {
    Vector pair(2);
    pair << y(2 * k), y(2 * k + 1);
    want *= ref.p0.interp2(pair);
  }
  CHECK(ref.density(x) == doctest::Approx(want).epsilon(1e-12));
  CHECK(ref.density(x) > 0.0);

  // Far outside the factor box the density is exactly zero.
  CHECK(ref.density(Vector::Constant(10, 100.0)) == 0.0);

  // The density has its mode at the origin of the pair coordinates.
  CHECK(ref.density(Vector::Zero(10)) > ref.density(x));
}
