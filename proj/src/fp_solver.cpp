#include "wgs/fp_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace wgs {

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/**
 * Generator matrix A with dp/dt = A p: one flux per interior face,
 *   F = b_f (p_c + p_n)/2 - (D_aa/h)(p_n - p_c),
 * subtracted from the donor cell and added to the receiver, divided by the
 * cell width.  Boundary faces carry zero flux, so columns of A sum to zero
 * and total mass is conserved exactly.
 */
Sparse build_generator(const SdeSystem& system, const GridSpec& grid) {
  const int nx = grid.counts[0];
  const int ny = grid.counts[1];
  const double hx = grid.step(0);
  const double hy = grid.step(1);
  const Matrix& D = system.constant_D;
  const double dxx = D(0, 0);
  const double dyy = D(1, 1);

  auto flat = [ny](int ix, int iy) { return ix * ny + iy; };

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(8) * nx * ny);

  Vector face(2);
  for (int ix = 0; ix + 1 < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      face << grid.lo(0) + (ix + 1) * hx, grid.center(1, iy);
      const double bf = system.drift(face)(0);
      const double cc = bf / 2 + dxx / hx;  // coefficient on the donor cell
      const double cn = bf / 2 - dxx / hx;  // coefficient on the receiver
      const int c = flat(ix, iy);
      const int n = flat(ix + 1, iy);
      triplets.emplace_back(c, c, -cc / hx);
      triplets.emplace_back(c, n, -cn / hx);
      triplets.emplace_back(n, c, cc / hx);
      triplets.emplace_back(n, n, cn / hx);
    }
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy + 1 < ny; ++iy) {
      face << grid.center(0, ix), grid.lo(1) + (iy + 1) * hy;
      const double bf = system.drift(face)(1);
      const double cc = bf / 2 + dyy / hy;
      const double cn = bf / 2 - dyy / hy;
      const int c = flat(ix, iy);
      const int n = flat(ix, iy + 1);
      triplets.emplace_back(c, c, -cc / hy);
      triplets.emplace_back(c, n, -cn / hy);
      triplets.emplace_back(n, c, cc / hy);
      triplets.emplace_back(n, n, cn / hy);
    }

  Sparse a(nx * ny, nx * ny);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

double residual_of(const Sparse& a, const Vector& p) {
  return (a * p).lpNorm<Eigen::Infinity>() / p.lpNorm<Eigen::Infinity>();
}

}  // namespace

FpSolution fd_solve_sfpe_2d(const SdeSystem& system, const GridSpec& grid,
                            const FpSolveOptions& options) {
  grid.validate();
  if (grid.dim() != 2)
    throw std::invalid_argument("fd_solve_sfpe_2d: 2-D grids only");
  if (system.dim != 2)
    throw std::invalid_argument("fd_solve_sfpe_2d: 2-D systems only");
  if (!system.constant_diffusion)
    throw std::invalid_argument("fd_solve_sfpe_2d: constant diffusion required");
  const Matrix& D = system.constant_D;
  const double off = std::max(std::abs(D(0, 1)), std::abs(D(1, 0)));
  if (off > 1e-12 * D.trace())
    throw std::invalid_argument("fd_solve_sfpe_2d: diagonal diffusion required");

  const Sparse a = build_generator(system, grid);
  const Eigen::Index n = a.rows();
  const double vol = grid.cell_volume();

  Vector p = Vector::Constant(n, 1.0 / (vol * n));  // uniform start, mass 1

  Eigen::SparseLU<Sparse> lu;
  Sparse identity(n, n);
  identity.setIdentity();

  double dt = options.dt0;
  bool factored = false;
  FpSolution out;
  double step_rate = std::numeric_limits<double>::infinity();

  for (int step = 0; step < options.max_steps; ++step) {
    if (!factored) {
      Sparse m = identity - dt * a;
      m.makeCompressed();
      lu.compute(m);
      if (lu.info() != Eigen::Success)
        throw std::runtime_error("fd_solve_sfpe_2d: sparse factorization failed");
      factored = true;
    }

    Vector p_new = lu.solve(p);
    const double mass = p_new.sum() * vol;
    if (!(mass > 0.0) || !p_new.allFinite())
      throw std::runtime_error("fd_solve_sfpe_2d: implicit step produced bad mass");
    p_new /= mass;

    step_rate = (p_new - p).lpNorm<1>() * vol / dt;
    p = std::move(p_new);
    out.steps = step + 1;

    if (dt < options.dt_max) {
      dt = std::min(options.dt_max, dt * options.dt_growth);
      factored = false;
      continue;  // still ramping the step; convergence judged at dt_max
    }
    if (step_rate <= options.step_tol) {
      out.residual = residual_of(a, p);
      if (out.residual <= options.residual_target) break;
    }
  }

  out.residual = residual_of(a, p);
  if (step_rate > options.step_tol || out.residual > options.residual_target) {
    std::ostringstream msg;
    msg << "fd_solve_sfpe_2d: no convergence within " << options.max_steps
        << " steps (step rate " << step_rate << ", residual " << out.residual << ")";
    throw std::runtime_error(msg.str());
  }

  out.density.spec = grid;
  out.density.values = p;
  out.density.normalize();
  return out;
}

}  // namespace wgs
