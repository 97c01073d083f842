#pragma once

#include "wgs/grid.hpp"
#include "wgs/sde_model.hpp"

namespace wgs {

struct FpSolveOptions {
  double dt0 = 0.1;               // initial implicit-Euler step
  double dt_growth = 4.0;         // step multiplier (refactorization per change)
  double dt_max = 1e9;            // cap on the step
  double step_tol = 1e-10;        // stop when |p_new - p|_L1 / dt <= step_tol
  double residual_target = 1e-8;  // and |A p|_inf / |p|_inf <= residual_target
  int max_steps = 5000;
};

struct FpSolution {
  GridDensity density;
  double residual = 0.0;  // |A p|_inf / |p|_inf of the returned density
  int steps = 0;
};

/**
 * Stationary Fokker-Planck solve on a 2-D box: second-order finite-volume
 * discretization of  dp/dt = div(-b p + D grad p)  with zero-flux faces at
 * the box boundary, driven to steady state by implicit Euler with a growing
 * step (a damped inverse iteration on the singular generator).  Requires a
 * constant diagonal diffusion matrix.  The result is clamped nonnegative and
 * grid-normalized.
 */
FpSolution fd_solve_sfpe_2d(const SdeSystem& system, const GridSpec& grid,
                            const FpSolveOptions& options = {});

}  // namespace wgs
