#pragma once

#include "wgs/fp_solver.hpp"
#include "wgs/grid.hpp"
#include "wgs/sde_model.hpp"

namespace wgs {

struct HistogramResult {
  GridDensity density;
  Eigen::Index n_outside = 0;  // samples off the grid (excluded from the mass)
};

/// Cell-count histogram normalized to integrate to 1 over the grid.
HistogramResult histogram_density(const Matrix& samples, const GridSpec& grid);

/// Closed-form invariant density value (example1 and diag_ou).
double analytic_density(const BenchmarkProblem& problem, const Vector& x);

/// Closed-form density evaluated at cell centers and grid-normalized.
GridDensity analytic_reference(const BenchmarkProblem& problem, const GridSpec& grid);

/// True stationary mean/covariance where closed-form (example1, diag_ou).
void benchmark_moments(const BenchmarkProblem& problem, Vector& mean, Matrix& cov);

/**
 * Product-form reference for the coupled 10-d problem:
 *   p(x) = |det B|^{-1}  prod_k  p0(y_{2k}, y_{2k+1}),   y = B^{-1} x,
 * with p0 the FD stationary density of the decoupled pair system,
 * interpolated bilinearly off-grid.
 */
struct Coupled10dReference {
  GridDensity p0;
  Matrix b_inverse;
  double log_det_b = 0.0;

  double density(const Vector& x) const;
};

Coupled10dReference make_coupled10d_reference(const BenchmarkProblem& problem,
                                              int cells_per_axis = 400,
                                              double box_half_width = 2.5);

}  // namespace wgs
