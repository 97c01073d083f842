#include "wgs/reference.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wgs {

namespace {

double gaussian_log_density(const Vector& x, const Vector& mean, const Vector& variances) {
  double log_p = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double diff = x(i) - mean(i);
    log_p += -0.5 * std::log(2.0 * std::numbers::pi * variances(i)) -
             0.5 * diff * diff / variances(i);
  }
  return log_p;
}

void closed_form_moments(const BenchmarkProblem& problem, Vector& mean,
                         Vector& variances) {
  if (problem.name == "example1") {
    mean = Vector::Constant(2, 1.0);
    variances = Vector::Constant(2, 1.0);
    return;
  }
  if (problem.name == "diag_ou") {
    const int d = problem.system.dim;
    mean = Vector::Constant(d, 1.0);
    variances.resize(d);
    for (int i = 0; i < d; ++i) variances(i) = 1.0 / ((i + 1.0) * (i + 1.0));
    return;
  }
  throw std::invalid_argument("no closed-form invariant density for '" +
                              problem.name + "'");
}

}  // namespace

HistogramResult histogram_density(const Matrix& samples, const GridSpec& grid) {
  grid.validate();
  if (samples.rows() == 0) throw std::invalid_argument("histogram_density: no samples");
  if (samples.cols() != grid.dim())
    throw std::invalid_argument("histogram_density: sample/grid dimension mismatch");

  HistogramResult out;
  out.density = GridDensity::zeros(grid);
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const Vector x = samples.row(i).transpose();
    if (!grid.contains(x)) {
      out.n_outside += 1;
      continue;
    }
    out.density.values(grid.flat_index(grid.cell_of(x))) += 1.0;
    inside += 1;
  }
  if (inside == 0)
    throw std::runtime_error("histogram_density: every sample fell outside the grid");
  out.density.values /= static_cast<double>(inside) * grid.cell_volume();
  return out;
}

double analytic_density(const BenchmarkProblem& problem, const Vector& x) {
  Vector mean, variances;
  closed_form_moments(problem, mean, variances);
  if (x.size() != mean.size())
    throw std::invalid_argument("analytic_density: dimension mismatch");
  return std::exp(gaussian_log_density(x, mean, variances));
}

GridDensity analytic_reference(const BenchmarkProblem& problem, const GridSpec& grid) {
  grid.validate();
  GridDensity density = GridDensity::zeros(grid);
  for (Eigen::Index f = 0; f < grid.n_cells(); ++f)
    density.values(f) = analytic_density(problem, grid.cell_center(f));
  density.normalize();
  return density;
}

void benchmark_moments(const BenchmarkProblem& problem, Vector& mean, Matrix& cov) {
  Vector variances;
  closed_form_moments(problem, mean, variances);
  cov = Matrix(variances.asDiagonal());
}

double Coupled10dReference::density(const Vector& x) const {
  const Vector y = b_inverse * x;
  double p = std::exp(-log_det_b);
  for (int k = 0; k < 5; ++k) {
    Vector pair(2);
    pair << y(2 * k), y(2 * k + 1);
    p *= p0.interp2(pair);
    if (p == 0.0) return 0.0;
  }
  return p;
}

Coupled10dReference make_coupled10d_reference(const BenchmarkProblem& problem,
                                              int cells_per_axis,
                                              double box_half_width) {
  if (problem.name != "coupled10d")
    throw std::invalid_argument("make_coupled10d_reference: wrong problem");
  const double eps = problem.params.at("eps");
  const SdeSystem pair = coupled_pair_system(eps);
  const GridSpec grid = GridSpec::square2d(-box_half_width, box_half_width,
                                           cells_per_axis);
  Coupled10dReference ref;
  ref.p0 = fd_solve_sfpe_2d(pair, grid).density;
  ref.b_inverse = problem.mixing_inverse;
  ref.log_det_b = std::log(std::abs(problem.mixing.determinant()));
  return ref;
}

}  // namespace wgs
