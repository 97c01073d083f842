#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wgs/flow.hpp"
#include "wgs/grid.hpp"
#include "wgs/random.hpp"

namespace wgs {

/// Named scalar metrics plus free-form metadata; serializes to JSON/table.
struct MetricReport {
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> meta;

  /// Throws if any metric is non-finite.
  void validate() const;
  std::string to_json() const;
  std::string to_table() const;
};

/// e_p = sqrt(sum (p_est - p_ref)^2) / sqrt(sum p_ref^2) over cells.
double relative_l2_error(const GridDensity& p_est, const GridDensity& p_ref);

/// exp(flow log-density) at cell centers, renormalized on the grid.
GridDensity flow_density_on_grid(const FlowModel& flow, const GridSpec& grid);

/// Monte Carlo estimate of Prob(first coordinate > 0) under the pushforward.
double prob_x_positive(const FlowModel& flow, int n, RandomStream& rng);

/// Grid integration of the same probability for a reference density.
double prob_x_positive_grid(const GridDensity& density);

/// (e_M, e_C): relative mean error (2-norm) and covariance error (Frobenius).
std::pair<double, double> moment_errors(const Matrix& samples, const Vector& true_mean,
                                        const Matrix& true_cov);

/// Histogram of the (axis0, axis1) projection of the samples.
GridDensity marginal_histogram(const Matrix& samples, int axis0, int axis1,
                               const GridSpec& grid2d);

/**
 * Normalized 2-D restriction of a d-dimensional density to the plane
 * {x: x_a = base_a for a not in (axis0, axis1)} — the cross-section view,
 * each slice normalized independently.
 */
GridDensity cross_section_on_grid(const std::function<double(const Vector&)>& density,
                                  int dim, int axis0, int axis1, const Vector& base,
                                  const GridSpec& grid2d);

/// Cross-section of the flow density (via log_density) on a coordinate plane.
GridDensity flow_cross_section(const FlowModel& flow, int axis0, int axis1,
                               const Vector& base, const GridSpec& grid2d);

/// Box blur with the given cell radius (for histogram peak finding).
GridDensity box_blur_2d(const GridDensity& density, int radius);

struct GridPeak {
  Vector location;
  double value = 0.0;
};

/**
 * Strict local maxima over the 8-neighborhood, keeping peaks above
 * min_value_fraction of the global maximum and suppressing any peak within
 * min_separation_cells (Chebyshev) of a higher one.  Sorted by value,
 * highest first.
 */
std::vector<GridPeak> find_local_maxima_2d(const GridDensity& density,
                                           double min_value_fraction = 0.1,
                                           int min_separation_cells = 3);

}  // namespace wgs
