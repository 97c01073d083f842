#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wgs/sde_model.hpp"

namespace wgs {

/**
 * Uniform rectangular cell-centered grid.  Flattened indices are row-major
 * with axis 0 slowest: flat = ((i0 * n1 + i1) * n2 + i2) ...
 */
struct GridSpec {
  Vector lo;
  Vector hi;
  std::vector<int> counts;

  static GridSpec box(const Vector& lo, const Vector& hi, const std::vector<int>& counts);
  /// Square box [low, high]^2 with the same cell count per axis.
  static GridSpec square2d(double low, double high, int cells);

  int dim() const { return static_cast<int>(counts.size()); }
  Eigen::Index n_cells() const;
  double step(int axis) const { return (hi(axis) - lo(axis)) / counts[axis]; }
  double cell_volume() const;
  double center(int axis, int index) const {
    return lo(axis) + (index + 0.5) * step(axis);
  }
  Vector cell_center(Eigen::Index flat) const;
  /// All cell centers as rows (n_cells x dim), flat-index order.
  Matrix all_centers() const;

  Eigen::Index flat_index(const std::vector<int>& idx) const;
  std::vector<int> multi_index(Eigen::Index flat) const;
  bool contains(const Vector& x) const;
  /// Cell containing x; only valid when contains(x).
  std::vector<int> cell_of(const Vector& x) const;

  bool same_as(const GridSpec& other) const;
  void validate() const;
};

/// Non-negative cell-centered density values on a GridSpec.
struct GridDensity {
  GridSpec spec;
  Vector values;  // length spec.n_cells(), flat-index order

  static GridDensity zeros(const GridSpec& spec);

  double integral() const { return values.sum() * spec.cell_volume(); }
  /// Clamp negatives to zero and rescale so the grid integral is 1.
  void normalize();

  double at(const std::vector<int>& idx) const { return values(spec.flat_index(idx)); }
  double& at(const std::vector<int>& idx) { return values(spec.flat_index(idx)); }

  /**
   * Bilinear interpolation between cell centers (2-D grids).  Constant
   * extrapolation between the box edge and the outermost centers; exactly 0
   * outside the box.
   */
  double interp2(const Vector& x) const;

  /// 2-D grids: image matrix with row 0 = top (largest x1), columns along x0.
  Matrix image2d() const;
};

/// Self-describing CSV: header comments (axes/meta), then i…, x…, value rows.
void write_grid_density(const std::string& path, const GridDensity& density,
                        const std::string& config_hash, std::uint64_t seed);
GridDensity read_grid_density(const std::string& path);

}  // namespace wgs
