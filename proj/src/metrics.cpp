#include "wgs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "wgs/io.hpp"
#include "wgs/reference.hpp"

#include "json.hpp"

namespace wgs {

void MetricReport::validate() const {
  for (const auto& [name, value] : metrics)
    if (!std::isfinite(value))
      throw std::runtime_error("MetricReport: non-finite metric '" + name + "'");
}

std::string MetricReport::to_json() const {
  validate();
  nlohmann::json j;
  j["kind"] = "metric_report";
  j["version"] = io::version_string();
  for (const auto& [key, value] : meta) j["meta"][key] = value;
  for (const auto& [name, value] : metrics) j["metrics"][name] = value;
  return j.dump(1);
}

std::string MetricReport::to_table() const {
  std::ostringstream out;
  for (const auto& [name, value] : metrics) {
    char line[80];
    std::snprintf(line, sizeof(line), "%-28s %14.6g\n", name.c_str(), value);
    out << line;
  }
  return out.str();
}

double relative_l2_error(const GridDensity& p_est, const GridDensity& p_ref) {
  if (!p_est.spec.same_as(p_ref.spec))
    throw std::invalid_argument("relative_l2_error: grids differ");
  const double ref_norm = p_ref.values.norm();
  if (!(ref_norm > 0.0))
    throw std::invalid_argument("relative_l2_error: zero reference density");
  return (p_est.values - p_ref.values).norm() / ref_norm;
}

GridDensity flow_density_on_grid(const FlowModel& flow, const GridSpec& grid) {
  grid.validate();
  if (flow.dim != grid.dim())
    throw std::invalid_argument("flow_density_on_grid: dimension mismatch");
  GridDensity density = GridDensity::zeros(grid);
  const Vector log_p = flow.log_density(grid.all_centers());
  // Shift by the max before exponentiating; normalize() fixes the scale.
  density.values = (log_p.array() - log_p.maxCoeff()).exp();
  density.normalize();
  return density;
}

double prob_x_positive(const FlowModel& flow, int n, RandomStream& rng) {
  if (n <= 0) throw std::invalid_argument("prob_x_positive: n must be positive");
  const Matrix x = flow.sample_batch(n, rng).second;
  return static_cast<double>((x.col(0).array() > 0.0).count()) / n;
}

double prob_x_positive_grid(const GridDensity& density) {
  const GridSpec& spec = density.spec;
  double mass = 0.0;
  double positive = 0.0;
  for (Eigen::Index f = 0; f < spec.n_cells(); ++f) {
    mass += density.values(f);
    if (spec.center(0, spec.multi_index(f)[0]) > 0.0) positive += density.values(f);
  }
  if (!(mass > 0.0)) throw std::invalid_argument("prob_x_positive_grid: empty density");
  return positive / mass;
}

std::pair<double, double> moment_errors(const Matrix& samples, const Vector& true_mean,
                                        const Matrix& true_cov) {
  const Eigen::Index n = samples.rows();
  if (n < 2) throw std::invalid_argument("moment_errors: need at least 2 samples");
  if (samples.cols() != true_mean.size() || true_cov.rows() != true_mean.size() ||
      true_cov.cols() != true_mean.size())
    throw std::invalid_argument("moment_errors: dimension mismatch");
  const double mean_norm = true_mean.norm();
  const double cov_norm = true_cov.norm();
  if (!(mean_norm > 0.0) || !(cov_norm > 0.0))
    throw std::invalid_argument("moment_errors: zero-norm reference moments");

  const Vector mean = samples.colwise().mean().transpose();
  Matrix centered = samples;
  centered.rowwise() -= mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);

  return {(mean - true_mean).norm() / mean_norm, (cov - true_cov).norm() / cov_norm};
}

GridDensity marginal_histogram(const Matrix& samples, int axis0, int axis1,
                               const GridSpec& grid2d) {
  if (axis0 == axis1 || axis0 < 0 || axis1 < 0 || axis0 >= samples.cols() ||
      axis1 >= samples.cols())
    throw std::invalid_argument("marginal_histogram: bad axis pair");
  Matrix projected(samples.rows(), 2);
  projected.col(0) = samples.col(axis0);
  projected.col(1) = samples.col(axis1);
  return histogram_density(projected, grid2d).density;
}

GridDensity cross_section_on_grid(const std::function<double(const Vector&)>& density,
                                  int dim, int axis0, int axis1, const Vector& base,
                                  const GridSpec& grid2d) {
  grid2d.validate();
  if (grid2d.dim() != 2)
    throw std::invalid_argument("cross_section_on_grid: need a 2-D grid");
  if (axis0 == axis1 || axis0 < 0 || axis1 < 0 || axis0 >= dim || axis1 >= dim)
    throw std::invalid_argument("cross_section_on_grid: bad axis pair");
  if (base.size() != dim)
    throw std::invalid_argument("cross_section_on_grid: base point dimension");

  GridDensity out = GridDensity::zeros(grid2d);
  Vector x = base;
  for (Eigen::Index f = 0; f < grid2d.n_cells(); ++f) {
    const Vector plane = grid2d.cell_center(f);
    x(axis0) = plane(0);
    x(axis1) = plane(1);
    out.values(f) = density(x);
  }
  out.normalize();
  return out;
}

GridDensity flow_cross_section(const FlowModel& flow, int axis0, int axis1,
                               const Vector& base, const GridSpec& grid2d) {
  grid2d.validate();
  if (grid2d.dim() != 2)
    throw std::invalid_argument("flow_cross_section: need a 2-D grid");

  // Batch all plane points through one log-density call, then shift-exp.
  Matrix points(grid2d.n_cells(), flow.dim);
  points.rowwise() = base.transpose();
  for (Eigen::Index f = 0; f < grid2d.n_cells(); ++f) {
    const Vector plane = grid2d.cell_center(f);
    points(f, axis0) = plane(0);
    points(f, axis1) = plane(1);
  }
  const Vector log_p = flow.log_density(points);
  GridDensity out = GridDensity::zeros(grid2d);
  out.values = (log_p.array() - log_p.maxCoeff()).exp();
  out.normalize();
  return out;
}

GridDensity box_blur_2d(const GridDensity& density, int radius) {
  if (density.spec.dim() != 2)
    throw std::invalid_argument("box_blur_2d: 2-D grids only");
  if (radius <= 0) return density;
  const int nx = density.spec.counts[0];
  const int ny = density.spec.counts[1];
  GridDensity out = GridDensity::zeros(density.spec);
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      double acc = 0.0;
      int cnt = 0;
      for (int dx = -radius; dx <= radius; ++dx)
        for (int dy = -radius; dy <= radius; ++dy) {
          const int jx = ix + dx;
          const int jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
          acc += density.values(density.spec.flat_index({jx, jy}));
          cnt += 1;
        }
      out.values(out.spec.flat_index({ix, iy})) = acc / cnt;
    }
  return out;
}

std::vector<GridPeak> find_local_maxima_2d(const GridDensity& density,
                                           double min_value_fraction,
                                           int min_separation_cells) {
  if (density.spec.dim() != 2)
    throw std::invalid_argument("find_local_maxima_2d: 2-D grids only");
  const int nx = density.spec.counts[0];
  const int ny = density.spec.counts[1];
  const double floor_value = density.values.maxCoeff() * min_value_fraction;

  struct Candidate {
    int ix, iy;
    double value;
  };
  std::vector<Candidate> candidates;
  auto value_at = [&](int ix, int iy) {
    return density.values(density.spec.flat_index({ix, iy}));
  };
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy) {
      const double v = value_at(ix, iy);
      if (v < floor_value) continue;
      bool is_peak = true;
      for (int dx = -1; dx <= 1 && is_peak; ++dx)
        for (int dy = -1; dy <= 1 && is_peak; ++dy) {
          if (dx == 0 && dy == 0) continue;
          const int jx = ix + dx;
          const int jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= nx || jy >= ny) continue;
          if (value_at(jx, jy) >= v) is_peak = false;
        }
      if (is_peak) candidates.push_back({ix, iy, v});
    }

  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.value > b.value; });

  std::vector<GridPeak> peaks;
  std::vector<Candidate> kept;
  for (const Candidate& c : candidates) {
    bool shadowed = false;
    for (const Candidate& k : kept)
      if (std::max(std::abs(c.ix - k.ix), std::abs(c.iy - k.iy)) <= min_separation_cells)
        shadowed = true;
    if (shadowed) continue;
    kept.push_back(c);
    GridPeak peak;
    peak.location = Vector(2);
    peak.location << density.spec.center(0, c.ix), density.spec.center(1, c.iy);
    peak.value = c.value;
    peaks.push_back(std::move(peak));
  }
  return peaks;
}

}  // namespace wgs
