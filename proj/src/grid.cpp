#include "wgs/grid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "wgs/io.hpp"

namespace wgs {

GridSpec GridSpec::box(const Vector& lo, const Vector& hi,
                       const std::vector<int>& counts) {
  GridSpec spec;
  spec.lo = lo;
  spec.hi = hi;
  spec.counts = counts;
  spec.validate();
  return spec;
}

GridSpec GridSpec::square2d(double low, double high, int cells) {
  return box(Vector::Constant(2, low), Vector::Constant(2, high), {cells, cells});
}

void GridSpec::validate() const {
  if (counts.empty() || lo.size() != dim() || hi.size() != dim())
    throw std::invalid_argument("GridSpec: lo/hi/counts sizes disagree");
  for (int a = 0; a < dim(); ++a) {
    if (!std::isfinite(lo(a)) || !std::isfinite(hi(a)) || !(lo(a) < hi(a)))
      throw std::invalid_argument("GridSpec: need finite lo < hi per axis");
    if (counts[a] < 2) throw std::invalid_argument("GridSpec: counts must be >= 2");
  }
}

Eigen::Index GridSpec::n_cells() const {
  Eigen::Index n = 1;
  for (int c : counts) n *= c;
  return n;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= step(a);
  return v;
}

Vector GridSpec::cell_center(Eigen::Index flat) const {
  const std::vector<int> idx = multi_index(flat);
  Vector x(dim());
  for (int a = 0; a < dim(); ++a) x(a) = center(a, idx[a]);
  return x;
}

Matrix GridSpec::all_centers() const {
  Matrix out(n_cells(), dim());
  for (Eigen::Index f = 0; f < n_cells(); ++f) out.row(f) = cell_center(f).transpose();
  return out;
}

Eigen::Index GridSpec::flat_index(const std::vector<int>& idx) const {
  if (static_cast<int>(idx.size()) != dim())
    throw std::invalid_argument("GridSpec: index rank mismatch");
  Eigen::Index flat = 0;
  for (int a = 0; a < dim(); ++a) {
    if (idx[a] < 0 || idx[a] >= counts[a])
      throw std::out_of_range("GridSpec: index out of range");
    flat = flat * counts[a] + idx[a];
  }
  return flat;
}

std::vector<int> GridSpec::multi_index(Eigen::Index flat) const {
  std::vector<int> idx(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % counts[a]);
    flat /= counts[a];
  }
  return idx;
}

bool GridSpec::contains(const Vector& x) const {
  for (int a = 0; a < dim(); ++a)
    if (x(a) < lo(a) || x(a) >= hi(a)) return false;
  return true;
}

std::vector<int> GridSpec::cell_of(const Vector& x) const {
  std::vector<int> idx(dim());
  for (int a = 0; a < dim(); ++a) {
    const int i = static_cast<int>(std::floor((x(a) - lo(a)) / step(a)));
    idx[a] = std::min(std::max(i, 0), counts[a] - 1);
  }
  return idx;
}

bool GridSpec::same_as(const GridSpec& other) const {
  return counts == other.counts && lo == other.lo && hi == other.hi;
}

GridDensity GridDensity::zeros(const GridSpec& spec) {
  GridDensity d;
  d.spec = spec;
  d.values = Vector::Zero(spec.n_cells());
  return d;
}

void GridDensity::normalize() {
  values = values.cwiseMax(0.0);
  const double mass = integral();
  if (!(mass > 0.0))
    throw std::runtime_error("GridDensity::normalize: nonpositive total mass");
  values /= mass;
}

double GridDensity::interp2(const Vector& x) const {
  if (spec.dim() != 2)
    throw std::invalid_argument("GridDensity::interp2: 2-D grids only");
  for (int a = 0; a < 2; ++a)
    if (x(a) < spec.lo(a) || x(a) > spec.hi(a)) return 0.0;

  // Continuous index relative to cell centers, clamped so the outer half-cell
  // band extrapolates with the edge value.
  double t[2];
  int i0[2];
  for (int a = 0; a < 2; ++a) {
    const double s = (x(a) - spec.lo(a)) / spec.step(a) - 0.5;
    const double sc = std::min(std::max(s, 0.0), static_cast<double>(spec.counts[a] - 1));
    i0[a] = std::min(static_cast<int>(std::floor(sc)), spec.counts[a] - 2);
    t[a] = sc - i0[a];
  }
  auto v = [&](int di, int dj) {
    return values(spec.flat_index({i0[0] + di, i0[1] + dj}));
  };
  return (1 - t[0]) * ((1 - t[1]) * v(0, 0) + t[1] * v(0, 1)) +
         t[0] * ((1 - t[1]) * v(1, 0) + t[1] * v(1, 1));
}

Matrix GridDensity::image2d() const {
  if (spec.dim() != 2)
    throw std::invalid_argument("GridDensity::image2d: 2-D grids only");
  const int nx = spec.counts[0];
  const int ny = spec.counts[1];
  Matrix img(ny, nx);
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      img(ny - 1 - iy, ix) = values(spec.flat_index({ix, iy}));
  return img;
}

void write_grid_density(const std::string& path, const GridDensity& density,
                        const std::string& config_hash, std::uint64_t seed) {
  const GridSpec& spec = density.spec;
  std::vector<std::string> comments = io::header_lines("grid_density", config_hash, seed);
  comments.push_back("dim: " + std::to_string(spec.dim()));
  for (int a = 0; a < spec.dim(); ++a) {
    std::ostringstream line;
    line << "axis" << a << ": " << io::format_double(spec.lo(a)) << " "
         << io::format_double(spec.hi(a)) << " " << spec.counts[a];
    comments.push_back(line.str());
  }

  std::vector<std::string> columns;
  for (int a = 0; a < spec.dim(); ++a) columns.push_back("i" + std::to_string(a));
  for (int a = 0; a < spec.dim(); ++a) columns.push_back("x" + std::to_string(a));
  columns.push_back("value");

  io::CsvWriter csv;
  csv.open(path, comments, columns);
  for (Eigen::Index f = 0; f < spec.n_cells(); ++f) {
    const std::vector<int> idx = spec.multi_index(f);
    std::vector<std::string> cells;
    for (int a = 0; a < spec.dim(); ++a) cells.push_back(std::to_string(idx[a]));
    for (int a = 0; a < spec.dim(); ++a)
      cells.push_back(io::format_double(spec.center(a, idx[a])));
    cells.push_back(io::format_double(density.values(f)));
    csv.row(cells);
  }
}

GridDensity read_grid_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_grid_density: cannot open " + path);

  GridSpec spec;
  int dim = -1;
  std::vector<double> lo, hi;
  std::vector<int> counts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0) break;
    const std::string body = line.substr(2);
    if (body.rfind("dim: ", 0) == 0) dim = std::stoi(body.substr(5));
    if (body.rfind("axis", 0) == 0) {
      const std::size_t colon = body.find(':');
      std::istringstream fields(body.substr(colon + 1));
      double a_lo, a_hi;
      int a_count;
      fields >> a_lo >> a_hi >> a_count;
      lo.push_back(a_lo);
      hi.push_back(a_hi);
      counts.push_back(a_count);
    }
  }
  if (dim <= 0 || static_cast<int>(counts.size()) != dim)
    throw std::runtime_error("read_grid_density: missing axis metadata in " + path);
  spec.lo = Eigen::Map<const Vector>(lo.data(), dim);
  spec.hi = Eigen::Map<const Vector>(hi.data(), dim);
  spec.counts = counts;
  spec.validate();

  GridDensity density = GridDensity::zeros(spec);
  // `line` currently holds the column header; read data rows.
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<int> idx(dim);
    for (int a = 0; a < dim; ++a) {
      std::getline(fields, cell, ',');
      idx[a] = std::stoi(cell);
    }
    for (int a = 0; a < dim; ++a) std::getline(fields, cell, ',');  // coords
    std::getline(fields, cell, ',');
    density.values(spec.flat_index(idx)) = std::stod(cell);
  }
  return density;
}

}  // namespace wgs
