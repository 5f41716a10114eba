#include "lgcpfuse/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lgcpfuse {

double Grid::diameter() const { return std::hypot(width(), height()); }

void Grid::index_active() {
  cell_of_active.clear();
  for (int f = 0; f < nx * ny; ++f)
    if (active_of_cell[f] >= 0) {
      active_of_cell[f] = static_cast<std::int32_t>(cell_of_active.size());
      cell_of_active.push_back(f);
    }
}

int Grid::active_at(double x, double y) const {
  const int ix = static_cast<int>(std::floor((x - x0) / h));
  const int iy = static_cast<int>(std::floor((y - y0) / h));
  if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return -1;
  return active_of_cell[flat(ix, iy)];
}

Grid Grid::regular(int nx, int ny, double h, double x0, double y0) {
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.h = h;
  g.x0 = x0;
  g.y0 = y0;
  g.active_of_cell.assign(static_cast<std::size_t>(nx) * ny, 0);
  g.index_active();
  return g;
}

namespace {

double seg_distance(double x, double y, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0)
    t = std::clamp(((x - a[0]) * dx + (y - a[1]) * dy) / len2, 0.0, 1.0);
  return std::hypot(x - (a[0] + t * dx), y - (a[1] + t * dy));
}

}  // namespace

double Network::distance_to(double x, double y) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& line : lines)
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
      best = std::min(best, seg_distance(x, y, line[i], line[i + 1]));
  return best;
}

const std::vector<double>& Domain::covariate(const std::string& name) const {
  const auto it = covariates.find(name);
  if (it == covariates.end())
    throw std::runtime_error("unknown covariate: " + name);
  return it->second;
}

std::vector<int> Domain::unit_cells(int unit) const {
  std::vector<int> cells;
  for (std::size_t c = 0; c < unit_of.size(); ++c)
    if (unit_of[c] == unit) cells.push_back(static_cast<int>(c));
  return cells;
}

std::array<double, 2> standardize(std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  if (sd > 0.0)
    for (double& x : v) x = (x - mean) / sd;
  else
    for (double& x : v) x = 0.0;
  return {mean, sd};
}

std::vector<double> network_distance(const Grid& grid, const Network& net) {
  std::vector<double> d(grid.n_active());
  for (int c = 0; c < grid.n_active(); ++c) {
    const int f = grid.cell_of_active[c];
    d[c] = net.distance_to(grid.cx(f), grid.cy(f));
  }
  return d;
}

std::vector<double> point_distance(const Grid& grid, double px, double py) {
  std::vector<double> d(grid.n_active());
  for (int c = 0; c < grid.n_active(); ++c) {
    const int f = grid.cell_of_active[c];
    d[c] = std::hypot(grid.cx(f) - px, grid.cy(f) - py);
  }
  return d;
}

}  // namespace lgcpfuse
