#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

// Regular analysis grid with an active-cell mask, survey units, per-cell
// covariates, a line network and an observer registry. All model code works
// on vectors indexed by active cell (0..n_active-1); the mask maps those back
// to grid positions.

namespace lgcpfuse {

struct Grid {
  int nx = 0, ny = 0;
  double h = 1.0;        // cell side length
  double x0 = 0.0, y0 = 0.0;  // lower-left corner of cell (0,0)

  std::vector<std::int32_t> active_of_cell;  // nx*ny; -1 inactive, else index
  std::vector<std::int32_t> cell_of_active;  // flat = iy*nx + ix

  int n_active() const { return static_cast<int>(cell_of_active.size()); }
  double cell_area() const { return h * h; }
  int flat(int ix, int iy) const { return iy * nx + ix; }
  int ix_of(int flat) const { return flat % nx; }
  int iy_of(int flat) const { return flat / nx; }
  double cx(int flat) const { return x0 + (ix_of(flat) + 0.5) * h; }
  double cy(int flat) const { return y0 + (iy_of(flat) + 0.5) * h; }
  double width() const { return nx * h; }
  double height() const { return ny * h; }
  double diameter() const;

  // Rebuild cell_of_active from active_of_cell (or from a full mask).
  void index_active();

  // Active-cell index containing (x, y), or -1.
  int active_at(double x, double y) const;

  // Grid with every cell active.
  static Grid regular(int nx, int ny, double h, double x0 = 0.0,
                      double y0 = 0.0);
};

struct Observer {
  int id = 0;
  double x = 0.0, y = 0.0;
  int activity_level = 0;  // 0 (least active) .. n_levels-1
};

// Polylines in domain coordinates.
struct Network {
  std::vector<std::vector<std::array<double, 2>>> lines;

  double distance_to(double x, double y) const;
  bool empty() const { return lines.empty(); }
};

// A point pattern; observer[i] is -1 when reporter identity is unknown.
struct Pattern {
  std::vector<double> x, y;
  std::vector<int> observer;

  std::size_t size() const { return x.size(); }
  void add(double px, double py, int obs = -1) {
    x.push_back(px);
    y.push_back(py);
    observer.push_back(obs);
  }
};

struct Domain {
  Grid grid;
  std::vector<std::int32_t> unit_of;  // per active cell; -1 = no unit
  int n_units = 0;
  std::map<std::string, std::vector<double>> covariates;  // per active cell
  std::vector<std::int32_t> land_use;  // per active cell; class 0..n_classes-1
  int n_land_use = 0;
  Network network;
  std::vector<Observer> observers;

  const std::vector<double>& covariate(const std::string& name) const;
  std::vector<int> unit_cells(int unit) const;
};

// In-place transform to mean 0, population-sd 1; returns (mean, sd).
std::array<double, 2> standardize(std::vector<double>& v);

// Minimum distance from each active cell center to the network.
std::vector<double> network_distance(const Grid& grid, const Network& net);

// Euclidean distance from each active cell center to (px, py).
std::vector<double> point_distance(const Grid& grid, double px, double py);

}  // namespace lgcpfuse
