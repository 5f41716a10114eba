#pragma once

// Shared fixtures for the posterior / sampler / predict / acceptance tests:
// a small hand-built domain with every structural feature of the full one
// (units, covariates, land use, observers), plus synthetic count data and
// random parameter states.

#include <cmath>
#include <memory>
#include <vector>

#include "lgcpfuse/model.hpp"
#include "lgcpfuse/rng.hpp"
#include "lgcpfuse/scenario.hpp"

namespace testutil {

inline lgcpfuse::Domain make_test_domain(int nx = 10, int ny = 10,
                                         double h = 1.0, int n_units = 5,
                                         int n_observers = 3) {
  using namespace lgcpfuse;
  Domain dom;
  dom.grid = Grid::regular(nx, ny, h);
  const int n = dom.grid.n_active();

  dom.n_units = n_units;
  dom.unit_of.resize(n);
  dom.land_use.resize(n);
  dom.n_land_use = 6;
  std::vector<double> cc(n), eg(n), di(n);
  for (int c = 0; c < n; ++c) {
    const int f = dom.grid.cell_of_active[c];
    const int ix = dom.grid.ix_of(f), iy = dom.grid.iy_of(f);
    dom.unit_of[c] = (iy * n_units) / ny;
    dom.land_use[c] = (ix + 2 * iy) % 6;
    cc[c] = std::sin(0.7 * ix) + 0.3 * iy;
    eg[c] = std::cos(0.4 * ix + 0.9 * iy);
    di[c] = std::abs(ix - nx / 2.0) + 0.2 * iy;
  }
  standardize(cc);
  standardize(eg);
  standardize(di);
  dom.covariates["CLOUDCOVER"] = cc;
  dom.covariates["ELEVGRADIENT"] = eg;
  dom.covariates["DISTANCE"] = di;

  dom.network.lines.push_back(
      {{nx * h / 2.0, 0.0}, {nx * h / 2.0, ny * h}});
  for (int j = 0; j < n_observers; ++j) {
    Observer o;
    o.id = j;
    o.x = (0.5 + j * 2.0) * h;
    o.y = (0.5 + j * 3.0) * h;
    o.activity_level = j % 5;
    dom.observers.push_back(o);
  }
  return dom;
}

// Synthetic counts with the right sparsity flavour; depends only on `seed`.
inline lgcpfuse::FitData make_test_data(const lgcpfuse::Domain& dom,
                                        std::uint64_t seed) {
  using namespace lgcpfuse;
  FitData data;
  rng::Xoshiro256pp r(seed);
  const int n = dom.grid.n_active();
  data.cs_counts.resize(n);
  data.aux_counts.resize(n);
  data.ps_counts.resize(n);
  for (int c = 0; c < n; ++c) {
    data.cs_counts[c] = static_cast<double>(r.poisson(0.15));
    data.aux_counts[c] = static_cast<double>(r.poisson(0.6));
    data.ps_counts[c] = static_cast<double>(r.poisson(0.4));
  }
  data.selected.resize(dom.n_units);
  for (int u = 0; u < dom.n_units; ++u) data.selected[u] = (u % 2 == 0);
  return data;
}

// Random state around the initial point; hyperparameters get a gentle nudge
// so every operator stays well-conditioned.
inline std::vector<double> random_state(const lgcpfuse::Posterior& post,
                                        lgcpfuse::rng::Xoshiro256pp& r,
                                        double scalar_sd = 0.4,
                                        double field_sd = 0.3) {
  const auto& L = post.layout();
  std::vector<double> x = post.init_state();
  for (int i = 0; i < L.n_fixed; ++i) x[i] += scalar_sd * r.normal();
  x[L.hyper1] += 0.3 * r.normal();
  x[L.hyper1 + 1] += 0.3 * r.normal();
  if (L.hyper2 >= 0) {
    x[L.hyper2] += 0.3 * r.normal();
    x[L.hyper2 + 1] += 0.3 * r.normal();
  }
  for (int c = 0; c < L.n_cells; ++c) {
    x[L.omega1 + c] = field_sd * r.normal();
    if (L.omega2 >= 0) x[L.omega2 + c] = field_sd * r.normal();
  }
  return x;
}

}  // namespace testutil
