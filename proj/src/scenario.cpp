#include "lgcpfuse/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "lgcpfuse/io.hpp"
#include "lgcpfuse/kernels.hpp"
#include "lgcpfuse/pointprocess.hpp"

namespace lgcpfuse {

ScenarioSpec ScenarioSpec::preset(int id) {
  ScenarioSpec s;
  s.id = id;
  switch (id) {
    case 1: s.high_willingness = true;  s.preferential = false; break;
    case 2: s.high_willingness = true;  s.preferential = true;  break;
    case 3: s.high_willingness = false; s.preferential = false; break;
    case 4: s.high_willingness = false; s.preferential = true;  break;
    default: throw std::invalid_argument("scenario id must be 1..4");
  }
  return s;
}

Replicate simulate_replicate(const Domain& domain,
                             std::shared_ptr<const LatticeCore> core,
                             const ScenarioSpec& spec,
                             std::uint64_t master_seed, int replicate) {
  const Grid& grid = domain.grid;
  const int n = grid.n_active();
  Replicate rep;
  rep.seed = rng::derive_seed(
      master_seed, {static_cast<std::uint64_t>(spec.id),
                    static_cast<std::uint64_t>(replicate), 0x51a171eULL});
  rng::Xoshiro256pp rng(rep.seed);

  // latent fields and the true pattern
  LatticeGmrf f1(core, spec.rho1, spec.sigma1);
  LatticeGmrf f2(core, spec.rho2, spec.sigma2);
  f1.sample(rng, rep.omega1);
  f2.sample(rng, rep.omega2);

  const auto& cc = domain.covariate("CLOUDCOVER");
  rep.log_lambda_true.assign(n, spec.beta0);
  kernels::axpy(spec.beta1, cc.data(), rep.log_lambda_true.data(), n);
  kernels::axpy(1.0, rep.omega1.data(), rep.log_lambda_true.data(), n);
  rep.true_pattern = simulate_poisson(grid, rep.log_lambda_true, rng);

  // CS chain: sampling -> detection -> observer assignment + reporting
  const auto& dist = domain.covariate("DISTANCE");
  rep.tau = cs_retention_sim(spec.cs_a0, spec.cs_a1, dist, rep.omega2);
  rep.after_sampling = thin(grid, rep.true_pattern, rep.tau, rng);

  rep.psi = detection_prob(domain.land_use, spec.nu_det);
  rep.after_detection = thin(grid, rep.after_sampling, rep.psi, rng);

  rep.kappa = draw_willingness(spec.high_willingness,
                               static_cast<int>(domain.observers.size()), rng);
  const auto weights = observer_weights(grid, domain.observers,
                                        spec.obs_intercept, spec.obs_slope,
                                        spec.zeta_act);
  const int J = static_cast<int>(domain.observers.size());
  for (std::size_t i = 0; i < rep.after_detection.size(); ++i) {
    const int c =
        grid.active_at(rep.after_detection.x[i], rep.after_detection.y[i]);
    const double* w = &weights[static_cast<std::size_t>(c) * J];
    double u = rng.uniform();
    int j = 0;
    for (; j < J - 1; ++j) {
      u -= w[j];
      if (u < 0.0) break;
    }
    if (rng.bernoulli(rep.kappa[j]))
      rep.cs_pattern.add(rep.after_detection.x[i], rep.after_detection.y[i],
                         domain.observers[j].id);
  }
  rep.delta = reporting_observer(weights, rep.kappa, n);

  // auxiliary pattern: one draw of the full CS activity process
  std::vector<double> eta_aux(n);
  for (int c = 0; c < n; ++c)
    eta_aux[c] = spec.cs_a0 + spec.cs_a1 * dist[c] + rep.omega2[c];
  rep.aux_pattern = simulate_poisson(grid, eta_aux, rng);

  // survey branch: select units, census inside them
  SurveySelectionParams sel;
  sel.preferential = spec.preferential;
  sel.p = spec.random_p;
  sel.g0 = spec.gamma0;
  sel.g_eg = spec.gamma_eg;
  sel.g_cc = spec.gamma_cc;
  sel.include_field = spec.selection_includes_field;
  sel.zeta = spec.zeta_sel;
  rep.selection = select_survey_units(domain, sel, rep.omega1, rng);

  for (std::size_t i = 0; i < rep.true_pattern.size(); ++i) {
    const int c = grid.active_at(rep.true_pattern.x[i], rep.true_pattern.y[i]);
    const int u = domain.unit_of[c];
    if (u >= 0 && rep.selection.selected[u])
      rep.ps_pattern.add(rep.true_pattern.x[i], rep.true_pattern.y[i]);
  }
  return rep;
}

namespace {

std::vector<double> standardized(const Grid& grid,
                                 std::vector<double> raw) {
  standardize(raw);
  (void)grid;
  return raw;
}

// Shrink each band-unit to a unit_rows x unit_cols segment whose CLOUDCOVER
// mean is as close as possible to a per-band target. Bands are rank-matched
// to the (sorted) target ladder so every target stays reachable within its
// band; the remaining band cells stay active network but leave the unit.
void carve_unit_segments(Domain& dom, const SyntheticDomainConfig& cfg) {
  if (cfg.unit_rows <= 0 || cfg.unit_cols <= 0) return;  // keep whole bands
  const Grid& g = dom.grid;
  const int n = g.n_active();
  const int J = dom.n_units;
  if (static_cast<int>(cfg.unit_cc_ladder.size()) != J)
    throw std::invalid_argument("unit_cc_ladder needs one entry per line");
  const auto& cc = dom.covariates.at("CLOUDCOVER");

  std::vector<std::vector<int>> band_rows(J);
  for (int c = 0; c < n; ++c) {
    const int u = dom.unit_of[c];
    if (u < 0) continue;
    const int iy = g.cell_of_active[c] / g.nx;
    auto& rows = band_rows[u];
    if (std::find(rows.begin(), rows.end(), iy) == rows.end())
      rows.push_back(iy);
  }
  for (auto& rows : band_rows) std::sort(rows.begin(), rows.end());

  const auto active_at = [&](int iy, int ix) {
    return g.active_of_cell[g.flat(ix, iy)];
  };

  struct Choice {
    int row0 = 0, col0 = 0;
    double mean = 0.0;
  };
  std::vector<std::vector<Choice>> options(J);
  for (int u = 0; u < J; ++u) {
    const auto& rows = band_rows[u];
    for (int r0 = 0; r0 + cfg.unit_rows <= static_cast<int>(rows.size()); ++r0)
      for (int c0 = 0; c0 + cfg.unit_cols <= g.nx; ++c0) {
        double sum = 0.0;
        int cnt = 0;
        for (int rr = 0; rr < cfg.unit_rows; ++rr)
          for (int wc = 0; wc < cfg.unit_cols; ++wc) {
            const int a = active_at(rows[r0 + rr], c0 + wc);
            if (a >= 0) {
              sum += cc[a];
              ++cnt;
            }
          }
        if (cnt == cfg.unit_rows * cfg.unit_cols)
          options[u].push_back({r0, c0, sum / cnt});
      }
    if (options[u].empty())
      throw std::invalid_argument("unit segment does not fit inside its band");
  }

  // a band's reachable center = midpoint of its option range; rank-match the
  // ladder so the most cloud-covered band takes the highest target
  std::vector<double> center(J);
  for (int u = 0; u < J; ++u) {
    const auto [mn, mx] = std::minmax_element(
        options[u].begin(), options[u].end(),
        [](const Choice& a, const Choice& b) { return a.mean < b.mean; });
    center[u] = 0.5 * (mn->mean + mx->mean);
  }
  std::vector<int> order(J);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return center[a] > center[b]; });
  std::vector<double> targets = cfg.unit_cc_ladder;
  std::sort(targets.begin(), targets.end(), std::greater<double>());

  std::vector<Choice> pick(J);
  for (int k = 0; k < J; ++k) {
    const int u = order[k];
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : options[u]) {
      const double d = std::abs(o.mean - targets[k]);
      if (d < best) {
        best = d;
        pick[u] = o;
      }
    }
  }

  std::vector<std::int32_t> carved(n, -1);
  for (int u = 0; u < J; ++u) {
    const auto& rows = band_rows[u];
    for (int rr = 0; rr < cfg.unit_rows; ++rr)
      for (int wc = 0; wc < cfg.unit_cols; ++wc) {
        const int a = active_at(rows[pick[u].row0 + rr], pick[u].col0 + wc);
        if (a >= 0) carved[a] = u;
      }
  }
  dom.unit_of = std::move(carved);
}

}  // namespace

Domain build_synthetic_domain(const SyntheticDomainConfig& cfg) {
  Domain dom;
  Grid g;
  g.nx = cfg.nx;
  g.ny = cfg.ny;
  g.h = cfg.h;
  g.active_of_cell.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);

  // powerline bands: active cells within band_halfwidth of a line
  std::vector<double> line_y(cfg.n_lines);
  for (int l = 0; l < cfg.n_lines; ++l)
    line_y[l] = cfg.line_y0 + l * cfg.line_spacing;
  std::vector<std::int32_t> unit_full(g.active_of_cell.size(), -1);
  for (int iy = 0; iy < g.ny; ++iy) {
    const double y = (iy + 0.5) * g.h;
    int best = -1;
    double bestd = 1e30;
    for (int l = 0; l < cfg.n_lines; ++l) {
      const double d = std::abs(y - line_y[l]);
      if (d < bestd) {
        bestd = d;
        best = l;
      }
    }
    if (bestd > cfg.band_halfwidth) continue;
    for (int ix = 0; ix < g.nx; ++ix) {
      g.active_of_cell[g.flat(ix, iy)] = 0;
      unit_full[g.flat(ix, iy)] = best;
    }
  }
  g.index_active();
  dom.grid = g;
  const int n = g.n_active();
  dom.unit_of.resize(n);
  for (int c = 0; c < n; ++c) dom.unit_of[c] = unit_full[g.cell_of_active[c]];
  dom.n_units = cfg.n_lines;

  // powerline geometry doubles as the unit provenance in saved domains
  for (int l = 0; l < cfg.n_lines; ++l)
    dom.network.lines.push_back(
        {{0.0, line_y[l]}, {g.nx * g.h, line_y[l]}});

  // roads for the DISTANCE covariate
  Network roads;
  for (double rx : cfg.road_x)
    roads.lines.push_back({{rx, 0.0}, {rx, g.ny * g.h}});

  // covariates: smooth deterministic surfaces, standardized on active cells
  std::vector<double> cc(n), eg(n), lu_raw(n);
  for (int c = 0; c < n; ++c) {
    const int f = g.cell_of_active[c];
    const double x = g.cx(f), y = g.cy(f);
    cc[c] = std::cos(0.11 * y + 0.5) + 0.35 * std::sin(0.23 * x) +
            0.25 * std::sin(0.05 * (x + y));
    eg[c] = 0.9 * std::sin(0.19 * x + 1.0) + 0.4 * std::cos(0.23 * y - 0.7) +
            0.3 * std::cos(0.07 * (x - y));
    lu_raw[c] = std::sin(0.37 * x + 0.3) + std::cos(0.29 * y + 1.2) +
                0.8 * std::sin(0.11 * (x - y));
  }
  dom.covariates["CLOUDCOVER"] = standardized(g, std::move(cc));
  dom.covariates["ELEVGRADIENT"] = standardized(g, std::move(eg));
  dom.covariates["DISTANCE"] = standardized(g, network_distance(g, roads));

  // survey units: carve one segment per band now that CLOUDCOVER is final
  carve_unit_segments(dom, cfg);

  // land use: quantile bins of lu_raw with the configured shares
  std::vector<double> sorted = lu_raw;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> cuts;
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < cfg.landuse_shares.size(); ++k) {
    cum += cfg.landuse_shares[k];
    const auto idx = static_cast<std::size_t>(cum * (n - 1));
    cuts.push_back(sorted[std::min<std::size_t>(idx, n - 1)]);
  }
  dom.land_use.resize(n);
  for (int c = 0; c < n; ++c) {
    int k = 0;
    while (k < static_cast<int>(cuts.size()) && lu_raw[c] > cuts[k]) ++k;
    dom.land_use[c] = k;
  }
  dom.n_land_use = static_cast<int>(cfg.landuse_shares.size());

  // observers scattered uniformly, activity levels cycling 0..4
  rng::Xoshiro256pp orng(cfg.observer_seed);
  const double margin = 2.0 * g.h;
  for (int j = 0; j < cfg.n_observers; ++j) {
    Observer o;
    o.id = j;
    o.x = margin + orng.uniform() * (g.nx * g.h - 2.0 * margin);
    o.y = margin + orng.uniform() * (g.ny * g.h - 2.0 * margin);
    o.activity_level = j % 5;
    dom.observers.push_back(o);
  }
  return dom;
}

void save_domain(const std::string& dir, const Domain& domain) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const Grid& g = domain.grid;
  std::vector<double> unit_vals(g.n_active());
  for (int c = 0; c < g.n_active(); ++c) unit_vals[c] = domain.unit_of[c];
  io::write_raster_asc(dir + "/units.asc", g, unit_vals);
  std::vector<double> lu_vals(g.n_active());
  for (int c = 0; c < g.n_active(); ++c) lu_vals[c] = domain.land_use[c];
  io::write_raster_asc(dir + "/landuse.asc", g, lu_vals);
  for (const auto& [name, vals] : domain.covariates)
    io::write_raster_asc(dir + "/cov_" + name + ".asc", g, vals);
  io::write_network_geojson(dir + "/network.geojson", domain.network);
  io::write_observers_csv(dir + "/observers.csv", domain.observers);
  nlohmann::json manifest;
  manifest["n_units"] = domain.n_units;
  manifest["n_land_use"] = domain.n_land_use;
  manifest["covariates"] = nlohmann::json::array();
  for (const auto& [name, vals] : domain.covariates)
    manifest["covariates"].push_back(name);
  std::ofstream mf(dir + "/domain.json");
  mf << manifest.dump(2) << '\n';
}

Domain load_domain(const std::string& dir) {
  Domain dom;
  std::ifstream mf(dir + "/domain.json");
  if (!mf) throw std::runtime_error("missing domain manifest in " + dir);
  nlohmann::json manifest;
  mf >> manifest;
  auto [grid, unit_vals] = io::read_raster_asc(dir + "/units.asc");
  dom.grid = std::move(grid);
  const int n = dom.grid.n_active();
  dom.unit_of.resize(n);
  for (int c = 0; c < n; ++c)
    dom.unit_of[c] = static_cast<std::int32_t>(unit_vals[c]);
  dom.n_units = manifest.at("n_units").get<int>();
  const auto lu = io::read_raster_asc(dir + "/landuse.asc").second;
  dom.land_use.resize(n);
  for (int c = 0; c < n; ++c) dom.land_use[c] = static_cast<std::int32_t>(lu[c]);
  dom.n_land_use = manifest.at("n_land_use").get<int>();
  for (const auto& name : manifest.at("covariates"))
    dom.covariates[name.get<std::string>()] =
        io::read_raster_asc(dir + "/cov_" + name.get<std::string>() + ".asc").second;
  dom.network = io::read_network_geojson(dir + "/network.geojson");
  dom.observers = io::read_observers_csv(dir + "/observers.csv");
  return dom;
}

void save_replicate(const std::string& dir, const Grid& grid,
                    const Replicate& rep) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  io::write_pattern_csv(dir + "/true.csv", rep.true_pattern);
  io::write_pattern_csv(dir + "/cs.csv", rep.cs_pattern);
  io::write_pattern_csv(dir + "/aux.csv", rep.aux_pattern);
  io::write_pattern_csv(dir + "/ps.csv", rep.ps_pattern);
  io::write_raster_csv(dir + "/omega1.csv", grid, rep.omega1);
  io::write_raster_csv(dir + "/omega2.csv", grid, rep.omega2);
  io::write_raster_csv(dir + "/log_lambda_true.csv", grid,
                       rep.log_lambda_true);
  io::write_raster_csv(dir + "/tau.csv", grid, rep.tau);
  io::write_raster_csv(dir + "/psi.csv", grid, rep.psi);
  io::write_raster_csv(dir + "/delta.csv", grid, rep.delta);
  nlohmann::json manifest;
  manifest["seed"] = rep.seed;
  manifest["kappa"] = rep.kappa;
  manifest["n_units"] = rep.selection.selected.size();
  manifest["selected"] = nlohmann::json::array();
  for (std::size_t u = 0; u < rep.selection.selected.size(); ++u)
    if (rep.selection.selected[u]) manifest["selected"].push_back(u);
  manifest["selection_prob"] = rep.selection.prob;
  manifest["counts"] = {{"true", rep.true_pattern.size()},
                        {"after_sampling", rep.after_sampling.size()},
                        {"after_detection", rep.after_detection.size()},
                        {"cs", rep.cs_pattern.size()},
                        {"aux", rep.aux_pattern.size()},
                        {"ps", rep.ps_pattern.size()}};
  std::ofstream mf(dir + "/replicate.json");
  mf << manifest.dump(2) << '\n';
}

Replicate load_replicate(const std::string& dir, const Grid& grid) {
  Replicate rep;
  rep.true_pattern = io::read_pattern_csv(dir + "/true.csv");
  rep.cs_pattern = io::read_pattern_csv(dir + "/cs.csv");
  rep.aux_pattern = io::read_pattern_csv(dir + "/aux.csv");
  rep.ps_pattern = io::read_pattern_csv(dir + "/ps.csv");
  rep.omega1 = io::read_raster_csv(dir + "/omega1.csv", grid);
  rep.omega2 = io::read_raster_csv(dir + "/omega2.csv", grid);
  rep.log_lambda_true = io::read_raster_csv(dir + "/log_lambda_true.csv", grid);
  rep.tau = io::read_raster_csv(dir + "/tau.csv", grid);
  rep.psi = io::read_raster_csv(dir + "/psi.csv", grid);
  rep.delta = io::read_raster_csv(dir + "/delta.csv", grid);
  std::ifstream mf(dir + "/replicate.json");
  if (!mf) throw std::runtime_error("missing " + dir + "/replicate.json");
  nlohmann::json manifest;
  mf >> manifest;
  rep.seed = manifest.at("seed").get<std::uint64_t>();
  rep.kappa = manifest.at("kappa").get<std::vector<double>>();
  rep.selection.selected.assign(manifest.at("n_units").get<std::size_t>(), 0);
  for (const auto& u : manifest.at("selected"))
    rep.selection.selected.at(u.get<std::size_t>()) = 1;
  rep.selection.prob =
      manifest.at("selection_prob").get<std::vector<double>>();
  return rep;
}

}  // namespace lgcpfuse
