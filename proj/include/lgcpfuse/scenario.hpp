#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lgcpfuse/field.hpp"
#include "lgcpfuse/grid.hpp"
#include "lgcpfuse/observation.hpp"

// Scenario definitions for the simulation study: four cells crossing
// willingness-to-report {high, low} with survey-unit selection
// {random, preferential}, plus the generator that turns one scenario and one
// replicate index into a complete synthetic dataset.

namespace lgcpfuse {

struct ScenarioSpec {
  int id = 1;                  // 1: high/random, 2: high/preferential,
                               // 3: low/random,  4: low/preferential
  bool high_willingness = true;
  bool preferential = false;

  // true-intensity parameters
  double beta0 = -2.0, beta1 = 0.75;
  double rho1 = 1.0, sigma1 = 0.5477225575051661;  // sqrt(0.3)

  // CS sampling-process parameters (intensity scale) and its field
  double cs_a0 = -4.0, cs_a1 = -2.0;
  double rho2 = 100.0, sigma2 = 1.140175425099138;  // sqrt(1.3)

  // detection coefficients per land-use class (entry 0 = baseline intercept)
  std::vector<double> nu_det{1.0, -2.0, 1.2, 1.4, 1.8, -3.0};

  // observer-weight score and activity-level offsets
  double obs_intercept = 10.0, obs_slope = -0.3;
  std::vector<double> zeta_act{0.0, 0.5, 1.0, 1.5, 2.0};

  // willingness Beta parameters
  double beta_low_a = 2.0, beta_low_b = 5.0;
  double beta_high_a = 5.0, beta_high_b = 1.5;

  // survey selection; p = 0.5 keeps the expected census under random
  // selection comparable to the preferential one and makes all-but-one-unit
  // dropouts rare across replicates
  double random_p = 0.5;
  double gamma0 = -2.5, gamma_eg = -1.5, gamma_cc = 3.5;
  bool selection_includes_field = false;  // kept out of the simulated design
  double zeta_sel = 0.0;

  static ScenarioSpec preset(int id);  // the four study cells
};

struct Replicate {
  std::uint64_t seed = 0;
  std::vector<double> omega1, omega2;
  std::vector<double> log_lambda_true;
  std::vector<double> tau, psi, delta;  // per-cell thinning stages
  std::vector<double> kappa;            // per-observer reporting propensity
  Pattern true_pattern;
  Pattern after_sampling;   // CS chain intermediates
  Pattern after_detection;
  Pattern cs_pattern;       // reported points, observer-labelled
  Pattern aux_pattern;      // all-activity pattern of the sampling process
  SelectionResult selection;
  Pattern ps_pattern;       // census of true points in selected units
};

// One replicate, fully determined by (domain, spec, master_seed, replicate).
Replicate simulate_replicate(const Domain& domain,
                             std::shared_ptr<const LatticeCore> core,
                             const ScenarioSpec& spec,
                             std::uint64_t master_seed, int replicate);

// Synthetic desk-scale domain: 40x40 grid of 2x2 cells, eight horizontal
// powerline bands forming the active network, vertical tertiary roads,
// smooth standardized covariates CLOUDCOVER / ELEVGRADIENT / DISTANCE, six
// land-use classes, ten observers. The survey units are one short segment
// per band (unit_rows x unit_cols cells), placed so that the per-unit
// CLOUDCOVER means spread across the ladder below; keeping units small
// relative to the field range gives the unit averages of omega1 real
// variance, and keeps the census small the way buffer surveys are.
struct SyntheticDomainConfig {
  int nx = 40, ny = 40;
  double h = 2.0;
  int n_lines = 8;
  double line_y0 = 6.0, line_spacing = 10.0;
  double band_halfwidth = 3.0;
  int unit_rows = 2, unit_cols = 4;
  std::vector<double> unit_cc_ladder{1.1,   0.75,  0.45,  0.15,
                                     -0.15, -0.45, -0.75, -1.1};
  std::vector<double> road_x{6.0, 14.0, 22.0, 30.0, 38.0, 46.0, 58.0, 72.0};
  std::vector<double> landuse_shares{0.40, 0.08, 0.22, 0.12, 0.12, 0.06};
  int n_observers = 10;
  std::uint64_t observer_seed = 0x0b5e72e5ULL;
};

Domain build_synthetic_domain(const SyntheticDomainConfig& cfg = {});

// Serialize a domain / replicate to a directory of the standard file
// formats (rasters, patterns, network, registry) plus a JSON manifest.
void save_domain(const std::string& dir, const Domain& domain);
Domain load_domain(const std::string& dir);
void save_replicate(const std::string& dir, const Grid& grid,
                    const Replicate& rep);
Replicate load_replicate(const std::string& dir, const Grid& grid);

}  // namespace lgcpfuse
