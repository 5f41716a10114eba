#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgcpfuse/metrics.hpp"
#include "lgcpfuse/model.hpp"
#include "lgcpfuse/sampler.hpp"

// The simulation-study driver: a (scenario x replicate x model) work queue
// over simulate -> fit -> summarize, with per-triple artifacts on disk, a
// resume manifest, and deterministic aggregation into bias/RMSE tables and
// prediction maps.
//
// Run directory layout:
//   config_echo.json              resolved configuration
//   manifest.jsonl                one line per finished triple (resume)
//   s<S>/r<R>/true_risk.csv       replicate truth surface
//   s<S>/r<R>/m<M>/summary.json   posterior means, diagnostics, status
//   s<S>/r<R>/m<M>/risk_*.csv     fixed-effects risk rasters
//   metrics.csv, failures.csv, report.txt, maps/*.csv|svg   aggregates

namespace lgcpfuse {

struct ExperimentConfig {
  std::vector<int> scenarios{1, 2, 4};
  std::vector<int> models{1, 2, 3, 4, 5, 6, 7, 8};
  int n_replicates = 20;
  // The two reporting models (7, 8) are skipped in the high-willingness
  // scenarios (1 and 2) unless this override is set.
  bool reporting_models_everywhere = false;

  std::uint64_t master_seed = 1;
  int threads = 1;
  bool resume = false;
  std::string out_dir = "experiment_run";
  std::string domain_dir;  // empty: built-in synthetic domain

  double prior_range_frac = 0.1;
  bool aux_own_intercept = false;
  // Desk-scale sampler: ~20 min for the default three-scenario study on one
  // core, with beta1 well converged (the selection and detection blocks stay
  // noisy at this length, as expected with few selected units).
  FitConfig sampler{.n_iter = 2200, .n_warmup = 700, .thin = 3};

  bool save_chains = false;      // full FitResult per triple (large)
  bool test_hook_truth = false;  // metric identity hook: record truth as
                                 // the posterior mean

  std::vector<int> models_for_scenario(int scenario) const;
};

ExperimentConfig load_experiment_config(const std::string& path);
void write_experiment_config(const std::string& path,
                             const ExperimentConfig& cfg);

struct ExperimentResult {
  MetricsTable table;
  int n_completed = 0;
  int n_failures = 0;
  std::string out_dir;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Aggregation-only pass over an existing run directory (the report verb);
// rebuilds metrics.csv, report.txt and the comparison maps from the stored
// per-triple artifacts.
ExperimentResult aggregate_run(const std::string& out_dir);

}  // namespace lgcpfuse
