#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lgcpfuse/model.hpp"

// Blocked MCMC for the joint posterior.
//
// Update schedule per iteration:
//   1. omega1 by Langevin proposal preconditioned with its prior precision
//      Q1: mean = x(1 - eps^2/2) + (eps^2/2) Q1^{-1} d with d the data-term
//      gradient, noise eps * N(0, Q1^{-1});
//   2. omega2 likewise (models with a sampling field);
//   3. all fixed effects jointly by a standard Langevin proposal;
//   4. each (log rho, log sigma) pair by adaptive random walk, plus a joint
//      rescale move (log sigma, omega) -> (log sigma + r, e^r omega) that
//      decouples the field amplitude from its hyperparameter;
// Step sizes adapt toward standard optimal acceptance rates during warm-up
// only, so the post-warm-up chain is a fixed Markov kernel.

namespace lgcpfuse {

struct FitConfig {
  int n_chains = 2;
  int n_iter = 6000;
  int n_warmup = 2000;
  int thin = 1;
  int field_thin = 8;  // keep every k-th kept iteration's fields
  std::uint64_t seed = 1;

  double eps_omega = 0.3;    // initial field step
  double eps_fixed = 0.05;   // initial fixed-effect step
  double step_hyper = 0.4;   // initial random-walk step
  double step_rescale = 0.2; // initial rescale-move step
  bool adapt = true;
  bool store_fields = true;
};

struct BlockAccept {
  std::string block;
  int chain = 0;
  double rate = 0.0;
};

struct FitResult {
  bool ok = false;
  std::string error;
  int model_id = 0;

  // Scalar draws: raw sampled scalars plus derived natural-scale
  // hyperparameters (rho/sigma) appended as extra columns.
  std::vector<std::string> scalar_names;
  int n_scalar = 0;
  int n_kept = 0;  // per chain
  int n_chains = 0;
  std::vector<std::vector<double>> draws;  // [chain], row-major kept x scalar

  // Thinned latent-field draws, pooled over chains; field_draw_row[k] is the
  // pooled row index (chain * n_kept + row) of the matching scalar draw.
  std::vector<std::vector<double>> omega1_draws, omega2_draws;
  std::vector<int> field_draw_row;
  std::vector<double> omega1_mean, omega1_sd, omega2_mean, omega2_sd;

  std::vector<BlockAccept> accepts;
  std::vector<double> ess;         // per scalar, summed over chains
  std::vector<double> split_rhat;  // per scalar
  FitConfig config;

  int index_of(const std::string& name) const;  // -1 when missing
  // Pooled draws of one scalar (all chains concatenated).
  std::vector<double> column(const std::string& name) const;
  double posterior_mean(const std::string& name) const;
  double split_rhat_of(const std::string& name) const;
};

FitResult fit_model(const ModelSpec& spec, const Domain& domain,
                    const FitData& data, const PriorSpec& priors,
                    const FitConfig& config,
                    std::shared_ptr<const LatticeCore> core);

// Diagnostics on kept draws.
double effective_sample_size(const double* v, int n, int stride = 1);
double split_rhat_stat(const std::vector<std::vector<double>>& chains);

// FitResult directory layout: chain_<k>.csv (one column per scalar),
// omega<f>_draws.csv (wide, first column = pooled scalar row),
// omega_summary.csv, diagnostics.json, config.txt.
void save_fit(const std::string& dir, const FitResult& fit);
FitResult load_fit(const std::string& dir);

}  // namespace lgcpfuse
