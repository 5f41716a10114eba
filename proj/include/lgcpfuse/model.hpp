#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "lgcpfuse/field.hpp"
#include "lgcpfuse/grid.hpp"
#include "lgcpfuse/observation.hpp"
#include "lgcpfuse/scenario.hpp"

// Joint model definitions and the log-posterior they induce.
//
// Eight nested models combine up to four data sources: the professional
// survey pattern (a census of true points inside selected units), the
// unit-selection indicators, the citizen-science report pattern, and the
// auxiliary all-activity pattern that identifies the sampling-effort
// coefficients. Which terms are active is controlled by ModelSpec toggles;
// the numbered presets are:
//
//   1  survey LGCP only
//   2  survey LGCP + preferential unit selection
//   3  CS LGCP, no bias corrections
//   4  CS LGCP + sampling effort (tau), with the auxiliary pattern
//   5  model 4 + detectability by land use (psi)
//   6  models 2 and 5 combined (full fusion), delta = 1
//   7  model 6 + constant reporting probability delta = expit(theta)
//   8  model 6 + observer-mixture reporting delta(s) = sum_j w_j(s) kappa_j
//
// Parameters live in one flat vector; Layout records the offset of each
// block (-1 when the model omits it). Hyperparameters are carried on log
// scale and are updated by random walk, so grad() covers every block except
// the two hyperparameter pairs.

namespace lgcpfuse {

struct ModelSpec {
  enum class Reporting { none, simple, observer };

  int id = 1;
  bool use_ps = false;        // survey (professional) LGCP over selected units
  bool preferential = false;  // Bernoulli unit-selection likelihood
  bool use_cs = false;        // citizen-science LGCP
  bool cs_sampling = false;   // tau = expit(alpha0 + Z alpha + omega2)
  bool cs_detection = false;  // psi from land-use class
  Reporting reporting = Reporting::none;

  // The auxiliary pattern accompanies the sampling-effort term.
  bool include_aux_pattern = false;
  // Give the auxiliary pattern its own intercept (alpha0') instead of
  // sharing alpha0 with tau; the slope coefficients and omega2 are always
  // shared. Sharing (the default) lets the auxiliary pattern anchor the
  // effort intercept, which CS-only models cannot identify otherwise.
  bool aux_own_intercept = false;
  // Optional additive intercept offset for the CS intensity (default off:
  // beta is shared fully across the survey and CS likelihoods).
  bool cs_intercept_offset = false;

  // Formula: covariate names resolved against Domain::covariates.
  std::vector<std::string> x_covariates{"CLOUDCOVER"};
  std::vector<std::string> effort_covariates{"DISTANCE"};
  std::vector<std::string> selection_covariates{"ELEVGRADIENT", "CLOUDCOVER"};

  bool uses_omega2() const { return cs_sampling; }

  static ModelSpec preset(int id);
};

struct PriorSpec {
  double fixed_prec = 0.01;  // N(0, precision 0.01) on all fixed effects

  // Detection coefficients get informative priors (expert knowledge).
  std::vector<double> nu_center{1.0, -2.0, 1.2, 1.4, 1.8, -3.0};
  double nu_sd = 1.0;

  double theta_sd = 1.0;        // constant-reporting logit
  double kappa_logit_sd = 1.0;  // per-observer reporting logits

  // PC priors, one pair per field: P(rho < rho0) = alpha_rho,
  // P(sigma > sigma0) = alpha_sigma.
  double rho0_1 = 8.0, alpha_rho_1 = 0.5, sigma0_1 = 1.0, alpha_sigma_1 = 0.1;
  double rho0_2 = 8.0, alpha_rho_2 = 0.5, sigma0_2 = 1.0, alpha_sigma_2 = 0.1;

  // rho0 = frac * grid diameter for both fields.
  static PriorSpec defaults(const Grid& grid, double frac = 0.1);
};

// Observed data for one fit, all on the active-cell grid.
struct FitData {
  std::vector<double> cs_counts;       // CS reports per cell
  std::vector<double> aux_counts;      // auxiliary activity pattern per cell
  std::vector<double> ps_counts;       // professional pattern per cell
  std::vector<std::uint8_t> selected;  // per unit

  // Known observer-weight score parameters (reporting mixture weights).
  double obs_intercept = 10.0, obs_slope = -0.3;
  std::vector<double> zeta_act{0.0, 0.5, 1.0, 1.5, 2.0};

  static FitData from_replicate(const Domain& domain, const Replicate& rep);
};

// Offsets into the flat parameter vector; -1 marks an absent block.
struct Layout {
  int beta = -1, n_beta = 0;
  int beta0_cs = -1;
  int gamma = -1, n_gamma = 0;
  int zeta = -1;
  int alpha = -1, n_alpha = 0;
  int alpha0_aux = -1;
  int nu = -1, n_nu = 0;
  int theta = -1;
  int kappa = -1, n_kappa = 0;
  int hyper1 = -1;  // (log rho1, log sigma1)
  int hyper2 = -1;  // (log rho2, log sigma2)
  int omega1 = -1, omega2 = -1;
  int n_cells = 0;
  int n_fixed = 0;  // scalars updated by the gradient block = [0, n_fixed)
  int total = 0;

  std::vector<std::string> names;  // one per scalar entry (fields excluded)
};

// Additive pieces of the log posterior, for compositional checks and for
// pinpointing a non-finite term.
struct TermBreakdown {
  double ps = 0.0;         // survey LGCP
  double selection = 0.0;  // unit-selection Bernoulli
  double cs = 0.0;         // citizen-science LGCP
  double aux = 0.0;        // auxiliary LGCP
  double gmrf1 = 0.0, gmrf2 = 0.0;
  double prior = 0.0;

  double total() const { return ps + selection + cs + aux + gmrf1 + gmrf2 + prior; }
  // Name of the first non-finite term, or nullptr.
  const char* offending() const;
};

// The joint log posterior of one model on one dataset. Immutable inputs;
// an internal workspace makes evaluations allocation-free, so instances are
// not safe for concurrent use (chains evaluate sequentially or get copies).
class Posterior {
 public:
  Posterior(const ModelSpec& spec, const Domain& domain, const FitData& data,
            const PriorSpec& priors, std::shared_ptr<const LatticeCore> core);

  const Layout& layout() const { return lay_; }
  const ModelSpec& spec() const { return spec_; }

  // Initial state: fixed effects 0, fields 0, hyperparameters at prior
  // medians, reporting logits 0.
  std::vector<double> init_state() const;

  double value(const std::vector<double>& x) const;
  // Returns the value; fills g (resized) with the gradient over every block
  // except the hyperparameter pairs, whose entries are set to 0. When the
  // value is not finite the gradient contents are unspecified.
  double value_grad(const std::vector<double>& x, std::vector<double>& g) const;
  TermBreakdown terms(const std::vector<double>& x) const;

  // Prior precision operators at the hyperparameters stored in x (used by
  // the sampler for preconditioning); calling value()/terms() first is not
  // required.
  const LatticeGmrf& gmrf1(const std::vector<double>& x) const;
  const LatticeGmrf& gmrf2(const std::vector<double>& x) const;

  const std::vector<int>& selected_cells() const { return sel_cells_; }

 private:
  double eval(const std::vector<double>& x, std::vector<double>* g,
              TermBreakdown* tb) const;

  ModelSpec spec_;
  PriorSpec priors_;
  const Domain* domain_ = nullptr;
  Layout lay_;

  // Design columns (length n_cells each).
  std::vector<std::vector<double>> Xcols_;       // intensity: 1, covs...
  std::vector<std::vector<double>> Zcols_;       // effort: 1, covs...
  std::vector<std::vector<double>> Zsel_;        // selection: per-unit rows
  std::vector<std::vector<int>> unit_cells_;
  std::vector<double> cs_counts_, aux_counts_, ps_counts_;
  std::vector<std::uint8_t> selected_;
  std::vector<int> sel_cells_;
  std::vector<double> obs_weights_;  // n_cells x J, row-major (model 8)
  int n_obs_ = 0;

  mutable LatticeGmrf g1_, g2_;

  struct Work;  // scratch buffers
  std::unique_ptr<Work> work_;

 public:
  ~Posterior();
};

}  // namespace lgcpfuse
