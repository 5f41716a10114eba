#pragma once

#include <cstdint>
#include <vector>

#include "lgcpfuse/grid.hpp"
#include "lgcpfuse/rng.hpp"

// The two observation processes layered on the true point process: the
// three-stage citizen-science thinning chain (sampling -> detection ->
// reporting) and the areal survey-unit selection, plus the small field
// builders they share with the inference code.

namespace lgcpfuse {

// Citizen-science sampling retention.
//
// Simulation link (visit probability of the sampling intensity):
//   tau = 1 - exp(-exp(a0 + a1*dist + omega2))
// Inference link (logistic):
//   tau = expit(a0 + a1*dist + omega2)
std::vector<double> cs_retention_sim(double a0, double a1,
                                     const std::vector<double>& dist,
                                     const std::vector<double>& omega2);
std::vector<double> cs_retention_logit(double a0, double a1,
                                       const std::vector<double>& dist,
                                       const std::vector<double>& omega2);

// Detection probability by land-use class:
//   psi = expit(nu[0] + nu[class]) for class > 0, expit(nu[0]) for the
// baseline class 0. nu has one entry per class (nu[0] doubles as intercept).
std::vector<double> detection_prob(const std::vector<std::int32_t>& landuse,
                                   const std::vector<double>& nu);

// Per-cell observer weights, row-major n_cells x J:
//   raw_j = expit(intercept + slope*dist_to_observer_j + zeta_act[level_j]),
//   w_j = raw_j / sum_k raw_k.
std::vector<double> observer_weights(const Grid& grid,
                                     const std::vector<Observer>& observers,
                                     double intercept, double slope,
                                     const std::vector<double>& zeta_act);

// Reporting probability field delta.
std::vector<double> reporting_simple(double theta, int n_cells);
std::vector<double> reporting_observer(const std::vector<double>& weights,
                                       const std::vector<double>& kappa,
                                       int n_cells);

// Per-observer reporting propensities kappa_j, one Beta draw per observer.
std::vector<double> draw_willingness(bool high, int n_observers,
                                     rng::Xoshiro256pp& rng);

struct SurveySelectionParams {
  bool preferential = false;
  double p = 0.3;  // random mode
  // preferential mode: logit phi_i = g0 + g_eg*EGbar_i + g_cc*CCbar_i
  //                               (+ zeta * logit-avg of omega1 over unit)
  double g0 = -2.5, g_eg = -1.5, g_cc = 3.5;
  bool include_field = false;
  double zeta = 0.0;
};

struct SelectionResult {
  std::vector<std::uint8_t> selected;  // per unit
  std::vector<double> prob;            // per unit
};

SelectionResult select_survey_units(
    const Domain& domain, const SurveySelectionParams& params,
    const std::vector<double>& omega1, rng::Xoshiro256pp& rng);

// Unit-level areal means of a cell covariate.
std::vector<double> unit_means(const Domain& domain,
                               const std::vector<double>& covariate);

}  // namespace lgcpfuse
