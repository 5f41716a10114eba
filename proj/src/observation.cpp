#include "lgcpfuse/observation.hpp"

#include <cmath>
#include <stdexcept>

#include "lgcpfuse/detail/math_core.hpp"
#include "lgcpfuse/field.hpp"
#include "lgcpfuse/kernels.hpp"

namespace lgcpfuse {

using kernels::detail::expit_core;

std::vector<double> cs_retention_sim(double a0, double a1,
                                     const std::vector<double>& dist,
                                     const std::vector<double>& omega2) {
  const std::size_t n = dist.size();
  if (omega2.size() != n)
    throw std::invalid_argument("cs_retention_sim: size mismatch");
  std::vector<double> lp(n);
  for (std::size_t c = 0; c < n; ++c) lp[c] = a0 + a1 * dist[c] + omega2[c];
  std::vector<double> effort(n);
  kernels::vexp(lp.data(), effort.data(), n);
  std::vector<double> tau(n);
  for (std::size_t c = 0; c < n; ++c) tau[c] = -std::expm1(-effort[c]);
  return tau;
}

std::vector<double> cs_retention_logit(double a0, double a1,
                                       const std::vector<double>& dist,
                                       const std::vector<double>& omega2) {
  const std::size_t n = dist.size();
  if (omega2.size() != n)
    throw std::invalid_argument("cs_retention_logit: size mismatch");
  std::vector<double> lp(n);
  for (std::size_t c = 0; c < n; ++c) lp[c] = a0 + a1 * dist[c] + omega2[c];
  std::vector<double> tau(n);
  kernels::vexpit(lp.data(), tau.data(), n);
  return tau;
}

std::vector<double> detection_prob(const std::vector<std::int32_t>& landuse,
                                   const std::vector<double>& nu) {
  std::vector<double> psi(landuse.size());
  for (std::size_t c = 0; c < landuse.size(); ++c) {
    const int k = landuse[c];
    if (k < 0 || k >= static_cast<int>(nu.size()))
      throw std::invalid_argument("detection_prob: land-use class out of range");
    const double lp = k == 0 ? nu[0] : nu[0] + nu[k];
    psi[c] = expit_core(lp);
  }
  return psi;
}

std::vector<double> observer_weights(const Grid& grid,
                                     const std::vector<Observer>& observers,
                                     double intercept, double slope,
                                     const std::vector<double>& zeta_act) {
  const int n = grid.n_active();
  const int J = static_cast<int>(observers.size());
  if (J == 0) throw std::invalid_argument("observer_weights: no observers");
  std::vector<double> w(static_cast<std::size_t>(n) * J);
  for (int c = 0; c < n; ++c) {
    const int f = grid.cell_of_active[c];
    const double x = grid.cx(f), y = grid.cy(f);
    double total = 0.0;
    for (int j = 0; j < J; ++j) {
      const auto& o = observers[j];
      if (o.activity_level < 0 ||
          o.activity_level >= static_cast<int>(zeta_act.size()))
        throw std::invalid_argument("observer_weights: bad activity level");
      const double d = std::hypot(x - o.x, y - o.y);
      const double raw =
          expit_core(intercept + slope * d + zeta_act[o.activity_level]);
      w[static_cast<std::size_t>(c) * J + j] = raw;
      total += raw;
    }
    for (int j = 0; j < J; ++j) w[static_cast<std::size_t>(c) * J + j] /= total;
  }
  return w;
}

std::vector<double> reporting_simple(double theta, int n_cells) {
  return std::vector<double>(n_cells, expit_core(theta));
}

std::vector<double> reporting_observer(const std::vector<double>& weights,
                                       const std::vector<double>& kappa,
                                       int n_cells) {
  const int J = static_cast<int>(kappa.size());
  if (weights.size() != static_cast<std::size_t>(n_cells) * J)
    throw std::invalid_argument("reporting_observer: weight matrix mismatch");
  std::vector<double> delta(n_cells);
  for (int c = 0; c < n_cells; ++c)
    delta[c] = kernels::dot(&weights[static_cast<std::size_t>(c) * J],
                            kappa.data(), J);
  return delta;
}

std::vector<double> draw_willingness(bool high, int n_observers,
                                     rng::Xoshiro256pp& rng) {
  std::vector<double> kappa(n_observers);
  for (auto& k : kappa) k = high ? rng.beta(5.0, 1.5) : rng.beta(2.0, 5.0);
  return kappa;
}

std::vector<double> unit_means(const Domain& domain,
                               const std::vector<double>& covariate) {
  std::vector<double> mean(domain.n_units, 0.0);
  std::vector<int> count(domain.n_units, 0);
  for (std::size_t c = 0; c < domain.unit_of.size(); ++c) {
    const int u = domain.unit_of[c];
    if (u < 0) continue;
    mean[u] += covariate[c];
    ++count[u];
  }
  for (int u = 0; u < domain.n_units; ++u) {
    if (count[u] == 0) throw std::runtime_error("unit_means: empty unit");
    mean[u] /= count[u];
  }
  return mean;
}

SelectionResult select_survey_units(const Domain& domain,
                                    const SurveySelectionParams& params,
                                    const std::vector<double>& omega1,
                                    rng::Xoshiro256pp& rng) {
  SelectionResult res;
  res.prob.assign(domain.n_units, params.p);
  if (params.preferential) {
    const auto eg = unit_means(domain, domain.covariate("ELEVGRADIENT"));
    const auto cc = unit_means(domain, domain.covariate("CLOUDCOVER"));
    for (int u = 0; u < domain.n_units; ++u) {
      double lp = params.g0 + params.g_eg * eg[u] + params.g_cc * cc[u];
      if (params.include_field)
        lp += params.zeta * areal_logit_average(omega1, domain.unit_cells(u));
      res.prob[u] = expit_core(lp);
    }
  }
  res.selected.resize(domain.n_units);
  for (int u = 0; u < domain.n_units; ++u)
    res.selected[u] = rng.bernoulli(res.prob[u]) ? 1 : 0;
  return res;
}

}  // namespace lgcpfuse
