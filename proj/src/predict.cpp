#include "lgcpfuse/predict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lgcpfuse/detail/math_core.hpp"

namespace lgcpfuse {

namespace {

// Linear-interpolation quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& s, double p) {
  const int n = static_cast<int>(s.size());
  if (n == 1) return s[0];
  const double h = (n - 1) * p;
  const int lo = static_cast<int>(h);
  if (lo + 1 >= n) return s[n - 1];
  const double frac = h - lo;
  return s[lo] * (1.0 - frac) + s[lo + 1] * frac;
}

}  // namespace

std::vector<double> risk_surface(const Domain& domain,
                                 const std::vector<std::string>& covariates,
                                 const std::vector<double>& beta,
                                 const std::vector<double>* field) {
  const int n = domain.grid.n_active();
  if (static_cast<int>(beta.size()) != 1 + static_cast<int>(covariates.size()))
    throw std::invalid_argument("coefficient count does not match covariates");
  std::vector<const std::vector<double>*> cols;
  for (const auto& name : covariates) cols.push_back(&domain.covariate(name));
  const double A = domain.grid.cell_area();
  std::vector<double> risk(n);
  for (int c = 0; c < n; ++c) {
    double lp = beta[0];
    for (std::size_t k = 0; k < cols.size(); ++k)
      lp += beta[k + 1] * (*cols[k])[c];
    if (field) lp += (*field)[c];
    risk[c] = -std::expm1(-kernels::detail::exp_core(lp) * A);
  }
  return risk;
}

RiskSummary predict_risk(const FitResult& fit, const ModelSpec& spec,
                         const Domain& domain, RiskMode mode) {
  const int n = domain.grid.n_active();
  const double A = domain.grid.cell_area();

  const int p = 1 + static_cast<int>(spec.x_covariates.size());
  std::vector<int> bcol(p);
  for (int k = 0; k < p; ++k) {
    bcol[k] = fit.index_of("beta" + std::to_string(k));
    if (bcol[k] < 0)
      throw std::invalid_argument("fit lacks coefficient beta" +
                                  std::to_string(k));
  }
  std::vector<const std::vector<double>*> cols;
  for (const auto& name : spec.x_covariates)
    cols.push_back(&domain.covariate(name));

  // Rows of beta draws to use, plus the matching field draw (if any).
  std::vector<std::vector<double>> betas;
  const std::vector<std::vector<double>>* fields = nullptr;
  if (mode == RiskMode::with_field) {
    if (fit.omega1_draws.empty())
      throw std::invalid_argument("fit stores no field draws");
    fields = &fit.omega1_draws;
    for (int row : fit.field_draw_row) {
      const int chain = row / fit.n_kept;
      const int r = row % fit.n_kept;
      const double* d = fit.draws[chain].data() +
                        static_cast<std::size_t>(r) * fit.n_scalar;
      std::vector<double> b(p);
      for (int k = 0; k < p; ++k) b[k] = d[bcol[k]];
      betas.push_back(std::move(b));
    }
  } else {
    for (int chain = 0; chain < fit.n_chains; ++chain)
      for (int r = 0; r < fit.n_kept; ++r) {
        const double* d = fit.draws[chain].data() +
                          static_cast<std::size_t>(r) * fit.n_scalar;
        std::vector<double> b(p);
        for (int k = 0; k < p; ++k) b[k] = d[bcol[k]];
        betas.push_back(std::move(b));
      }
  }
  const int nd = static_cast<int>(betas.size());
  if (nd == 0) throw std::invalid_argument("fit holds no draws");

  RiskSummary out;
  out.median.resize(n);
  out.sd.resize(n);
  out.lo.resize(n);
  out.hi.resize(n);
  out.width.resize(n);

  std::vector<double> cellvals(nd);
  for (int c = 0; c < n; ++c) {
    for (int d = 0; d < nd; ++d) {
      double lp = betas[d][0];
      for (int k = 1; k < p; ++k) lp += betas[d][k] * (*cols[k - 1])[c];
      if (fields) lp += (*fields)[d][c];
      cellvals[d] = -std::expm1(-kernels::detail::exp_core(lp) * A);
    }
    double s = 0.0, ss = 0.0;
    for (double v : cellvals) {
      s += v;
      ss += v * v;
    }
    out.sd[c] = nd > 1
        ? std::sqrt(std::max(0.0, (ss - s * s / nd) / (nd - 1.0)))
        : 0.0;
    std::sort(cellvals.begin(), cellvals.end());
    out.median[c] = quantile_sorted(cellvals, 0.5);
    out.lo[c] = quantile_sorted(cellvals, 0.025);
    out.hi[c] = quantile_sorted(cellvals, 0.975);
    out.width[c] = out.hi[c] - out.lo[c];
  }
  return out;
}

}  // namespace lgcpfuse
