#pragma once

#include <vector>

#include "lgcpfuse/sampler.hpp"

// Posterior risk surfaces. Risk is the per-cell presence probability
// 1 - exp(-lambda * cell_area); lambda uses the fixed effects alone or the
// fixed effects plus the latent field, summarized per cell across posterior
// draws.

namespace lgcpfuse {

enum class RiskMode { fixed_effects_only, with_field };

struct RiskSummary {
  std::vector<double> median, sd, lo, hi, width;  // per active cell
};

// `with_field` requires stored field draws and uses exactly the scalar draws
// they were taken from.
RiskSummary predict_risk(const FitResult& fit, const ModelSpec& spec,
                         const Domain& domain, RiskMode mode);

// Risk surface for one known coefficient vector (no uncertainty); used for
// truth surfaces and tests.
std::vector<double> risk_surface(const Domain& domain,
                                 const std::vector<std::string>& covariates,
                                 const std::vector<double>& beta,
                                 const std::vector<double>* field = nullptr);

}  // namespace lgcpfuse
