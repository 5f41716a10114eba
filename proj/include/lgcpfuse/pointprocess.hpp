#pragma once

#include <vector>

#include "lgcpfuse/grid.hpp"
#include "lgcpfuse/rng.hpp"

// Poisson point patterns with piecewise-constant intensity on the grid.

namespace lgcpfuse {

// Simulate a Poisson pattern with intensity exp(log_lambda[c]) on each
// active cell (points placed uniformly within their cell).
Pattern simulate_poisson(const Grid& grid,
                         const std::vector<double>& log_lambda,
                         rng::Xoshiro256pp& rng);

// Independent thinning: point i survives with probability
// retain[cell(i)]; observer labels are preserved.
Pattern thin(const Grid& grid, const Pattern& p,
             const std::vector<double>& retain, rng::Xoshiro256pp& rng);

// Count points per active cell. Points outside active cells are an error.
std::vector<double> bin_counts(const Grid& grid, const Pattern& p);

// Grid-approximated log-likelihood of binned counts under log-intensity eta:
//   sum_c counts[c] * eta[c] - area * sum_c exp(eta[c]).
// `subset` restricts both sums to the given cells (empty = all cells).
double lgcp_loglik(const std::vector<double>& counts,
                   const std::vector<double>& eta, double area);
double lgcp_loglik_subset(const std::vector<double>& counts,
                          const std::vector<double>& eta, double area,
                          const std::vector<int>& subset);

}  // namespace lgcpfuse
