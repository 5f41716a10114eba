#include "lgcpfuse/pointprocess.hpp"

#include <cmath>
#include <stdexcept>

#include "lgcpfuse/kernels.hpp"

namespace lgcpfuse {

Pattern simulate_poisson(const Grid& grid,
                         const std::vector<double>& log_lambda,
                         rng::Xoshiro256pp& rng) {
  if (static_cast<int>(log_lambda.size()) != grid.n_active())
    throw std::invalid_argument("simulate_poisson: field size mismatch");
  const double area = grid.cell_area();
  Pattern p;
  for (int c = 0; c < grid.n_active(); ++c) {
    const double mean = std::exp(log_lambda[c]) * area;
    const std::uint64_t k = rng.poisson(mean);
    if (k == 0) continue;
    const int f = grid.cell_of_active[c];
    const double bx = grid.x0 + grid.ix_of(f) * grid.h;
    const double by = grid.y0 + grid.iy_of(f) * grid.h;
    for (std::uint64_t i = 0; i < k; ++i)
      p.add(bx + rng.uniform() * grid.h, by + rng.uniform() * grid.h);
  }
  return p;
}

Pattern thin(const Grid& grid, const Pattern& p,
             const std::vector<double>& retain, rng::Xoshiro256pp& rng) {
  if (static_cast<int>(retain.size()) != grid.n_active())
    throw std::invalid_argument("thin: retention field size mismatch");
  Pattern out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int c = grid.active_at(p.x[i], p.y[i]);
    if (c < 0) throw std::runtime_error("thin: point outside active cells");
    if (rng.bernoulli(retain[c])) out.add(p.x[i], p.y[i], p.observer[i]);
  }
  return out;
}

std::vector<double> bin_counts(const Grid& grid, const Pattern& p) {
  std::vector<double> counts(grid.n_active(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int c = grid.active_at(p.x[i], p.y[i]);
    if (c < 0)
      throw std::runtime_error("bin_counts: point outside active cells");
    counts[c] += 1.0;
  }
  return counts;
}

double lgcp_loglik(const std::vector<double>& counts,
                   const std::vector<double>& eta, double area) {
  const std::size_t n = eta.size();
  if (counts.size() != n)
    throw std::invalid_argument("lgcp_loglik: size mismatch");
  std::vector<double> lam(n);
  const double integral = kernels::vexp_sum(eta.data(), lam.data(), n) * area;
  return kernels::dot(counts.data(), eta.data(), n) - integral;
}

double lgcp_loglik_subset(const std::vector<double>& counts,
                          const std::vector<double>& eta, double area,
                          const std::vector<int>& subset) {
  if (subset.empty()) return lgcp_loglik(counts, eta, area);
  double acc = 0.0;
  for (int c : subset)
    acc += counts[c] * eta[c] - std::exp(eta[c]) * area;
  return acc;
}

}  // namespace lgcpfuse
