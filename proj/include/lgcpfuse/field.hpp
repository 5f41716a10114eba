#pragma once

#include <memory>
#include <vector>

#include "lgcpfuse/grid.hpp"
#include "lgcpfuse/rng.hpp"

// Latent Gaussian fields on the active cells.
//
// The workhorse is a lattice Markov field whose precision is built from the
// active-cell graph Laplacian G (Neumann boundaries, entries 1/h^2):
//
//   M(kappa) = kappa^2 I + G,   Q = s h^2 M^2,   kappa = sqrt(8)/rho,
//
// which approximates a Matern smoothness-1 field with range rho. The scale s
// is calibrated so interior cells have marginal variance sigma^2 exactly:
// from the one-time eigendecomposition G = V diag(lambda) V', the marginal
// variance of an interior cell under Q = h^2 M^2 is
//
//   v(kappa) = (1/h^2) sum_j w_j / (lambda_j + kappa^2)^2,
//
// with w_j the interior-cell average of V_ij^2, so s = v(kappa)/sigma^2.
// The same spectrum gives log|Q| in O(n) per (rho, sigma), which keeps
// hyperparameter updates cheap. Boundary cells end up with somewhat larger
// marginal variance (Neumann effect); that is accepted and documented.
//
// A dense covariance backend with the exact Matern kernel is provided for
// cross-checks and small problems.

namespace lgcpfuse {

// Matern correlation with smoothness 1: (kappa d) K_1(kappa d),
// kappa = sqrt(8)/rho, so corr ~ 0.14 at distance rho.
double matern_corr(double d, double rho);

// Immutable per-grid data shared by all field instances: adjacency, spectrum.
class LatticeCore {
 public:
  explicit LatticeCore(const Grid& grid);

  int n() const { return n_; }
  double h() const { return h_; }

  // y = (kappa^2 I + G) x
  void apply_M(double kappa2, const double* x, double* y) const;

  const std::vector<double>& eigenvalues() const { return lambda_; }
  const std::vector<double>& interior_weights() const { return w_; }

  // Marginal interior-cell variance of the unscaled field (s = 1).
  double unit_variance(double kappa) const;

  // CSR adjacency (used by the solver below).
  const std::vector<int>& adj_offset() const { return adj_off_; }
  const std::vector<int>& adj_index() const { return adj_idx_; }
  const std::vector<double>& degree() const { return deg_; }

 private:
  int n_ = 0;
  double h_ = 1.0;
  std::vector<int> adj_off_, adj_idx_;
  std::vector<double> deg_;        // degree / h^2 per cell
  std::vector<double> lambda_;     // eigenvalues of G, ascending
  std::vector<double> w_;          // interior-averaged squared eigenvectors
};

class LatticeGmrf {
 public:
  LatticeGmrf(std::shared_ptr<const LatticeCore> core, double rho,
              double sigma);
  ~LatticeGmrf();
  LatticeGmrf(LatticeGmrf&&) noexcept;
  LatticeGmrf& operator=(LatticeGmrf&&) noexcept;

  int n() const;
  double rho() const { return rho_; }
  double sigma() const { return sigma_; }
  void set_params(double rho, double sigma);

  double quad(const std::vector<double>& x) const;    // x' Q x
  double logdet() const;                              // log |Q|
  double logdens(const std::vector<double>& x) const; // N(0, Q^{-1}) density
  // g += scale * d/dx logdens = -scale * Q x
  void add_grad_logdens(const std::vector<double>& x, double scale,
                        std::vector<double>& g) const;
  void apply_Q(const std::vector<double>& x, std::vector<double>& y) const;
  // y = Q^{-1} b (two sparse triangular solves; factorization is cached
  // until set_params changes kappa)
  void solve_Q(const std::vector<double>& b, std::vector<double>& y) const;
  // y = M^{-1} b / sqrt(s h^2), i.e. y ~ N(0, Q^{-1}) when b ~ N(0, I)
  void sample(rng::Xoshiro256pp& rng, std::vector<double>& x) const;

  double kappa() const { return kappa_; }
  double scale() const { return s_; }  // Q = s h^2 M^2

  const LatticeCore& core() const { return *core_; }

 private:
  void ensure_factor() const;

  std::shared_ptr<const LatticeCore> core_;
  double rho_ = 1.0, sigma_ = 1.0, kappa_ = 1.0, s_ = 1.0;
  struct Factor;  // Eigen sparse Cholesky of M(kappa)
  mutable std::unique_ptr<Factor> factor_;
  mutable double factor_kappa_ = -1.0;
};

// Exact Matern-covariance field (dense Cholesky); reference backend for
// cross-checks, usable up to a few thousand cells.
class DenseMaternField {
 public:
  DenseMaternField(const Grid& grid, double rho, double sigma,
                   double nugget = 1e-10);
  ~DenseMaternField();
  DenseMaternField(DenseMaternField&&) noexcept;

  int n() const;
  double logdens(const std::vector<double>& x) const;
  void sample(rng::Xoshiro256pp& rng, std::vector<double>& x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Mean of x over the given cells.
double areal_mean(const std::vector<double>& x, const std::vector<int>& cells);

// logit( mean over cells of expit(x_c) ): aggregation of a logit-scale field
// to one unit-level logit value.
double areal_logit_average(const std::vector<double>& x,
                           const std::vector<int>& cells);

}  // namespace lgcpfuse
