#include "lgcpfuse/field.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "lgcpfuse/detail/math_core.hpp"
#include "lgcpfuse/kernels.hpp"

namespace lgcpfuse {

double matern_corr(double d, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("matern_corr: rho <= 0");
  if (d <= 0.0) return 1.0;
  const double t = std::sqrt(8.0) * d / rho;
  if (t > 700.0) return 0.0;
  return t * std::cyl_bessel_k(1.0, t);
}

LatticeCore::LatticeCore(const Grid& grid) {
  n_ = grid.n_active();
  h_ = grid.h;
  if (n_ <= 0) throw std::invalid_argument("lattice core: empty grid");
  const double inv_h2 = 1.0 / (h_ * h_);

  adj_off_.assign(n_ + 1, 0);
  deg_.assign(n_, 0.0);
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};
  std::vector<std::vector<int>> nbrs(n_);
  for (int c = 0; c < n_; ++c) {
    const int f = grid.cell_of_active[c];
    const int ix = grid.ix_of(f), iy = grid.iy_of(f);
    for (int k = 0; k < 4; ++k) {
      const int jx = ix + dx[k], jy = iy + dy[k];
      if (jx < 0 || jx >= grid.nx || jy < 0 || jy >= grid.ny) continue;
      const int a = grid.active_of_cell[grid.flat(jx, jy)];
      if (a >= 0) nbrs[c].push_back(a);
    }
    deg_[c] = static_cast<double>(nbrs[c].size()) * inv_h2;
  }
  for (int c = 0; c < n_; ++c) adj_off_[c + 1] = adj_off_[c] + (int)nbrs[c].size();
  adj_idx_.reserve(adj_off_[n_]);
  for (int c = 0; c < n_; ++c)
    adj_idx_.insert(adj_idx_.end(), nbrs[c].begin(), nbrs[c].end());

  // one-time dense eigendecomposition of G; n is a few thousand at most
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n_, n_);
  for (int c = 0; c < n_; ++c) {
    G(c, c) = deg_[c];
    for (int k = adj_off_[c]; k < adj_off_[c + 1]; ++k)
      G(c, adj_idx_[k]) = -inv_h2;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("lattice core: eigendecomposition failed");

  lambda_.resize(n_);
  for (int j = 0; j < n_; ++j) lambda_[j] = std::max(0.0, eig.eigenvalues()[j]);

  // interior cells = all four neighbours active; fall back to every cell
  std::vector<int> interior;
  for (int c = 0; c < n_; ++c)
    if (adj_off_[c + 1] - adj_off_[c] == 4) interior.push_back(c);
  if (interior.empty())
    for (int c = 0; c < n_; ++c) interior.push_back(c);

  w_.assign(n_, 0.0);
  const auto& V = eig.eigenvectors();
  for (int j = 0; j < n_; ++j) {
    double acc = 0.0;
    for (int c : interior) acc += V(c, j) * V(c, j);
    w_[j] = acc / static_cast<double>(interior.size());
  }
}

void LatticeCore::apply_M(double kappa2, const double* x, double* y) const {
  const double inv_h2 = 1.0 / (h_ * h_);
  for (int c = 0; c < n_; ++c) {
    double acc = (kappa2 + deg_[c]) * x[c];
    for (int k = adj_off_[c]; k < adj_off_[c + 1]; ++k)
      acc -= inv_h2 * x[adj_idx_[k]];
    y[c] = acc;
  }
}

double LatticeCore::unit_variance(double kappa) const {
  const double k2 = kappa * kappa;
  double acc = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double d = lambda_[j] + k2;
    acc += w_[j] / (d * d);
  }
  return acc / (h_ * h_);
}

struct LatticeGmrf::Factor {
  Eigen::SparseMatrix<double> M;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

LatticeGmrf::LatticeGmrf(std::shared_ptr<const LatticeCore> core, double rho,
                         double sigma)
    : core_(std::move(core)) {
  set_params(rho, sigma);
}

LatticeGmrf::~LatticeGmrf() = default;
LatticeGmrf::LatticeGmrf(LatticeGmrf&&) noexcept = default;
LatticeGmrf& LatticeGmrf::operator=(LatticeGmrf&&) noexcept = default;

int LatticeGmrf::n() const { return core_->n(); }

void LatticeGmrf::set_params(double rho, double sigma) {
  if (!(rho > 0.0) || !(sigma > 0.0))
    throw std::invalid_argument("gmrf params must be positive");
  rho_ = rho;
  sigma_ = sigma;
  kappa_ = std::sqrt(8.0) / rho;
  s_ = core_->unit_variance(kappa_) / (sigma * sigma);
}

double LatticeGmrf::quad(const std::vector<double>& x) const {
  const int n = core_->n();
  std::vector<double> mx(n);
  core_->apply_M(kappa_ * kappa_, x.data(), mx.data());
  const double h2 = core_->h() * core_->h();
  return s_ * h2 * kernels::sq_norm(mx.data(), n);
}

double LatticeGmrf::logdet() const {
  const int n = core_->n();
  const double k2 = kappa_ * kappa_;
  const double h2 = core_->h() * core_->h();
  double acc = static_cast<double>(n) * std::log(s_ * h2);
  const auto& lambda = core_->eigenvalues();
  for (int j = 0; j < n; ++j) acc += 2.0 * std::log(lambda[j] + k2);
  return acc;
}

double LatticeGmrf::logdens(const std::vector<double>& x) const {
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  return 0.5 * logdet() - 0.5 * quad(x) -
         static_cast<double>(core_->n()) * kHalfLog2Pi;
}

void LatticeGmrf::add_grad_logdens(const std::vector<double>& x, double scale,
                                   std::vector<double>& g) const {
  const int n = core_->n();
  std::vector<double> t(n), qx(n);
  core_->apply_M(kappa_ * kappa_, x.data(), t.data());
  core_->apply_M(kappa_ * kappa_, t.data(), qx.data());
  const double a = -scale * s_ * core_->h() * core_->h();
  kernels::axpy(a, qx.data(), g.data(), static_cast<std::size_t>(n));
}

void LatticeGmrf::apply_Q(const std::vector<double>& x,
                          std::vector<double>& y) const {
  const int n = core_->n();
  std::vector<double> t(n);
  y.resize(n);
  core_->apply_M(kappa_ * kappa_, x.data(), t.data());
  core_->apply_M(kappa_ * kappa_, t.data(), y.data());
  const double a = s_ * core_->h() * core_->h();
  for (int c = 0; c < n; ++c) y[c] *= a;
}

void LatticeGmrf::ensure_factor() const {
  if (factor_ && factor_kappa_ == kappa_) return;
  if (!factor_) factor_ = std::make_unique<Factor>();
  const int n = core_->n();
  const double inv_h2 = 1.0 / (core_->h() * core_->h());
  const double k2 = kappa_ * kappa_;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + core_->adj_index().size());
  const auto& off = core_->adj_offset();
  const auto& idx = core_->adj_index();
  const auto& deg = core_->degree();
  for (int c = 0; c < n; ++c) {
    trip.emplace_back(c, c, k2 + deg[c]);
    for (int k = off[c]; k < off[c + 1]; ++k)
      trip.emplace_back(c, idx[k], -inv_h2);
  }
  factor_->M.resize(n, n);
  factor_->M.setFromTriplets(trip.begin(), trip.end());
  factor_->llt.compute(factor_->M);
  if (factor_->llt.info() != Eigen::Success)
    throw std::runtime_error("gmrf factorization failed");
  factor_kappa_ = kappa_;
}

void LatticeGmrf::solve_Q(const std::vector<double>& b,
                          std::vector<double>& y) const {
  ensure_factor();
  const int n = core_->n();
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd t = factor_->llt.solve(bv);
  Eigen::VectorXd r = factor_->llt.solve(t);
  y.resize(n);
  const double a = 1.0 / (s_ * core_->h() * core_->h());
  for (int c = 0; c < n; ++c) y[c] = a * r[c];
}

void LatticeGmrf::sample(rng::Xoshiro256pp& rng, std::vector<double>& x) const {
  ensure_factor();
  const int n = core_->n();
  Eigen::VectorXd z(n);
  for (int c = 0; c < n; ++c) z[c] = rng.normal();
  Eigen::VectorXd t = factor_->llt.solve(z);
  x.resize(n);
  const double a = 1.0 / std::sqrt(s_ * core_->h() * core_->h());
  for (int c = 0; c < n; ++c) x[c] = a * t[c];
}

struct DenseMaternField::Impl {
  Eigen::MatrixXd L;        // Cholesky factor of the covariance
  Eigen::MatrixXd cov_inv;  // precision, for logdens
  double logdet_cov = 0.0;
  int n = 0;
};

DenseMaternField::DenseMaternField(const Grid& grid, double rho, double sigma,
                                   double nugget)
    : impl_(std::make_unique<Impl>()) {
  const int n = grid.n_active();
  impl_->n = n;
  Eigen::MatrixXd C(n, n);
  for (int a = 0; a < n; ++a) {
    const int fa = grid.cell_of_active[a];
    for (int b = 0; b <= a; ++b) {
      const int fb = grid.cell_of_active[b];
      const double d =
          std::hypot(grid.cx(fa) - grid.cx(fb), grid.cy(fa) - grid.cy(fb));
      const double v = sigma * sigma * matern_corr(d, rho);
      C(a, b) = v;
      C(b, a) = v;
    }
    C(a, a) += nugget;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("dense matern covariance not positive definite");
  impl_->L = llt.matrixL();
  for (int j = 0; j < n; ++j)
    impl_->logdet_cov += 2.0 * std::log(impl_->L(j, j));
  impl_->cov_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
}

DenseMaternField::~DenseMaternField() = default;
DenseMaternField::DenseMaternField(DenseMaternField&&) noexcept = default;

int DenseMaternField::n() const { return impl_->n; }

double DenseMaternField::logdens(const std::vector<double>& x) const {
  const int n = impl_->n;
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  const double quad = xv.dot(impl_->cov_inv * xv);
  return -0.5 * impl_->logdet_cov - 0.5 * quad - n * kHalfLog2Pi;
}

void DenseMaternField::sample(rng::Xoshiro256pp& rng,
                              std::vector<double>& x) const {
  const int n = impl_->n;
  Eigen::VectorXd z(n);
  for (int c = 0; c < n; ++c) z[c] = rng.normal();
  Eigen::VectorXd v = impl_->L * z;
  x.assign(v.data(), v.data() + n);
}

double areal_mean(const std::vector<double>& x,
                  const std::vector<int>& cells) {
  if (cells.empty()) throw std::invalid_argument("areal_mean: empty unit");
  double acc = 0.0;
  for (int c : cells) acc += x[c];
  return acc / static_cast<double>(cells.size());
}

double areal_logit_average(const std::vector<double>& x,
                           const std::vector<int>& cells) {
  if (cells.empty())
    throw std::invalid_argument("areal_logit_average: empty unit");
  double acc = 0.0;
  for (int c : cells) acc += kernels::detail::expit_core(x[c]);
  const double m = acc / static_cast<double>(cells.size());
  return std::log(m) - std::log1p(-m);
}

}  // namespace lgcpfuse
