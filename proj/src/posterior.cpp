#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lgcpfuse/detail/math_core.hpp"
#include "lgcpfuse/kernels.hpp"
#include "lgcpfuse/model.hpp"
#include "lgcpfuse/pointprocess.hpp"

namespace lgcpfuse {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log N(x | mu, precision prec)
inline double normal_lp(double x, double mu, double prec) {
  const double d = x - mu;
  return 0.5 * (std::log(prec) - kLog2Pi) - 0.5 * prec * d * d;
}

}  // namespace

ModelSpec ModelSpec::preset(int id) {
  ModelSpec m;
  m.id = id;
  switch (id) {
    case 1:
      m.use_ps = true;
      break;
    case 2:
      m.use_ps = true;
      m.preferential = true;
      break;
    case 3:
      m.use_cs = true;
      break;
    case 4:
      m.use_cs = true;
      m.cs_sampling = true;
      break;
    case 5:
      m.use_cs = true;
      m.cs_sampling = true;
      m.cs_detection = true;
      break;
    case 6:
    case 7:
    case 8:
      m.use_ps = true;
      m.preferential = true;
      m.use_cs = true;
      m.cs_sampling = true;
      m.cs_detection = true;
      if (id == 7) m.reporting = Reporting::simple;
      if (id == 8) m.reporting = Reporting::observer;
      break;
    default:
      throw std::invalid_argument("model id must be in 1..8");
  }
  m.include_aux_pattern = m.cs_sampling;
  return m;
}

PriorSpec PriorSpec::defaults(const Grid& grid, double frac) {
  PriorSpec p;
  p.rho0_1 = p.rho0_2 = frac * grid.diameter();
  return p;
}

FitData FitData::from_replicate(const Domain& domain, const Replicate& rep) {
  FitData d;
  d.cs_counts = bin_counts(domain.grid, rep.cs_pattern);
  d.aux_counts = bin_counts(domain.grid, rep.aux_pattern);
  d.ps_counts = bin_counts(domain.grid, rep.ps_pattern);
  d.selected = rep.selection.selected;
  return d;
}

const char* TermBreakdown::offending() const {
  if (!std::isfinite(ps)) return "ps";
  if (!std::isfinite(selection)) return "selection";
  if (!std::isfinite(cs)) return "cs";
  if (!std::isfinite(aux)) return "aux";
  if (!std::isfinite(gmrf1)) return "gmrf1";
  if (!std::isfinite(gmrf2)) return "gmrf2";
  if (!std::isfinite(prior)) return "prior";
  return nullptr;
}

struct Posterior::Work {
  std::vector<double> o1, o2;          // field copies
  std::vector<double> eta, lp, el, r;  // intensity pieces / residuals
  std::vector<double> t, tau, nt, st;  // effort predictor pieces
  std::vector<double> u, eu;           // auxiliary predictor
  std::vector<double> p1;              // expit(omega1)
  std::vector<double> delta, logdelta;
  std::vector<double> buf, qx;
};

Posterior::~Posterior() = default;

Posterior::Posterior(const ModelSpec& spec, const Domain& domain,
                     const FitData& data, const PriorSpec& priors,
                     std::shared_ptr<const LatticeCore> core)
    : spec_(spec),
      priors_(priors),
      domain_(&domain),
      g1_(core, 1.0, 1.0),
      g2_(core, 1.0, 1.0),
      work_(new Work) {
  if (!spec.use_ps && !spec.use_cs)
    throw std::invalid_argument("model uses neither data source");
  if ((spec.cs_sampling || spec.cs_detection ||
       spec.reporting != ModelSpec::Reporting::none) &&
      !spec.use_cs)
    throw std::invalid_argument("CS bias terms require the CS likelihood");
  if (spec.include_aux_pattern && !spec.cs_sampling)
    throw std::invalid_argument("auxiliary pattern requires the sampling term");
  if (spec.preferential && !spec.use_ps)
    throw std::invalid_argument("unit selection accompanies the survey data");

  const int n = domain.grid.n_active();
  lay_.n_cells = n;

  // Design columns.
  Xcols_.emplace_back(n, 1.0);
  for (const auto& name : spec.x_covariates)
    Xcols_.push_back(domain.covariate(name));
  if (spec.cs_sampling) {
    Zcols_.emplace_back(n, 1.0);
    for (const auto& name : spec.effort_covariates)
      Zcols_.push_back(domain.covariate(name));
  }
  if (spec.preferential) {
    if (domain.n_units <= 0)
      throw std::invalid_argument("selection model needs survey units");
    Zsel_.assign(domain.n_units, {});
    std::vector<std::vector<double>> cols;
    for (const auto& name : spec.selection_covariates)
      cols.push_back(unit_means(domain, domain.covariate(name)));
    for (int i = 0; i < domain.n_units; ++i) {
      Zsel_[i].push_back(1.0);
      for (const auto& cvals : cols) Zsel_[i].push_back(cvals[i]);
    }
  }
  unit_cells_.resize(domain.n_units);
  for (int i = 0; i < domain.n_units; ++i) unit_cells_[i] = domain.unit_cells(i);

  cs_counts_ = data.cs_counts;
  aux_counts_ = data.aux_counts;
  ps_counts_ = data.ps_counts;
  selected_ = data.selected;
  if (spec.use_ps) {
    if (static_cast<int>(selected_.size()) != domain.n_units)
      throw std::invalid_argument("selection vector does not match units");
    for (int c = 0; c < n; ++c) {
      const int u = domain.unit_of[c];
      if (u >= 0 && selected_[u]) sel_cells_.push_back(c);
    }
    if (ps_counts_.empty()) ps_counts_.assign(n, 0.0);
  }
  if (spec.use_cs && cs_counts_.empty()) cs_counts_.assign(n, 0.0);
  if (spec.include_aux_pattern && aux_counts_.empty())
    aux_counts_.assign(n, 0.0);

  if (spec.reporting == ModelSpec::Reporting::observer) {
    n_obs_ = static_cast<int>(domain.observers.size());
    if (n_obs_ == 0)
      throw std::invalid_argument("observer reporting needs a registry");
    obs_weights_ = observer_weights(domain.grid, domain.observers,
                                    data.obs_intercept, data.obs_slope,
                                    data.zeta_act);
  }

  // Flat layout: scalars first (gradient block), then hyperparameters,
  // then the latent fields.
  auto& L = lay_;
  int off = 0;
  auto scalar = [&](const std::string& name) {
    L.names.push_back(name);
    return off++;
  };
  L.beta = off;
  L.n_beta = static_cast<int>(Xcols_.size());
  for (int k = 0; k < L.n_beta; ++k) scalar("beta" + std::to_string(k));
  if (spec.use_cs && spec.cs_intercept_offset) L.beta0_cs = scalar("beta0_cs");
  if (spec.preferential) {
    L.gamma = off;
    L.n_gamma = static_cast<int>(Zsel_[0].size());
    for (int k = 0; k < L.n_gamma; ++k) scalar("gamma" + std::to_string(k));
    L.zeta = scalar("zeta");
  }
  if (spec.cs_sampling) {
    L.alpha = off;
    L.n_alpha = static_cast<int>(Zcols_.size());
    for (int k = 0; k < L.n_alpha; ++k) scalar("alpha" + std::to_string(k));
    if (spec.include_aux_pattern && spec.aux_own_intercept)
      L.alpha0_aux = scalar("alpha0_aux");
  }
  if (spec.cs_detection) {
    L.nu = off;
    L.n_nu = domain.n_land_use;
    if (L.n_nu <= 0) throw std::invalid_argument("detection needs land use");
    for (int k = 0; k < L.n_nu; ++k) scalar("nu" + std::to_string(k));
  }
  if (spec.reporting == ModelSpec::Reporting::simple) L.theta = scalar("theta");
  if (spec.reporting == ModelSpec::Reporting::observer) {
    L.kappa = off;
    L.n_kappa = n_obs_;
    for (int k = 0; k < n_obs_; ++k) scalar("kappa" + std::to_string(k));
  }
  L.n_fixed = off;
  L.hyper1 = off;
  scalar("log_rho1");
  scalar("log_sigma1");
  if (spec.uses_omega2()) {
    L.hyper2 = off;
    scalar("log_rho2");
    scalar("log_sigma2");
  }
  L.omega1 = off;
  off += n;
  if (spec.uses_omega2()) {
    L.omega2 = off;
    off += n;
  }
  L.total = off;

  auto& w = *work_;
  w.o1.resize(n);
  w.eta.resize(n);
  w.lp.resize(n);
  w.el.resize(n);
  w.r.resize(n);
  w.p1.resize(n);
  w.buf.resize(n);
  w.qx.resize(n);
  if (spec.uses_omega2()) {
    w.o2.resize(n);
    w.t.resize(n);
    w.tau.resize(n);
    w.nt.resize(n);
    w.st.resize(n);
    w.u.resize(n);
    w.eu.resize(n);
  }
  if (spec.reporting == ModelSpec::Reporting::observer) {
    w.delta.resize(n);
    w.logdelta.resize(n);
  }
}

std::vector<double> Posterior::init_state() const {
  std::vector<double> x(lay_.total, 0.0);
  const double lr1 = -std::log(priors_.alpha_rho_1) * priors_.rho0_1;
  const double ls1 = -std::log(priors_.alpha_sigma_1) / priors_.sigma0_1;
  x[lay_.hyper1] = std::log(lr1 / std::log(2.0));
  x[lay_.hyper1 + 1] = std::log(std::log(2.0) / ls1);
  if (lay_.hyper2 >= 0) {
    const double lr2 = -std::log(priors_.alpha_rho_2) * priors_.rho0_2;
    const double ls2 = -std::log(priors_.alpha_sigma_2) / priors_.sigma0_2;
    x[lay_.hyper2] = std::log(lr2 / std::log(2.0));
    x[lay_.hyper2 + 1] = std::log(std::log(2.0) / ls2);
  }
  return x;
}

const LatticeGmrf& Posterior::gmrf1(const std::vector<double>& x) const {
  g1_.set_params(std::exp(x[lay_.hyper1]), std::exp(x[lay_.hyper1 + 1]));
  return g1_;
}

const LatticeGmrf& Posterior::gmrf2(const std::vector<double>& x) const {
  if (lay_.hyper2 < 0) throw std::logic_error("model has no second field");
  g2_.set_params(std::exp(x[lay_.hyper2]), std::exp(x[lay_.hyper2 + 1]));
  return g2_;
}

double Posterior::value(const std::vector<double>& x) const {
  return eval(x, nullptr, nullptr);
}

double Posterior::value_grad(const std::vector<double>& x,
                             std::vector<double>& g) const {
  return eval(x, &g, nullptr);
}

TermBreakdown Posterior::terms(const std::vector<double>& x) const {
  TermBreakdown tb;
  eval(x, nullptr, &tb);
  return tb;
}

double Posterior::eval(const std::vector<double>& x, std::vector<double>* g,
                       TermBreakdown* tb) const {
  const Layout& L = lay_;
  if (static_cast<int>(x.size()) != L.total)
    throw std::invalid_argument("state length does not match model layout");
  auto& w = *work_;
  const std::size_t n = static_cast<std::size_t>(L.n_cells);
  const double A = domain_->grid.cell_area();
  TermBreakdown t;

  // Guard against hyperparameter overflow before exponentiating.
  for (int hoff : {L.hyper1, L.hyper2}) {
    if (hoff < 0) continue;
    if (std::abs(x[hoff]) > 40.0 || std::abs(x[hoff + 1]) > 40.0) {
      if (tb) {
        tb->prior = -std::numeric_limits<double>::infinity();
      }
      return -std::numeric_limits<double>::infinity();
    }
  }

  g1_.set_params(std::exp(x[L.hyper1]), std::exp(x[L.hyper1 + 1]));
  if (L.hyper2 >= 0)
    g2_.set_params(std::exp(x[L.hyper2]), std::exp(x[L.hyper2 + 1]));

  if (g) g->assign(L.total, 0.0);

  std::copy_n(x.data() + L.omega1, n, w.o1.data());
  if (L.omega2 >= 0) std::copy_n(x.data() + L.omega2, n, w.o2.data());

  // eta = X beta + omega1 (log intensity of the true process)
  std::copy(w.o1.begin(), w.o1.end(), w.eta.begin());
  for (int k = 0; k < L.n_beta; ++k)
    kernels::axpy(x[L.beta + k], Xcols_[k].data(), w.eta.data(), n);

  // ---- survey LGCP over cells in selected units --------------------------
  if (spec_.use_ps) {
    double ll = 0.0;
    for (int c : sel_cells_) {
      const double lam = kernels::detail::exp_core(w.eta[c]);
      ll += ps_counts_[c] * w.eta[c] - A * lam;
      if (g) {
        const double r = ps_counts_[c] - A * lam;
        for (int k = 0; k < L.n_beta; ++k) (*g)[L.beta + k] += r * Xcols_[k][c];
        (*g)[L.omega1 + c] += r;
      }
    }
    t.ps = ll;
  }

  // ---- unit-selection Bernoulli ------------------------------------------
  if (spec_.preferential) {
    kernels::vexpit(w.o1.data(), w.p1.data(), n);
    const double zeta = x[L.zeta];
    double ll = 0.0;
    for (int i = 0; i < domain_->n_units; ++i) {
      const auto& cells = unit_cells_[i];
      const double H = static_cast<double>(cells.size());
      double pbar = 0.0;
      for (int c : cells) pbar += w.p1[c];
      pbar /= H;
      const double ala = std::log(pbar) - std::log1p(-pbar);
      double l = zeta * ala;
      for (int k = 0; k < L.n_gamma; ++k) l += x[L.gamma + k] * Zsel_[i][k];
      const double y = selected_[i] ? 1.0 : 0.0;
      ll += y * l - kernels::detail::softplus_core(l);
      if (g) {
        const double e = y - kernels::detail::expit_core(l);
        for (int k = 0; k < L.n_gamma; ++k) (*g)[L.gamma + k] += e * Zsel_[i][k];
        (*g)[L.zeta] += e * ala;
        const double coef = zeta * e / (H * pbar * (1.0 - pbar));
        for (int c : cells)
          (*g)[L.omega1 + c] += coef * w.p1[c] * (1.0 - w.p1[c]);
      }
    }
    t.selection = ll;
  }

  // ---- citizen-science LGCP ----------------------------------------------
  if (spec_.use_cs) {
    std::copy(w.eta.begin(), w.eta.end(), w.lp.begin());
    if (L.beta0_cs >= 0) {
      const double b = x[L.beta0_cs];
      for (std::size_t c = 0; c < n; ++c) w.lp[c] += b;
    }
    if (spec_.cs_sampling) {
      // t = alpha' z + omega2; log tau = -softplus(-t)
      std::copy(w.o2.begin(), w.o2.end(), w.t.begin());
      for (int k = 0; k < L.n_alpha; ++k)
        kernels::axpy(x[L.alpha + k], Zcols_[k].data(), w.t.data(), n);
      for (std::size_t c = 0; c < n; ++c) w.nt[c] = -w.t[c];
      kernels::vsoftplus(w.nt.data(), w.st.data(), n);
      for (std::size_t c = 0; c < n; ++c) w.lp[c] -= w.st[c];
      if (g) kernels::vexpit(w.t.data(), w.tau.data(), n);
    }
    double logpsi[64];
    double psi[64];
    if (spec_.cs_detection) {
      for (int k = 0; k < L.n_nu; ++k) {
        const double v = x[L.nu] + (k > 0 ? x[L.nu + k] : 0.0);
        logpsi[k] = -kernels::detail::softplus_core(-v);
        psi[k] = kernels::detail::expit_core(v);
      }
      const auto& lu = domain_->land_use;
      for (std::size_t c = 0; c < n; ++c) w.lp[c] += logpsi[lu[c]];
    }
    if (spec_.reporting == ModelSpec::Reporting::simple) {
      const double ld = -kernels::detail::softplus_core(-x[L.theta]);
      for (std::size_t c = 0; c < n; ++c) w.lp[c] += ld;
    } else if (spec_.reporting == ModelSpec::Reporting::observer) {
      double kap[64];
      for (int j = 0; j < n_obs_; ++j)
        kap[j] = kernels::detail::expit_core(x[L.kappa + j]);
      for (std::size_t c = 0; c < n; ++c) {
        const double* row = obs_weights_.data() + c * n_obs_;
        double d = 0.0;
        for (int j = 0; j < n_obs_; ++j) d += row[j] * kap[j];
        w.delta[c] = d;
        w.logdelta[c] = std::log(d);
        w.lp[c] += w.logdelta[c];
      }
    }

    kernels::vexp(w.lp.data(), w.el.data(), n);
    t.cs = kernels::dot(cs_counts_.data(), w.lp.data(), n) -
           A * kernels::sum(w.el.data(), n);
    if (g) {
      for (std::size_t c = 0; c < n; ++c)
        w.r[c] = cs_counts_[c] - A * w.el[c];
      for (int k = 0; k < L.n_beta; ++k)
        (*g)[L.beta + k] += kernels::dot(Xcols_[k].data(), w.r.data(), n);
      if (L.beta0_cs >= 0) (*g)[L.beta0_cs] += kernels::sum(w.r.data(), n);
      kernels::axpy(1.0, w.r.data(), g->data() + L.omega1, n);
      if (spec_.cs_sampling) {
        for (std::size_t c = 0; c < n; ++c)
          w.buf[c] = w.r[c] * (1.0 - w.tau[c]);
        for (int k = 0; k < L.n_alpha; ++k)
          (*g)[L.alpha + k] += kernels::dot(Zcols_[k].data(), w.buf.data(), n);
        kernels::axpy(1.0, w.buf.data(), g->data() + L.omega2, n);
      }
      if (spec_.cs_detection) {
        double by_class[64] = {0.0};
        const auto& lu = domain_->land_use;
        for (std::size_t c = 0; c < n; ++c) by_class[lu[c]] += w.r[c];
        for (int k = 0; k < L.n_nu; ++k) {
          const double s = by_class[k] * (1.0 - psi[k]);
          (*g)[L.nu] += s;
          if (k > 0) (*g)[L.nu + k] += s;
        }
      }
      if (spec_.reporting == ModelSpec::Reporting::simple) {
        const double d = kernels::detail::expit_core(x[L.theta]);
        (*g)[L.theta] += (1.0 - d) * kernels::sum(w.r.data(), n);
      } else if (spec_.reporting == ModelSpec::Reporting::observer) {
        double kap[64];
        for (int j = 0; j < n_obs_; ++j)
          kap[j] = kernels::detail::expit_core(x[L.kappa + j]);
        for (std::size_t c = 0; c < n; ++c) {
          const double* row = obs_weights_.data() + c * n_obs_;
          const double rc = w.r[c] / w.delta[c];
          for (int j = 0; j < n_obs_; ++j)
            (*g)[L.kappa + j] += rc * row[j] * kap[j] * (1.0 - kap[j]);
        }
      }
    }
  }

  // ---- auxiliary all-activity LGCP ---------------------------------------
  if (spec_.include_aux_pattern) {
    std::copy(w.o2.begin(), w.o2.end(), w.u.begin());
    const double a0 =
        L.alpha0_aux >= 0 ? x[L.alpha0_aux] : x[L.alpha];
    for (std::size_t c = 0; c < n; ++c) w.u[c] += a0;
    for (int k = 1; k < L.n_alpha; ++k)
      kernels::axpy(x[L.alpha + k], Zcols_[k].data(), w.u.data(), n);
    kernels::vexp(w.u.data(), w.eu.data(), n);
    t.aux = kernels::dot(aux_counts_.data(), w.u.data(), n) -
            A * kernels::sum(w.eu.data(), n);
    if (g) {
      for (std::size_t c = 0; c < n; ++c)
        w.buf[c] = aux_counts_[c] - A * w.eu[c];
      const int a0_ix = L.alpha0_aux >= 0 ? L.alpha0_aux : L.alpha;
      (*g)[a0_ix] += kernels::sum(w.buf.data(), n);
      for (int k = 1; k < L.n_alpha; ++k)
        (*g)[L.alpha + k] += kernels::dot(Zcols_[k].data(), w.buf.data(), n);
      kernels::axpy(1.0, w.buf.data(), g->data() + L.omega2, n);
    }
  }

  // ---- field priors --------------------------------------------------------
  t.gmrf1 = g1_.logdens(w.o1);
  if (g) {
    g1_.apply_Q(w.o1, w.qx);
    for (std::size_t c = 0; c < n; ++c) (*g)[L.omega1 + c] -= w.qx[c];
  }
  if (L.omega2 >= 0) {
    t.gmrf2 = g2_.logdens(w.o2);
    if (g) {
      g2_.apply_Q(w.o2, w.qx);
      for (std::size_t c = 0; c < n; ++c) (*g)[L.omega2 + c] -= w.qx[c];
    }
  }

  // ---- parameter priors ----------------------------------------------------
  double pr = 0.0;
  auto flat_normal = [&](int ix) {
    pr += normal_lp(x[ix], 0.0, priors_.fixed_prec);
    if (g) (*g)[ix] -= priors_.fixed_prec * x[ix];
  };
  for (int k = 0; k < L.n_beta; ++k) flat_normal(L.beta + k);
  if (L.beta0_cs >= 0) flat_normal(L.beta0_cs);
  for (int k = 0; k < L.n_gamma; ++k) flat_normal(L.gamma + k);
  if (L.zeta >= 0) flat_normal(L.zeta);
  for (int k = 0; k < L.n_alpha; ++k) flat_normal(L.alpha + k);
  if (L.alpha0_aux >= 0) flat_normal(L.alpha0_aux);
  if (L.nu >= 0) {
    const double prec = 1.0 / (priors_.nu_sd * priors_.nu_sd);
    for (int k = 0; k < L.n_nu; ++k) {
      const double c0 = k < static_cast<int>(priors_.nu_center.size())
                            ? priors_.nu_center[k]
                            : 0.0;
      pr += normal_lp(x[L.nu + k], c0, prec);
      if (g) (*g)[L.nu + k] -= prec * (x[L.nu + k] - c0);
    }
  }
  if (L.theta >= 0) {
    const double prec = 1.0 / (priors_.theta_sd * priors_.theta_sd);
    pr += normal_lp(x[L.theta], 0.0, prec);
    if (g) (*g)[L.theta] -= prec * x[L.theta];
  }
  for (int k = 0; k < L.n_kappa; ++k) {
    const double prec = 1.0 / (priors_.kappa_logit_sd * priors_.kappa_logit_sd);
    pr += normal_lp(x[L.kappa + k], 0.0, prec);
    if (g) (*g)[L.kappa + k] -= prec * x[L.kappa + k];
  }
  // PC priors on (log rho, log sigma); the random-walk block owns these, so
  // no gradient entries.
  auto pc_pair = [&](int hoff, double rho0, double a_rho, double sigma0,
                     double a_sigma) {
    const double lr = -std::log(a_rho) * rho0;
    const double ls = -std::log(a_sigma) / sigma0;
    const double u = x[hoff], v = x[hoff + 1];
    pr += std::log(lr) - u - lr * std::exp(-u);
    pr += std::log(ls) + v - ls * std::exp(v);
  };
  pc_pair(L.hyper1, priors_.rho0_1, priors_.alpha_rho_1, priors_.sigma0_1,
          priors_.alpha_sigma_1);
  if (L.hyper2 >= 0)
    pc_pair(L.hyper2, priors_.rho0_2, priors_.alpha_rho_2, priors_.sigma0_2,
            priors_.alpha_sigma_2);
  t.prior = pr;

  if (tb) *tb = t;
  return t.total();
}

}  // namespace lgcpfuse
