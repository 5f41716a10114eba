#include "lgcpfuse/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "lgcpfuse/io.hpp"
#include "lgcpfuse/rng.hpp"

namespace lgcpfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Robbins-Monro step-size adaptation toward a target acceptance rate.
struct Adapter {
  double log_step = 0.0;
  double target = 0.234;
  bool enabled = true;

  void update(int t, double alpha) {
    if (!enabled) return;
    const double gain = 1.0 / std::pow(t + 10.0, 0.6);
    log_step = std::clamp(log_step + gain * (alpha - target), -10.0, 3.0);
  }
  double step() const { return std::exp(log_step); }
};

struct AcceptCounter {
  long acc = 0, tot = 0;
  double rate() const { return tot > 0 ? double(acc) / double(tot) : 0.0; }
};

struct ChainRun {
  bool ok = true;
  std::string error;
  int n_kept = 0;
  std::vector<double> draws;  // n_kept x n_raw, row-major
  std::vector<std::vector<double>> om1_draws, om2_draws;
  std::vector<int> rows;  // chain-local kept row per stored field draw
  std::vector<double> om1_sum, om1_sumsq, om2_sum, om2_sumsq;
  std::vector<std::pair<std::string, double>> accepts;
};

ChainRun run_chain(const Posterior& post, const FitConfig& cfg, int chain) {
  const Layout& L = post.layout();
  const int n = L.n_cells;
  const bool two_fields = L.omega2 >= 0;
  ChainRun out;
  out.om1_sum.assign(n, 0.0);
  out.om1_sumsq.assign(n, 0.0);
  if (two_fields) {
    out.om2_sum.assign(n, 0.0);
    out.om2_sumsq.assign(n, 0.0);
  }

  rng::Xoshiro256pp gen(rng::derive_seed(
      cfg.seed, {0xc7a1fULL, static_cast<std::uint64_t>(chain)}));

  std::vector<double> x = post.init_state();
  std::vector<double> xp(x.size()), grad, gradp;
  bool grad_valid = false;
  double curL = post.value_grad(x, grad);
  grad_valid = true;
  if (!std::isfinite(curL)) {
    out.ok = false;
    out.error = "non-finite posterior at initialization";
    return out;
  }

  auto ensure_grad = [&]() {
    if (!grad_valid) {
      curL = post.value_grad(x, grad);
      grad_valid = true;
    }
  };

  Adapter ad_om1{std::log(cfg.eps_omega), 0.574, cfg.adapt};
  Adapter ad_om2{std::log(cfg.eps_omega), 0.574, cfg.adapt};
  Adapter ad_fix{std::log(cfg.eps_fixed), 0.574, cfg.adapt};
  Adapter ad_h1{std::log(cfg.step_hyper), 0.234, cfg.adapt};
  Adapter ad_h2{std::log(cfg.step_hyper), 0.234, cfg.adapt};
  Adapter ad_r1{std::log(cfg.step_rescale), 0.44, cfg.adapt};
  Adapter ad_r2{std::log(cfg.step_rescale), 0.44, cfg.adapt};
  AcceptCounter c_om1, c_om2, c_fix, c_h1, c_h2, c_r1, c_r2;

  std::vector<double> o_cur(n), o_prop(n), d(n), sol(n), noise(n), mean(n),
      meanp(n), diff(n), qbuf(n), mean_f(L.n_fixed);

  // Langevin update of one latent-field block, preconditioned with its
  // prior precision.
  auto field_block = [&](int off, const LatticeGmrf& Q, Adapter& ad,
                         AcceptCounter& cnt, int iter) {
    ensure_grad();
    const double eps = ad.step();
    const double half = 0.5 * eps * eps;
    std::copy_n(x.data() + off, n, o_cur.data());
    Q.apply_Q(o_cur, qbuf);
    for (int c = 0; c < n; ++c) d[c] = grad[off + c] + qbuf[c];
    Q.solve_Q(d, sol);
    for (int c = 0; c < n; ++c)
      mean[c] = (1.0 - half) * o_cur[c] + half * sol[c];
    Q.sample(gen, noise);
    xp = x;
    for (int c = 0; c < n; ++c) xp[off + c] = mean[c] + eps * noise[c];
    const double L1 = post.value_grad(xp, gradp);
    double alpha = 0.0;
    bool take = false;
    if (std::isfinite(L1)) {
      std::copy_n(xp.data() + off, n, o_prop.data());
      Q.apply_Q(o_prop, qbuf);
      for (int c = 0; c < n; ++c) d[c] = gradp[off + c] + qbuf[c];
      Q.solve_Q(d, sol);
      for (int c = 0; c < n; ++c)
        meanp[c] = (1.0 - half) * o_prop[c] + half * sol[c];
      for (int c = 0; c < n; ++c) diff[c] = o_cur[c] - meanp[c];
      const double rev = Q.quad(diff);
      for (int c = 0; c < n; ++c) diff[c] = o_prop[c] - mean[c];
      const double fwd = Q.quad(diff);
      const double logA = L1 - curL + (fwd - rev) / (2.0 * eps * eps);
      alpha = std::min(1.0, std::exp(logA));
      take = gen.uniform() < alpha;
    }
    cnt.tot++;
    if (take) {
      x.swap(xp);
      grad.swap(gradp);
      curL = L1;
      cnt.acc++;
    }
    if (iter <= cfg.n_warmup) ad.update(iter, alpha);
  };

  auto fixed_block = [&](int iter) {
    if (L.n_fixed == 0) return;
    ensure_grad();
    const double eps = ad_fix.step();
    const double half = 0.5 * eps * eps;
    xp = x;
    for (int i = 0; i < L.n_fixed; ++i) {
      mean_f[i] = x[i] + half * grad[i];
      xp[i] = mean_f[i] + eps * gen.normal();
    }
    const double L1 = post.value_grad(xp, gradp);
    double alpha = 0.0;
    bool take = false;
    if (std::isfinite(L1)) {
      double fwd = 0.0, rev = 0.0;
      for (int i = 0; i < L.n_fixed; ++i) {
        const double df = xp[i] - mean_f[i];
        fwd += df * df;
        const double mp = xp[i] + half * gradp[i];
        const double dr = x[i] - mp;
        rev += dr * dr;
      }
      const double logA = L1 - curL + (fwd - rev) / (2.0 * eps * eps);
      alpha = std::min(1.0, std::exp(logA));
      take = gen.uniform() < alpha;
    }
    c_fix.tot++;
    if (take) {
      x.swap(xp);
      grad.swap(gradp);
      curL = L1;
      c_fix.acc++;
    }
    if (iter <= cfg.n_warmup) ad_fix.update(iter, alpha);
  };

  auto hyper_block = [&](int hoff, Adapter& ad, AcceptCounter& cnt, int iter) {
    const double s = ad.step();
    xp = x;
    xp[hoff] += s * gen.normal();
    xp[hoff + 1] += s * gen.normal();
    const double L1 = post.value(xp);
    double alpha = 0.0;
    bool take = false;
    if (std::isfinite(L1)) {
      alpha = std::min(1.0, std::exp(L1 - curL));
      take = gen.uniform() < alpha;
    }
    cnt.tot++;
    if (take) {
      x.swap(xp);
      curL = L1;
      grad_valid = false;
      cnt.acc++;
    }
    if (iter <= cfg.n_warmup) ad.update(iter, alpha);
  };

  // Joint move on (log sigma, field): sigma' = sigma e^r, omega' = e^r omega.
  // The Jacobian of the field map contributes n*r.
  auto rescale_block = [&](int hoff, int off, Adapter& ad, AcceptCounter& cnt,
                           int iter) {
    const double r = ad.step() * gen.normal();
    xp = x;
    xp[hoff + 1] += r;
    const double er = std::exp(r);
    for (int c = 0; c < n; ++c) xp[off + c] = x[off + c] * er;
    const double L1 = post.value(xp);
    double alpha = 0.0;
    bool take = false;
    if (std::isfinite(L1)) {
      alpha = std::min(1.0, std::exp(L1 - curL + n * r));
      take = gen.uniform() < alpha;
    }
    cnt.tot++;
    if (take) {
      x.swap(xp);
      curL = L1;
      grad_valid = false;
      cnt.acc++;
    }
    if (iter <= cfg.n_warmup) ad.update(iter, alpha);
  };

  const int n_raw = L.n_fixed + (two_fields ? 4 : 2);
  const int kept_total = (cfg.n_iter - cfg.n_warmup) / cfg.thin;
  out.draws.reserve(static_cast<std::size_t>(std::max(kept_total, 0)) * n_raw);

  for (int iter = 1; iter <= cfg.n_iter; ++iter) {
    field_block(L.omega1, post.gmrf1(x), ad_om1, c_om1, iter);
    if (two_fields) field_block(L.omega2, post.gmrf2(x), ad_om2, c_om2, iter);
    fixed_block(iter);
    hyper_block(L.hyper1, ad_h1, c_h1, iter);
    rescale_block(L.hyper1, L.omega1, ad_r1, c_r1, iter);
    if (two_fields) {
      hyper_block(L.hyper2, ad_h2, c_h2, iter);
      rescale_block(L.hyper2, L.omega2, ad_r2, c_r2, iter);
    }
    if (!std::isfinite(curL)) {
      out.ok = false;
      out.error = "posterior became non-finite during sampling";
      return out;
    }

    if (iter > cfg.n_warmup && (iter - cfg.n_warmup) % cfg.thin == 0) {
      for (int i = 0; i < L.n_fixed; ++i) out.draws.push_back(x[i]);
      out.draws.push_back(x[L.hyper1]);
      out.draws.push_back(x[L.hyper1 + 1]);
      if (two_fields) {
        out.draws.push_back(x[L.hyper2]);
        out.draws.push_back(x[L.hyper2 + 1]);
      }
      for (int c = 0; c < n; ++c) {
        const double v = x[L.omega1 + c];
        out.om1_sum[c] += v;
        out.om1_sumsq[c] += v * v;
      }
      if (two_fields) {
        for (int c = 0; c < n; ++c) {
          const double v = x[L.omega2 + c];
          out.om2_sum[c] += v;
          out.om2_sumsq[c] += v * v;
        }
      }
      if (cfg.store_fields && out.n_kept % cfg.field_thin == 0) {
        out.om1_draws.emplace_back(x.begin() + L.omega1,
                                   x.begin() + L.omega1 + n);
        if (two_fields)
          out.om2_draws.emplace_back(x.begin() + L.omega2,
                                     x.begin() + L.omega2 + n);
        out.rows.push_back(out.n_kept);
      }
      out.n_kept++;
    }
  }

  out.accepts = {{"omega1", c_om1.rate()},
                 {"fixed", c_fix.rate()},
                 {"hyper1", c_h1.rate()},
                 {"rescale1", c_r1.rate()}};
  if (two_fields) {
    out.accepts.insert(out.accepts.begin() + 1, {"omega2", c_om2.rate()});
    out.accepts.push_back({"hyper2", c_h2.rate()});
    out.accepts.push_back({"rescale2", c_r2.rate()});
  }
  return out;
}

}  // namespace

double effective_sample_size(const double* v, int n, int stride) {
  if (n < 4) return n;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += v[i * stride];
  mean /= n;
  auto autocov = [&](int lag) {
    double s = 0.0;
    for (int i = 0; i + lag < n; ++i)
      s += (v[i * stride] - mean) * (v[(i + lag) * stride] - mean);
    return s / n;
  };
  const double c0 = autocov(0);
  if (c0 <= 0.0) return n;  // constant chain
  double tau = 1.0;
  double prev = std::numeric_limits<double>::max();
  for (int m = 1; m + 1 < n; m += 2) {
    const double pair = (autocov(m) + autocov(m + 1)) / c0;
    if (pair <= 0.0) break;
    const double capped = std::min(pair, prev);  // enforce monotone decay
    tau += 2.0 * capped;
    prev = capped;
    if (m > n / 2) break;
  }
  return std::clamp(n / tau, 1.0, double(n));
}

double split_rhat_stat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::pair<double, double>> seq;  // (mean, var) per half-chain
  int len = std::numeric_limits<int>::max();
  for (const auto& c : chains)
    len = std::min(len, static_cast<int>(c.size()) / 2);
  if (len < 2 || chains.empty()) return std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : chains) {
    const int half = static_cast<int>(c.size()) / 2;
    for (int part = 0; part < 2; ++part) {
      const double* p = c.data() + (part == 0 ? 0 : c.size() - half);
      double m = 0.0;
      for (int i = 0; i < len; ++i) m += p[i];
      m /= len;
      double var = 0.0;
      for (int i = 0; i < len; ++i) var += (p[i] - m) * (p[i] - m);
      var /= (len - 1);
      seq.emplace_back(m, var);
    }
  }
  const int m_seq = static_cast<int>(seq.size());
  double grand = 0.0, W = 0.0;
  for (auto& s : seq) {
    grand += s.first;
    W += s.second;
  }
  grand /= m_seq;
  W /= m_seq;
  double var_means = 0.0;
  for (auto& s : seq) var_means += (s.first - grand) * (s.first - grand);
  var_means /= (m_seq - 1);
  if (W <= 0.0) return 1.0;
  const double varplus = (len - 1.0) / len * W + var_means;
  return std::sqrt(varplus / W);
}

int FitResult::index_of(const std::string& name) const {
  for (int i = 0; i < static_cast<int>(scalar_names.size()); ++i)
    if (scalar_names[i] == name) return i;
  return -1;
}

std::vector<double> FitResult::column(const std::string& name) const {
  const int ix = index_of(name);
  if (ix < 0) throw std::invalid_argument("unknown parameter: " + name);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_kept) * n_chains);
  for (const auto& ch : draws)
    for (int r = 0; r < n_kept; ++r) out.push_back(ch[r * n_scalar + ix]);
  return out;
}

double FitResult::posterior_mean(const std::string& name) const {
  const auto col = column(name);
  double s = 0.0;
  for (double v : col) s += v;
  return col.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : s / col.size();
}

double FitResult::split_rhat_of(const std::string& name) const {
  const int ix = index_of(name);
  if (ix < 0) throw std::invalid_argument("unknown parameter: " + name);
  return split_rhat[ix];
}

FitResult fit_model(const ModelSpec& spec, const Domain& domain,
                    const FitData& data, const PriorSpec& priors,
                    const FitConfig& config,
                    std::shared_ptr<const LatticeCore> core) {
  FitResult fit;
  fit.model_id = spec.id;
  fit.config = config;
  if (config.n_iter <= config.n_warmup) {
    fit.error = "n_iter must exceed n_warmup";
    return fit;
  }

  Posterior post(spec, domain, data, priors, core);
  const Layout& L = post.layout();
  const int n = L.n_cells;
  const bool two_fields = L.omega2 >= 0;
  const int n_raw = L.n_fixed + (two_fields ? 4 : 2);

  std::vector<ChainRun> runs;
  for (int c = 0; c < config.n_chains; ++c) {
    runs.push_back(run_chain(post, config, c));
    if (!runs.back().ok) {
      fit.error = "chain " + std::to_string(c) + ": " + runs.back().error;
      return fit;
    }
  }

  // Scalar names: raw draws plus derived natural-scale hyperparameters.
  fit.scalar_names = L.names;
  std::vector<int> log_cols;
  fit.scalar_names.push_back("rho1");
  fit.scalar_names.push_back("sigma1");
  log_cols.push_back(L.n_fixed);      // log_rho1
  log_cols.push_back(L.n_fixed + 1);  // log_sigma1
  if (two_fields) {
    fit.scalar_names.push_back("rho2");
    fit.scalar_names.push_back("sigma2");
    log_cols.push_back(L.n_fixed + 2);
    log_cols.push_back(L.n_fixed + 3);
  }
  fit.n_scalar = n_raw + static_cast<int>(log_cols.size());
  fit.n_chains = config.n_chains;
  fit.n_kept = runs.empty() ? 0 : runs[0].n_kept;

  for (auto& run : runs) {
    std::vector<double> mat(static_cast<std::size_t>(run.n_kept) *
                            fit.n_scalar);
    for (int r = 0; r < run.n_kept; ++r) {
      const double* src = run.draws.data() + static_cast<std::size_t>(r) * n_raw;
      double* dst = mat.data() + static_cast<std::size_t>(r) * fit.n_scalar;
      std::copy_n(src, n_raw, dst);
      for (std::size_t k = 0; k < log_cols.size(); ++k)
        dst[n_raw + k] = std::exp(src[log_cols[k]]);
    }
    fit.draws.push_back(std::move(mat));
  }

  // Pooled field summaries and thinned field draws.
  const double total = static_cast<double>(fit.n_kept) * fit.n_chains;
  fit.omega1_mean.assign(n, 0.0);
  fit.omega1_sd.assign(n, 0.0);
  if (two_fields) {
    fit.omega2_mean.assign(n, 0.0);
    fit.omega2_sd.assign(n, 0.0);
  }
  for (int c = 0; c < n; ++c) {
    double s = 0.0, ss = 0.0, s2 = 0.0, ss2 = 0.0;
    for (const auto& run : runs) {
      s += run.om1_sum[c];
      ss += run.om1_sumsq[c];
      if (two_fields) {
        s2 += run.om2_sum[c];
        ss2 += run.om2_sumsq[c];
      }
    }
    fit.omega1_mean[c] = s / total;
    fit.omega1_sd[c] = total > 1
        ? std::sqrt(std::max(0.0, (ss - s * s / total) / (total - 1)))
        : 0.0;
    if (two_fields) {
      fit.omega2_mean[c] = s2 / total;
      fit.omega2_sd[c] = total > 1
          ? std::sqrt(std::max(0.0, (ss2 - s2 * s2 / total) / (total - 1)))
          : 0.0;
    }
  }
  for (int c = 0; c < config.n_chains; ++c) {
    auto& run = runs[c];
    for (std::size_t k = 0; k < run.om1_draws.size(); ++k) {
      fit.omega1_draws.push_back(std::move(run.om1_draws[k]));
      if (two_fields) fit.omega2_draws.push_back(std::move(run.om2_draws[k]));
      fit.field_draw_row.push_back(c * fit.n_kept + run.rows[k]);
    }
  }

  for (int c = 0; c < config.n_chains; ++c)
    for (auto& [name, rate] : runs[c].accepts)
      fit.accepts.push_back({name, c, rate});

  fit.ess.resize(fit.n_scalar);
  fit.split_rhat.resize(fit.n_scalar);
  for (int ix = 0; ix < fit.n_scalar; ++ix) {
    double ess_total = 0.0;
    std::vector<std::vector<double>> cols;
    for (const auto& ch : fit.draws) {
      ess_total += effective_sample_size(ch.data() + ix, fit.n_kept,
                                         fit.n_scalar);
      std::vector<double> col(fit.n_kept);
      for (int r = 0; r < fit.n_kept; ++r) col[r] = ch[r * fit.n_scalar + ix];
      cols.push_back(std::move(col));
    }
    fit.ess[ix] = ess_total;
    fit.split_rhat[ix] = split_rhat_stat(cols);
  }

  fit.ok = true;
  return fit;
}

// --------------------------------------------------------------------------
// serialization

namespace {

nlohmann::json config_json(const FitConfig& c) {
  return {{"n_chains", c.n_chains},     {"n_iter", c.n_iter},
          {"n_warmup", c.n_warmup},     {"thin", c.thin},
          {"field_thin", c.field_thin}, {"seed", c.seed},
          {"eps_omega", c.eps_omega},   {"eps_fixed", c.eps_fixed},
          {"step_hyper", c.step_hyper}, {"step_rescale", c.step_rescale},
          {"adapt", c.adapt},           {"store_fields", c.store_fields}};
}

FitConfig config_from_json(const nlohmann::json& j) {
  FitConfig c;
  c.n_chains = j.at("n_chains").get<int>();
  c.n_iter = j.at("n_iter").get<int>();
  c.n_warmup = j.at("n_warmup").get<int>();
  c.thin = j.at("thin").get<int>();
  c.field_thin = j.at("field_thin").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.eps_omega = j.at("eps_omega").get<double>();
  c.eps_fixed = j.at("eps_fixed").get<double>();
  c.step_hyper = j.at("step_hyper").get<double>();
  c.step_rescale = j.at("step_rescale").get<double>();
  c.adapt = j.at("adapt").get<bool>();
  c.store_fields = j.at("store_fields").get<bool>();
  return c;
}

std::vector<std::string> split_line(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void write_field_csv(const std::string& path,
                     const std::vector<std::vector<double>>& draws,
                     const std::vector<int>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "row";
  if (!draws.empty())
    for (std::size_t c = 0; c < draws[0].size(); ++c) f << ",c" << c;
  f << '\n';
  for (std::size_t k = 0; k < draws.size(); ++k) {
    f << rows[k];
    for (double v : draws[k]) f << ',' << io::fmt_g17(v);
    f << '\n';
  }
}

void read_field_csv(const std::string& path,
                    std::vector<std::vector<double>>& draws,
                    std::vector<int>& rows) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(f, line);  // header
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto parts = split_line(line);
    rows.push_back(std::stoi(parts[0]));
    std::vector<double> v(parts.size() - 1);
    for (std::size_t i = 1; i < parts.size(); ++i) v[i - 1] = std::stod(parts[i]);
    draws.push_back(std::move(v));
  }
}

}  // namespace

void save_fit(const std::string& dir, const FitResult& fit) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  for (int c = 0; c < fit.n_chains; ++c) {
    std::ofstream f(dir + "/chain_" + std::to_string(c) + ".csv");
    if (!f) throw std::runtime_error("cannot write chain CSV in " + dir);
    for (int i = 0; i < fit.n_scalar; ++i)
      f << (i ? "," : "") << fit.scalar_names[i];
    f << '\n';
    const auto& ch = fit.draws[c];
    for (int r = 0; r < fit.n_kept; ++r) {
      for (int i = 0; i < fit.n_scalar; ++i)
        f << (i ? "," : "") << io::fmt_g17(ch[r * fit.n_scalar + i]);
      f << '\n';
    }
  }

  if (!fit.omega1_draws.empty())
    write_field_csv(dir + "/omega1_draws.csv", fit.omega1_draws,
                    fit.field_draw_row);
  if (!fit.omega2_draws.empty())
    write_field_csv(dir + "/omega2_draws.csv", fit.omega2_draws,
                    fit.field_draw_row);
  {
    std::ofstream f(dir + "/omega_summary.csv");
    const bool two = !fit.omega2_mean.empty();
    f << "omega1_mean,omega1_sd";
    if (two) f << ",omega2_mean,omega2_sd";
    f << '\n';
    for (std::size_t c = 0; c < fit.omega1_mean.size(); ++c) {
      f << io::fmt_g17(fit.omega1_mean[c]) << ','
        << io::fmt_g17(fit.omega1_sd[c]);
      if (two)
        f << ',' << io::fmt_g17(fit.omega2_mean[c]) << ','
          << io::fmt_g17(fit.omega2_sd[c]);
      f << '\n';
    }
  }

  nlohmann::json diag;
  diag["ok"] = fit.ok;
  diag["error"] = fit.error;
  diag["model_id"] = fit.model_id;
  diag["scalar_names"] = fit.scalar_names;
  diag["n_scalar"] = fit.n_scalar;
  diag["n_kept"] = fit.n_kept;
  diag["n_chains"] = fit.n_chains;
  diag["ess"] = fit.ess;
  diag["split_rhat"] = fit.split_rhat;
  diag["accepts"] = nlohmann::json::array();
  for (const auto& a : fit.accepts)
    diag["accepts"].push_back(
        {{"block", a.block}, {"chain", a.chain}, {"rate", a.rate}});
  diag["config"] = config_json(fit.config);
  {
    std::ofstream f(dir + "/diagnostics.json");
    f << diag.dump(2) << '\n';
  }
  {
    std::ofstream f(dir + "/config.txt");
    f << "model " << fit.model_id << "\n"
      << "chains " << fit.config.n_chains << "\n"
      << "iterations " << fit.config.n_iter << "\n"
      << "warmup " << fit.config.n_warmup << "\n"
      << "thin " << fit.config.thin << "\n"
      << "field_thin " << fit.config.field_thin << "\n"
      << "seed " << fit.config.seed << "\n"
      << "adapt " << (fit.config.adapt ? "yes" : "no") << "\n";
  }
}

FitResult load_fit(const std::string& dir) {
  FitResult fit;
  std::ifstream df(dir + "/diagnostics.json");
  if (!df) throw std::runtime_error("missing diagnostics.json in " + dir);
  nlohmann::json diag;
  df >> diag;
  fit.ok = diag.at("ok").get<bool>();
  fit.error = diag.at("error").get<std::string>();
  fit.model_id = diag.at("model_id").get<int>();
  fit.scalar_names = diag.at("scalar_names").get<std::vector<std::string>>();
  fit.n_scalar = diag.at("n_scalar").get<int>();
  fit.n_kept = diag.at("n_kept").get<int>();
  fit.n_chains = diag.at("n_chains").get<int>();
  fit.ess = diag.at("ess").get<std::vector<double>>();
  fit.split_rhat = diag.at("split_rhat").get<std::vector<double>>();
  for (const auto& a : diag.at("accepts"))
    fit.accepts.push_back({a.at("block").get<std::string>(),
                           a.at("chain").get<int>(),
                           a.at("rate").get<double>()});
  fit.config = config_from_json(diag.at("config"));

  for (int c = 0; c < fit.n_chains; ++c) {
    std::ifstream f(dir + "/chain_" + std::to_string(c) + ".csv");
    if (!f) throw std::runtime_error("missing chain CSV in " + dir);
    std::string line;
    std::getline(f, line);  // header
    std::vector<double> mat;
    mat.reserve(static_cast<std::size_t>(fit.n_kept) * fit.n_scalar);
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      for (const auto& tok : split_line(line)) mat.push_back(std::stod(tok));
    }
    fit.draws.push_back(std::move(mat));
  }

  namespace fs = std::filesystem;
  if (fs::exists(dir + "/omega1_draws.csv"))
    read_field_csv(dir + "/omega1_draws.csv", fit.omega1_draws,
                   fit.field_draw_row);
  if (fs::exists(dir + "/omega2_draws.csv")) {
    std::vector<int> rows2;
    read_field_csv(dir + "/omega2_draws.csv", fit.omega2_draws, rows2);
  }
  {
    std::ifstream f(dir + "/omega_summary.csv");
    if (f) {
      std::string line;
      std::getline(f, line);
      const bool two = split_line(line).size() == 4;
      while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto parts = split_line(line);
        fit.omega1_mean.push_back(std::stod(parts[0]));
        fit.omega1_sd.push_back(std::stod(parts[1]));
        if (two) {
          fit.omega2_mean.push_back(std::stod(parts[2]));
          fit.omega2_sd.push_back(std::stod(parts[3]));
        }
      }
    }
  }
  return fit;
}

}  // namespace lgcpfuse
