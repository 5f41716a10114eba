#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "lgcpfuse/sampler.hpp"

using namespace lgcpfuse;
using testutil::make_test_data;
using testutil::make_test_domain;

namespace {

// Single active cell, one unit, one observer: the smallest legal domain.
Domain one_cell_domain() {
  Domain dom;
  dom.grid = Grid::regular(1, 1, 1.0);
  dom.unit_of = {0};
  dom.n_units = 1;
  dom.covariates["CLOUDCOVER"] = {0.0};
  dom.covariates["ELEVGRADIENT"] = {0.0};
  dom.covariates["DISTANCE"] = {0.0};
  dom.land_use = {0};
  dom.n_land_use = 1;
  dom.observers.push_back({0, 0.5, 0.5, 0});
  return dom;
}

// Quadrature marginal CDF of beta0 for the intercept-only one-cell model:
//   N ~ Poisson(exp(beta0 + omega)), omega | sigma ~ N(0, sigma^2),
//   beta0 ~ N(0, 1/fixed_prec), log sigma ~ PC(lambda_sigma);
// the range parameter does not enter on a single cell. Returns a grid of
// beta0 values and the CDF evaluated there.
void quad_beta0_cdf(double counts, const PriorSpec& priors,
                    std::vector<double>& bgrid, std::vector<double>& cdf) {
  const double ls = -std::log(priors.alpha_sigma_1) / priors.sigma0_1;
  const int nb = 321, no = 321, nv = 161;
  const double b_lo = -4.0, b_hi = 7.0;
  const double o_lo = -6.0, o_hi = 6.0;
  const double v_lo = -6.0, v_hi = 2.5;
  const double db = (b_hi - b_lo) / (nb - 1);
  const double dv = (v_hi - v_lo) / (nv - 1);
  const double dw = (o_hi - o_lo) / (no - 1);
  bgrid.resize(nb);
  std::vector<double> post(nb, 0.0);
  for (int ib = 0; ib < nb; ++ib) bgrid[ib] = b_lo + ib * db;
  for (int iv = 0; iv < nv; ++iv) {
    const double v = v_lo + iv * dv;
    const double sig = std::exp(v);
    const double lp_v = v - ls * sig;  // PC prior on log sigma (up to const)
    for (int io = 0; io < no; ++io) {
      const double w = o_lo + io * dw;
      const double lp_o = -0.5 * w * w / (sig * sig) - v;  // N(0, sig^2)
      for (int ib = 0; ib < nb; ++ib) {
        const double b = bgrid[ib];
        const double s = b + w;
        const double ll = counts * s - std::exp(s);
        const double lp_b = -0.5 * b * b * priors.fixed_prec;
        post[ib] += std::exp(ll + lp_b + lp_o + lp_v);
      }
    }
  }
  cdf.resize(nb);
  double acc = 0.0;
  for (int ib = 0; ib < nb; ++ib) {
    acc += post[ib];
    cdf[ib] = acc;
  }
  for (auto& c : cdf) c /= acc;
}

double ks_against_cdf(std::vector<double> draws,
                      const std::vector<double>& bgrid,
                      const std::vector<double>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto it = std::lower_bound(bgrid.begin(), bgrid.end(), draws[i]);
    double F;
    if (it == bgrid.begin())
      F = 0.0;
    else if (it == bgrid.end())
      F = 1.0;
    else {
      const std::size_t k = it - bgrid.begin();
      const double t = (draws[i] - bgrid[k - 1]) / (bgrid[k] - bgrid[k - 1]);
      F = cdf[k - 1] + t * (cdf[k] - cdf[k - 1]);
    }
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    ks = std::max({ks, std::abs(F - lo), std::abs(F - hi)});
  }
  return ks;
}

FitResult fit_one_cell(double counts, int n_keep, std::uint64_t seed) {
  const Domain dom = one_cell_domain();
  auto core = std::make_shared<const LatticeCore>(dom.grid);
  ModelSpec spec;
  spec.id = 1;
  spec.use_ps = true;
  spec.x_covariates = {};  // intercept only
  FitData data;
  data.ps_counts = {counts};
  data.selected = {1};
  const PriorSpec priors = PriorSpec::defaults(dom.grid);
  FitConfig cfg;
  cfg.n_chains = 1;
  cfg.n_warmup = 2000;
  cfg.n_iter = 2000 + n_keep;
  cfg.seed = seed;
  cfg.store_fields = false;
  return fit_model(spec, dom, data, priors, cfg, core);
}

}  // namespace

TEST_CASE("one-cell intercept posterior matches dense quadrature") {
  const double counts = 7.0;
  const FitResult fit = fit_one_cell(counts, 4000, 42);
  REQUIRE(fit.ok);
  const PriorSpec priors = PriorSpec::defaults(one_cell_domain().grid);
  std::vector<double> bgrid, cdf;
  quad_beta0_cdf(counts, priors, bgrid, cdf);
  const double ks = ks_against_cdf(fit.column("beta0"), bgrid, cdf);
  MESSAGE("KS distance: ", ks);
  CHECK(ks < 0.08);
}

TEST_CASE("empty likelihood recovers the prior") {
  // No unit selected: the survey likelihood vanishes and the fixed effects
  // keep their N(0, 1/0.01) prior.
  Domain dom = make_test_domain(6, 6, 1.0, 3, 1);
  auto core = std::make_shared<const LatticeCore>(dom.grid);
  ModelSpec spec = ModelSpec::preset(1);
  FitData data;
  data.selected.assign(3, 0);
  data.ps_counts.assign(dom.grid.n_active(), 0.0);
  const PriorSpec priors = PriorSpec::defaults(dom.grid);
  FitConfig cfg;
  cfg.n_chains = 2;
  cfg.n_iter = 14000;
  cfg.n_warmup = 3000;
  cfg.seed = 9;
  cfg.store_fields = false;
  const FitResult fit = fit_model(spec, dom, data, priors, cfg, core);
  REQUIRE(fit.ok);
  const auto b0 = fit.column("beta0");
  const auto b1 = fit.column("beta1");
  double m0 = 0.0, m1 = 0.0, v0 = 0.0, v1 = 0.0;
  for (std::size_t i = 0; i < b0.size(); ++i) {
    m0 += b0[i];
    m1 += b1[i];
  }
  m0 /= b0.size();
  m1 /= b1.size();
  for (std::size_t i = 0; i < b0.size(); ++i) {
    v0 += (b0[i] - m0) * (b0[i] - m0);
    v1 += (b1[i] - m1) * (b1[i] - m1);
  }
  v0 /= b0.size();
  v1 /= b1.size();
  // Prior sd is 10; the walk is slow on that scale, so bounds are loose but
  // would catch a wrong prior precision (sd 1 or 100) immediately.
  CHECK(std::abs(m0) < 2.5);
  CHECK(std::abs(m1) < 2.5);
  CHECK(std::sqrt(v0) == doctest::Approx(10.0).epsilon(0.25));
  CHECK(std::sqrt(v1) == doctest::Approx(10.0).epsilon(0.25));
}

TEST_CASE("chains are bit-reproducible for a fixed seed") {
  const Domain dom = make_test_domain();
  auto core = std::make_shared<const LatticeCore>(dom.grid);
  const FitData data = make_test_data(dom, 3);
  const PriorSpec priors = PriorSpec::defaults(dom.grid);
  FitConfig cfg;
  cfg.n_chains = 2;
  cfg.n_iter = 400;
  cfg.n_warmup = 200;
  cfg.seed = 77;
  const ModelSpec spec = ModelSpec::preset(6);
  const FitResult a = fit_model(spec, dom, data, priors, cfg, core);
  const FitResult b = fit_model(spec, dom, data, priors, cfg, core);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t c = 0; c < a.draws.size(); ++c) CHECK(a.draws[c] == b.draws[c]);
  CHECK(a.omega1_draws == b.omega1_draws);
  CHECK(a.omega1_mean == b.omega1_mean);

  // A different seed must give different draws.
  cfg.seed = 78;
  const FitResult c = fit_model(spec, dom, data, priors, cfg, core);
  CHECK(a.draws[0] != c.draws[0]);
}

TEST_CASE("field draws pair with their scalar rows") {
  const Domain dom = make_test_domain();
  auto core = std::make_shared<const LatticeCore>(dom.grid);
  const FitData data = make_test_data(dom, 3);
  const PriorSpec priors = PriorSpec::defaults(dom.grid);
  FitConfig cfg;
  cfg.n_chains = 2;
  cfg.n_iter = 300;
  cfg.n_warmup = 100;
  cfg.field_thin = 8;
  cfg.seed = 5;
  const FitResult fit = fit_model(ModelSpec::preset(4), dom, data, priors,
                                  cfg, core);
  REQUIRE(fit.ok);
  CHECK(fit.n_kept == 200);
  // ceil(200 / 8) snapshots per chain.
  CHECK(fit.omega1_draws.size() == 2 * 25);
  CHECK(fit.omega2_draws.size() == fit.omega1_draws.size());
  REQUIRE(fit.field_draw_row.size() == fit.omega1_draws.size());
  for (std::size_t k = 0; k < fit.field_draw_row.size(); ++k) {
    const int row = fit.field_draw_row[k];
    CHECK(row >= 0);
    CHECK(row < fit.n_kept * fit.n_chains);
  }
  // Rows are strictly increasing within each chain's half.
  for (std::size_t k = 1; k < fit.field_draw_row.size(); ++k)
    if (fit.field_draw_row[k] > fit.field_draw_row[k - 1])
      CHECK(fit.field_draw_row[k] - fit.field_draw_row[k - 1] == 8);
}

TEST_CASE("diagnostics: ess and split-rhat behave on known sequences") {
  rng::Xoshiro256pp r(123);
  const int n = 4000;
  std::vector<double> iid(n);
  for (auto& v : iid) v = r.normal();
  const double ess_iid = effective_sample_size(iid.data(), n);
  CHECK(ess_iid > 0.7 * n);
  CHECK(ess_iid <= 1.3 * n);

  // AR(1) with phi = 0.9 has ESS ~ n * (1-phi)/(1+phi) ~ n/19.
  std::vector<double> ar(n);
  double prev = 0.0;
  for (auto& v : ar) {
    prev = 0.9 * prev + std::sqrt(1.0 - 0.81) * r.normal();
    v = prev;
  }
  const double ess_ar = effective_sample_size(ar.data(), n);
  CHECK(ess_ar < 0.25 * n);
  CHECK(ess_ar > 0.01 * n);

  // Identical-distribution chains: rhat ~ 1; separated chains: rhat >> 1.
  std::vector<double> c1(n), c2(n);
  for (auto& v : c1) v = r.normal();
  for (auto& v : c2) v = r.normal();
  CHECK(split_rhat_stat({c1, c2}) == doctest::Approx(1.0).epsilon(0.02));
  for (auto& v : c2) v += 6.0;
  CHECK(split_rhat_stat({c1, c2}) > 2.0);
}

TEST_CASE("fit save/load round-trips") {
  const Domain dom = make_test_domain();
  auto core = std::make_shared<const LatticeCore>(dom.grid);
  const FitData data = make_test_data(dom, 3);
  const PriorSpec priors = PriorSpec::defaults(dom.grid);
  FitConfig cfg;
  cfg.n_chains = 2;
  cfg.n_iter = 250;
  cfg.n_warmup = 150;
  cfg.seed = 21;
  const FitResult fit = fit_model(ModelSpec::preset(5), dom, data, priors,
                                  cfg, core);
  REQUIRE(fit.ok);
  const auto dir =
      (std::filesystem::temp_directory_path() / "lgcpfuse_tests" / "fit_rt")
          .string();
  std::filesystem::remove_all(dir);
  save_fit(dir, fit);
  const FitResult f2 = load_fit(dir);
  CHECK(f2.ok);
  CHECK(f2.model_id == fit.model_id);
  CHECK(f2.scalar_names == fit.scalar_names);
  CHECK(f2.n_kept == fit.n_kept);
  CHECK(f2.n_chains == fit.n_chains);
  REQUIRE(f2.draws.size() == fit.draws.size());
  for (std::size_t c = 0; c < fit.draws.size(); ++c)
    CHECK(f2.draws[c] == fit.draws[c]);  // %.17g exact round-trip
  CHECK(f2.omega1_draws == fit.omega1_draws);
  CHECK(f2.field_draw_row == fit.field_draw_row);
  CHECK(f2.omega1_mean == fit.omega1_mean);
  CHECK(f2.ess == fit.ess);
  CHECK(f2.split_rhat == fit.split_rhat);
}

TEST_CASE("invalid configurations fail cleanly") {
  const Domain dom = make_test_domain();
  auto core = std::make_shared<const LatticeCore>(dom.grid);
  const FitData data = make_test_data(dom, 3);
  const PriorSpec priors = PriorSpec::defaults(dom.grid);
  FitConfig cfg;
  cfg.n_iter = 100;
  cfg.n_warmup = 100;  // no kept draws possible
  const FitResult fit = fit_model(ModelSpec::preset(1), dom, data, priors,
                                  cfg, core);
  CHECK_FALSE(fit.ok);
  CHECK_FALSE(fit.error.empty());
}
