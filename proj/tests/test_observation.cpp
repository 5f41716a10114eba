#include <doctest.h>

#include <cmath>
#include <vector>

#include "lgcpfuse/field.hpp"
#include "lgcpfuse/observation.hpp"
#include "lgcpfuse/pointprocess.hpp"
#include "lgcpfuse/scenario.hpp"

using namespace lgcpfuse;

namespace {
double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

TEST_CASE("cs retention: pinned values for both links") {
  const std::vector<double> dist{0.0, 1.0};
  const std::vector<double> omega2{0.0, 0.0};

  // Simulation link at a0=-4, dist=0: 1 - exp(-e^{-4}) = 0.018149...
  const auto sim = cs_retention_sim(-4.0, -2.0, dist, omega2);
  CHECK(sim[0] == doctest::Approx(-std::expm1(-std::exp(-4.0))).epsilon(1e-14));
  CHECK(sim[0] == doctest::Approx(0.018148926938333518).epsilon(1e-12));
  CHECK(sim[1] == doctest::Approx(-std::expm1(-std::exp(-6.0))).epsilon(1e-14));

  // Logistic link pinned expit values.
  const auto lg = cs_retention_logit(1.0, -2.0, dist, omega2);
  CHECK(lg[0] == doctest::Approx(0.7310585786300049).epsilon(1e-14));   // expit(1)
  CHECK(lg[1] == doctest::Approx(0.2689414213699951).epsilon(1e-14));   // expit(-1)

  // Both links are monotone decreasing in distance for negative slope.
  const std::vector<double> dd{0.0, 0.5, 1.0, 2.0, 4.0};
  const std::vector<double> zz(dd.size(), 0.0);
  const auto s2 = cs_retention_sim(-1.0, -2.0, dd, zz);
  const auto l2 = cs_retention_logit(-1.0, -2.0, dd, zz);
  for (std::size_t i = 1; i < dd.size(); ++i) {
    CHECK(s2[i] < s2[i - 1]);
    CHECK(l2[i] < l2[i - 1]);
  }
  // omega2 shifts retention upward.
  const std::vector<double> up(dd.size(), 1.0);
  const auto s3 = cs_retention_sim(-1.0, -2.0, dd, up);
  for (std::size_t i = 0; i < dd.size(); ++i) CHECK(s3[i] > s2[i]);
}

TEST_CASE("detection probability by land-use class") {
  const std::vector<std::int32_t> landuse{0, 1, 2, 5};
  const std::vector<double> nu{1.0, -2.0, 1.2, 1.4, 1.8, -3.0};
  const auto psi = detection_prob(landuse, nu);
  CHECK(psi[0] == doctest::Approx(expit(1.0)).epsilon(1e-14));        // baseline
  CHECK(psi[1] == doctest::Approx(expit(1.0 - 2.0)).epsilon(1e-14));
  CHECK(psi[2] == doctest::Approx(expit(1.0 + 1.2)).epsilon(1e-14));
  CHECK(psi[3] == doctest::Approx(expit(1.0 - 3.0)).epsilon(1e-14));
  CHECK(psi[1] == doctest::Approx(0.2689414213699951).epsilon(1e-12));
}

TEST_CASE("observer weights are a normalized mixture") {
  Grid g = Grid::regular(4, 4, 1.0);
  std::vector<Observer> obs{{0, 0.5, 0.5, 0}, {1, 3.5, 3.5, 2}, {2, 2.0, 2.0, 4}};
  const std::vector<double> zeta{0.0, 0.5, 1.0, 1.5, 2.0};
  const auto W = observer_weights(g, obs, 10.0, -0.3, zeta);
  REQUIRE(W.size() == static_cast<std::size_t>(g.n_active() * 3));
  for (int c = 0; c < g.n_active(); ++c) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      CHECK(W[c * 3 + j] > 0.0);
      s += W[c * 3 + j];
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  // The cell at an observer's location favours that observer over an
  // equally active distant one.
  const int c0 = g.active_at(0.5, 0.5);
  std::vector<Observer> pair{{0, 0.5, 0.5, 1}, {1, 3.5, 3.5, 1}};
  const auto W2 = observer_weights(g, pair, 2.0, -0.9, zeta);
  CHECK(W2[c0 * 2 + 0] > W2[c0 * 2 + 1]);
}

TEST_CASE("reporting fields: simple and observer-mixture") {
  const auto d0 = reporting_simple(0.0, 3);
  CHECK(d0 == std::vector<double>{0.5, 0.5, 0.5});
  const auto dh = reporting_simple(30.0, 2);
  CHECK(dh[0] == doctest::Approx(1.0).epsilon(1e-10));

  // Two cells, two observers with weights (1,0) and (0.25,0.75).
  const std::vector<double> W{1.0, 0.0, 0.25, 0.75};
  const std::vector<double> kappa{0.2, 0.6};
  const auto del = reporting_observer(W, kappa, 2);
  CHECK(del[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(del[1] == doctest::Approx(0.25 * 0.2 + 0.75 * 0.6).epsilon(1e-14));
  // Mixture stays inside the kappa hull.
  CHECK(del[1] > 0.2);
  CHECK(del[1] < 0.6);
}

TEST_CASE("willingness draws match the two Beta regimes") {
  rng::Xoshiro256pp r(2024);
  const int J = 10, reps = 3000;
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < reps; ++k) {
    const auto kl = draw_willingness(false, J, r);
    const auto kh = draw_willingness(true, J, r);
    REQUIRE(kl.size() == J);
    for (double v : kl) {
      REQUIRE(v > 0.0);
      REQUIRE(v < 1.0);
      lo += v;
    }
    for (double v : kh) hi += v;
  }
  CHECK(lo / (reps * J) == doctest::Approx(2.0 / 7.0).epsilon(0.01));
  CHECK(hi / (reps * J) == doctest::Approx(10.0 / 13.0).epsilon(0.01));
}

TEST_CASE("random survey selection hits its inclusion probability") {
  const Domain dom = build_synthetic_domain();
  SurveySelectionParams params;  // random, p = 0.3
  std::vector<double> omega1(dom.grid.n_active(), 0.0);
  rng::Xoshiro256pp r(8);
  double picked = 0.0, total = 0.0;
  const int reps = 3000;
  for (int k = 0; k < reps; ++k) {
    const auto sel = select_survey_units(dom, params, omega1, r);
    REQUIRE(static_cast<int>(sel.selected.size()) == dom.n_units);
    for (std::size_t u = 0; u < sel.selected.size(); ++u) {
      CHECK(sel.prob[u] == doctest::Approx(0.3));
      picked += sel.selected[u];
      total += 1.0;
    }
  }
  CHECK(picked / total == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("preferential selection favours high-score units") {
  const Domain dom = build_synthetic_domain();
  SurveySelectionParams params;
  params.preferential = true;  // logit p = -2.5 -1.5 EGbar + 3.5 CCbar
  std::vector<double> omega1(dom.grid.n_active(), 0.0);
  rng::Xoshiro256pp r(9);
  const auto sel = select_survey_units(dom, params, omega1, r);

  const auto eg = unit_means(dom, dom.covariate("ELEVGRADIENT"));
  const auto cc = unit_means(dom, dom.covariate("CLOUDCOVER"));
  for (int u = 0; u < dom.n_units; ++u) {
    const double lp = -2.5 - 1.5 * eg[u] + 3.5 * cc[u];
    CHECK(sel.prob[u] == doctest::Approx(expit(lp)).epsilon(1e-12));
  }

  // zeta = 0 keeps the field out of the score even when include_field is on.
  SurveySelectionParams with_field = params;
  with_field.include_field = true;
  with_field.zeta = 0.0;
  std::vector<double> strong(dom.grid.n_active(), 2.0);
  rng::Xoshiro256pp r2(9);
  const auto sel2 = select_survey_units(dom, with_field, strong, r2);
  for (int u = 0; u < dom.n_units; ++u)
    CHECK(sel2.prob[u] == doctest::Approx(sel.prob[u]).epsilon(1e-12));

  // Positive zeta with a positive field raises every inclusion probability.
  with_field.zeta = 1.0;
  rng::Xoshiro256pp r3(9);
  const auto sel3 = select_survey_units(dom, with_field, strong, r3);
  for (int u = 0; u < dom.n_units; ++u) CHECK(sel3.prob[u] > sel.prob[u]);
}

TEST_CASE("unit means average the covariate over unit cells") {
  const Domain dom = build_synthetic_domain();
  const auto& cc = dom.covariate("CLOUDCOVER");
  const auto means = unit_means(dom, cc);
  REQUIRE(static_cast<int>(means.size()) == dom.n_units);
  const auto cells = dom.unit_cells(2);
  double m = 0.0;
  for (int c : cells) m += cc[c];
  m /= static_cast<double>(cells.size());
  CHECK(means[2] == doctest::Approx(m).epsilon(1e-12));
}

TEST_CASE("cs chain expectation: sequential thinning multiplies") {
  // Thinning the same pattern through tau then psi retains each point with
  // probability tau*psi; verify on expectation against the product law.
  const Grid g = Grid::regular(8, 8, 1.0);
  std::vector<double> ll(g.n_active(), std::log(4.0));
  std::vector<double> tau(g.n_active(), 0.35), psi(g.n_active(), 0.6);
  rng::Xoshiro256pp r(77);
  double kept = 0.0, total = 0.0;
  for (int k = 0; k < 300; ++k) {
    const Pattern p = simulate_poisson(g, ll, r);
    const Pattern q = thin(g, thin(g, p, tau, r), psi, r);
    total += static_cast<double>(p.size());
    kept += static_cast<double>(q.size());
  }
  CHECK(kept / total == doctest::Approx(0.35 * 0.6).epsilon(0.03));
}
