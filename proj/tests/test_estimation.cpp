#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "riagap/dataset.hpp"
#include "riagap/dgp.hpp"
#include "riagap/estimation.hpp"
#include "riagap/oracle.hpp"
#include "riagap/population.hpp"
#include "riagap/random.hpp"

using namespace riagap;

namespace {

// Conditional laws of the divergent model in closed form.
struct DivergentTruth {
  double b = 3.0;
  double kappa = 2.0;
  double pl(double c, int a) const { return expit(-0.5 + a + 0.5 * c); }
  double pm_l(double c, int a, int l) const { return expit(-0.5 + 0.5 * a + 0.3 * c + b * a * l); }
  double pm(double c, int a) const { return pm_l(c, a, 1) * pl(c, a) + pm_l(c, a, 0) * (1.0 - pl(c, a)); }
  double mu(double c, int a, int l, int m) const { return 0.5 * c + a + l + m + kappa * l * m; }
  double pi(double c) const { return 0.4 + 0.2 * c; }
  // E(Y_{a,G_a}) with C uniform on {0, 1}.
  double ey_aga(int a) const {
    double total = 0.0;
    for (const double c : {0.0, 1.0}) {
      double xi = 0.0;
      for (int l = 0; l < 2; ++l) {
        const double wl = l ? pl(c, a) : 1.0 - pl(c, a);
        for (int m = 0; m < 2; ++m) xi += mu(c, a, l, m) * (m ? pm(c, a) : 1.0 - pm(c, a)) * wl;
      }
      total += 0.5 * xi;
    }
    return total;
  }
};

NuisanceFit truth_fit(const DivergentTruth& t, bool misspecified_mu) {
  NuisanceFit f;
  f.pi = [t](const CVec& c) { return t.pi(c[0]); };
  f.pm = [t](const CVec& c, int a) { return t.pm(c[0], a); };
  f.pm_l = [t](const CVec& c, int a, int l) { return t.pm_l(c[0], a, l); };
  f.pl = [t](const CVec& c, int a) { return t.pl(c[0], a); };
  if (misspecified_mu) {
    f.mu = [](const CVec& c, int a, int l, int m) { return 0.5 * c[0] + a + l + m; };
  } else {
    f.mu = [t](const CVec& c, int a, int l, int m) { return t.mu(c[0], a, l, m); };
  }
  f.ey = [](const CVec&, int) { return 0.0; };
  return f;
}

NuisanceFit constant_fit(double k) {
  NuisanceFit f;
  f.pi = [](const CVec&) { return 0.5; };
  f.pm = [](const CVec&, int) { return 0.5; };
  f.pm_l = [](const CVec&, int, int) { return 0.5; };
  f.pl = [](const CVec&, int) { return 0.5; };
  f.mu = [k](const CVec&, int, int, int) { return k; };
  f.ey = [k](const CVec&, int) { return k; };
  return f;
}

// Rows whose empirical law equals a discrete model with dyadic probabilities.
Dataset exact_dataset(const DiscreteScm& s, double total) {
  std::vector<ObservedRow> rows;
  for (const auto& st : s.strata) {
    for (const auto& ty : st.types) {
      for (int a = 0; a < 2; ++a) {
        const double pa = a ? st.propensity : 1.0 - st.propensity;
        const double count = total * st.prob * ty.prob * pa;
        REQUIRE(count == std::floor(count));
        for (int r = 0; r < static_cast<int>(count); ++r) {
          rows.push_back(ObservedRow{st.c, a, ty.l[a], s.m_support[ty.m[a]], ty.y[a][ty.m[a]]});
        }
      }
    }
  }
  return make_dataset(std::move(rows));
}

DiscreteScm dyadic_scm() {
  BinaryStructuralModel m;
  m.strata = {{{0.0}, 0.5, 0.5}, {{1.0}, 0.5, 0.5}};
  m.p_l = [](const std::vector<double>& c, int a) { return 0.25 + 0.25 * a + 0.25 * c[0] * (1 - a); };
  m.p_m = [](const std::vector<double>& c, int a, int l) { return 0.25 + 0.5 * a * l + 0.25 * c[0] * (1 - l); };
  m.y_mean = [](const std::vector<double>& c, int a, int l, int mm) {
    return c[0] + 2.0 * a + l - mm + 3.0 * l * mm - a * mm;
  };
  m.outcome_noise_sd = 0.0;
  return binary_structural_scm(m);
}

// E(Y_{a,G_a}) straight from response types.
double enumerated_ey_aga(const DiscreteScm& s, int a) {
  double total = 0.0;
  for (const auto& st : s.strata) {
    std::vector<double> f(s.m_support.size(), 0.0), mu(s.m_support.size(), 0.0);
    for (const auto& ty : st.types) {
      f[ty.m[a]] += ty.prob;
      for (std::size_t k = 0; k < s.m_support.size(); ++k) mu[k] += ty.prob * ty.y[a][k];
    }
    for (std::size_t k = 0; k < f.size(); ++k) total += st.prob * mu[k] * f[k];
  }
  return total;
}

void mean_se(const std::vector<double>& v, double& mean, double& se) {
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / static_cast<double>(v.size())) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("dataset schema errors name the column") {
  std::istringstream missing("c1,a,l,y\n0,1,0,2.5\n1,0,1,1.0\n0,1,1,0.5\n");
  try {
    (void)read_dataset(missing);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.column() == "m");
    CHECK(std::string(e.what()).find("`m`") != std::string::npos);
  }
  std::istringstream bad_a("a,l,m,y\n2,0,0,1\n0,0,0,1\n");
  CHECK_THROWS_AS(read_dataset(bad_a), SchemaError);
  std::istringstream one_arm("a,l,m,y\n1,0,0,1\n1,1,0,1\n");
  CHECK_THROWS_AS(read_dataset(one_arm), SchemaError);
  std::istringstream na("a,l,m,y\n1,0,0,NA\n0,1,0,1\n");
  try {
    (void)read_dataset(na);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.column() == "y");
  }
  std::istringstream extra("a,l,m,y,z\n1,0,0,1,0\n0,1,0,1,0\n");
  CHECK_THROWS_AS(read_dataset(extra), SchemaError);
  std::istringstream ok("y,m,l,a,c2,c1\n1.5,1,0,1,3,4\n-2,0,1,0,5,6\n");
  const auto d = read_dataset(ok);
  REQUIRE(d.size() == 2);
  CHECK(d.c_names == std::vector<std::string>{"c1", "c2"});
  CHECK(d.rows[0].c == std::vector<double>{4.0, 3.0});
  CHECK(d.rows[1].y == -2.0);
}

TEST_CASE("g-computation with constant fits") {
  const auto data = simulate_dataset(divergent_dgp(), 500, 1);
  const auto f = constant_fit(3.25);
  CHECK(gcomp_ey_a(f, data, 1) == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(gcomp_ey_aga(f, data, 0) == doctest::Approx(3.25).epsilon(1e-15));
}

TEST_CASE("saturated fits reproduce stratified means") {
  const auto data = simulate_dataset(divergent_dgp(), 3000, 2);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const auto fit = fit_nuisance(data, all, Learner::saturated);
  std::map<std::pair<double, int>, std::pair<double, double>> cell;
  for (const auto& r : data.rows) {
    auto& [s, n] = cell[{r.c[0], r.a}];
    s += r.y;
    n += 1.0;
  }
  for (int a = 0; a < 2; ++a) {
    double direct = 0.0;
    for (const auto& r : data.rows) {
      const auto& [s, n] = cell[{r.c[0], a}];
      direct += s / n;
    }
    direct /= static_cast<double>(data.size());
    CHECK(std::abs(gcomp_ey_a(fit, data, a) - direct) <= 1e-12);
  }
}

TEST_CASE("saturated fits on an exact-law dataset match the enumeration oracle") {
  const auto s = dyadic_scm();
  const auto data = exact_dataset(s, 4096.0);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const auto fit = fit_nuisance(data, all, Learner::saturated, 0.0);
  for (int a = 0; a < 2; ++a) CHECK(std::abs(gcomp_ey_aga(fit, data, a) - enumerated_ey_aga(s, a)) <= 1e-10);
  const auto e = compute_effects(enumerate_population(s));
  CHECK(std::abs((gcomp_ey_aga(fit, data, 1) - gcomp_ey_aga(fit, data, 0)) - e.effects.te_r) <= 1e-10);
  CHECK(std::abs((gcomp_ey_a(fit, data, 1) - gcomp_ey_a(fit, data, 0)) - e.effects.te) <= 1e-10);
}

TEST_CASE("xi is linear in an additive outcome model") {
  const DivergentTruth t;
  auto f = truth_fit(t, false);
  f.mu = [](const CVec& c, int a, int l, int m) { return 1.0 + c[0] + 2.0 * a + 3.0 * l - 4.0 * m; };
  for (const double c : {0.0, 1.0}) {
    for (int a = 0; a < 2; ++a) {
      const double expect = 1.0 + c + 2.0 * a + 3.0 * f.f_l({c}, a, 1) - 4.0 * f.f_m({c}, a, 1);
      CHECK(std::abs(f.xi({c}, a) - expect) <= 1e-14);
    }
  }
}

TEST_CASE("phi values") {
  const DivergentTruth t;
  auto f = truth_fit(t, false);
  f.ey = [](const CVec& c, int a) { return 1.0 + c[0] + a; };
  const ObservedRow r{{1.0}, 0, 1.0, 1.0, 7.0};
  CHECK(eif_phi(r, f, 1) == 3.0);
  const ObservedRow hit{{1.0}, 1, 0.0, 0.0, 3.0};
  CHECK(eif_phi(hit, f, 1) == 3.0);
  const ObservedRow off{{1.0}, 1, 0.0, 0.0, 4.0};
  CHECK(eif_phi(off, f, 1) == doctest::Approx(3.0 + 1.0 / 0.6));
}

TEST_CASE("phi mean estimates E(Y_a)") {
  const auto spec = divergent_dgp();
  const auto data = simulate_dataset(spec, 100000, 3);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const auto fit = fit_nuisance(data, all, Learner::saturated);
  const auto pop = enumerate_population(spec);
  for (int a = 0; a < 2; ++a) {
    double truth = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) truth += pop.weight(i) * pop.y_factual(pop.units()[i], a);
    std::vector<double> v;
    for (const auto& r : data.rows) v.push_back(eif_phi(r, fit, a));
    double m = 0.0, se = 0.0;
    mean_se(v, m, se);
    CHECK(std::abs(m - truth) <= 4.0 * se);
  }
}

TEST_CASE("psi bracket values") {
  const DivergentTruth t;
  auto f = truth_fit(t, false);
  const ObservedRow off{{0.0}, 0, 1.0, 1.0, 5.0};
  CHECK(eif_psi(off, f, 1) == 0.0);

  // Outcome model flat in (l, m) and M independent of L: only the residual survives.
  f.pm_l = [t](const CVec& c, int a, int) { return t.pm(c[0], a); };
  f.mu = [](const CVec& c, int a, int, int) { return 2.0 + c[0] + a; };
  const ObservedRow on{{1.0}, 1, 1.0, 0.0, 6.5};
  CHECK(eif_psi(on, f, 1) == doctest::Approx((6.5 - 4.0) / 0.6).epsilon(1e-14));

  // With M independent of L the two marginal terms average to zero over (L, M).
  f.mu = [t](const CVec& c, int a, int l, int m) { return t.mu(c[0], a, l, m); };
  for (const double c : {0.0, 1.0}) {
    double avg = 0.0;
    for (int l = 0; l < 2; ++l) {
      for (int m = 0; m < 2; ++m) {
        const double mu = f.mu({c}, 1, l, m);
        const ObservedRow r{{c}, 1, static_cast<double>(l), static_cast<double>(m), mu};
        avg += f.f_l({c}, 1, l) * f.f_m({c}, 1, m) * eif_psi(r, f, 1);
      }
    }
    CHECK(std::abs(avg) <= 1e-12);
  }
}

TEST_CASE("psi mean estimates E(Y_{a,G_a})") {
  const DivergentTruth t;
  const auto data = simulate_dataset(divergent_dgp(), 100000, 4);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const auto fit = fit_nuisance(data, all, Learner::saturated);
  const auto spec = divergent_dgp();
  for (int a = 0; a < 2; ++a) {
    std::vector<double> v;
    for (const auto& r : data.rows) v.push_back(eif_psi_full(r, fit, a));
    double m = 0.0, se = 0.0;
    mean_se(v, m, se);
    CHECK(std::abs(t.ey_aga(a) - enumerated_ey_aga(spec, a)) <= 1e-12);
    CHECK(std::abs(m - t.ey_aga(a)) <= 4.0 * se);
  }
}

TEST_CASE("double robustness: misspecified outcome model with correct densities") {
  const DivergentTruth t;
  const auto data = simulate_dataset(divergent_dgp(), 100000, 5);
  const auto f = truth_fit(t, true);
  for (int a = 0; a < 2; ++a) {
    std::vector<double> v, plug;
    for (const auto& r : data.rows) {
      v.push_back(eif_psi_full(r, f, a));
      plug.push_back(f.xi(r.c, a));
    }
    double m = 0.0, se = 0.0;
    mean_se(v, m, se);
    CHECK(std::abs(m - t.ey_aga(a)) <= 4.0 * se);
    if (a == 1) {
      double pm = 0.0, pse = 0.0;
      mean_se(plug, pm, pse);
      CHECK(std::abs(pm - t.ey_aga(a)) > 4.0 * se);
    }
  }
}

TEST_CASE("report bookkeeping") {
  const auto data = simulate_dataset(divergent_dgp(), 4000, 6);
  DmlOptions opt;
  opt.seed = 6;
  const auto rep = dml_test(data, opt);
  double mean_eif = 0.0, sq = 0.0;
  for (const double e : rep.eif) {
    mean_eif += e;
    sq += e * e;
  }
  const double n = static_cast<double>(rep.n);
  CHECK(std::abs(mean_eif / n) <= 1e-10);
  CHECK(std::abs(rep.se - std::sqrt(sq / n / n)) <= 1e-12);
  const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 0.975);
  CHECK(std::abs(rep.ci_low - (rep.psi_hat - z * rep.se)) <= 1e-12);
  CHECK(std::abs(rep.ci_high - (rep.psi_hat + z * rep.se)) <= 1e-12);
  CHECK(rep.lower_bound == std::abs(rep.psi_hat));
  CHECK(std::abs(rep.psi_hat - (rep.te_hat - rep.te_r_hat)) <= 1e-12);
  CHECK(rep.folds == 2);
  CHECK(rep.fold_sizes.size() == 2);
  CHECK(rep.fold_sizes[0] + rep.fold_sizes[1] == rep.n);
  CHECK(rep.reject == (rep.p_value < 0.05));
  CHECK(rep.p_value < 0.05);
  CHECK(rep.verdict.find("differ") != std::string::npos);
  CHECK(rep.warnings.empty());
}

TEST_CASE("row order and thread count do not change the report") {
  const auto data = simulate_dataset(divergent_dgp(), 3000, 7);
  DmlOptions opt;
  opt.seed = 99;
  const auto base = dml_test(data, opt);

  std::vector<std::size_t> perm(data.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    UnitStream rng(5, StreamTag::replicate, i);
    std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1)) % (i + 1)]);
  }
  Dataset shuffled = data;
  for (std::size_t i = 0; i < perm.size(); ++i) shuffled.rows[i] = data.rows[perm[i]];
  const auto other = dml_test(shuffled, opt);
  CHECK(other.psi_hat == base.psi_hat);
  CHECK(other.se == base.se);
  CHECK(other.p_value == base.p_value);
  CHECK(other.te_hat == base.te_hat);
  CHECK(other.fold_sizes == base.fold_sizes);
  for (std::size_t i = 0; i < perm.size(); ++i) CHECK(other.eif[i] == base.eif[perm[i]]);

  ::setenv("RIA_GAP_THREADS", "4", 1);
  const auto threaded = dml_test(data, opt);
  ::unsetenv("RIA_GAP_THREADS");
  CHECK(threaded.psi_hat == base.psi_hat);
  CHECK(threaded.se == base.se);
  CHECK(threaded.eif == base.eif);
}

TEST_CASE("saturated single-fold estimate equals the plug-in value") {
  const auto data = simulate_dataset(divergent_dgp(), 5000, 8);
  const auto rep = estimate_in_sample(data, Learner::saturated);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  const auto fit = fit_nuisance(data, all, Learner::saturated);
  const double plug = gcomp_ey_a(fit, data, 1) - gcomp_ey_a(fit, data, 0) - gcomp_ey_aga(fit, data, 1) +
                      gcomp_ey_aga(fit, data, 0);
  CHECK(std::abs(rep.psi_hat - plug) <= 1e-12);
  CHECK(rep.trimmed_rows == 0);
}

TEST_CASE("estimator errors and warnings") {
  const auto data = simulate_dataset(divergent_dgp(), 2000, 9);
  DmlOptions one;
  one.folds = 1;
  CHECK_THROWS_AS(dml_test(data, one), std::invalid_argument);
  DmlOptions bad_alpha;
  bad_alpha.alpha = 1.5;
  CHECK_THROWS_AS(dml_test(data, bad_alpha), std::invalid_argument);

  Dataset sparse = data;
  sparse.rows.erase(std::remove_if(sparse.rows.begin(), sparse.rows.end(),
                                   [](const ObservedRow& r) { return r.a == 0 && r.l == 1.0 && r.m == 1.0; }),
                    sparse.rows.end());
  sparse.rows.push_back(ObservedRow{{0.0}, 0, 1.0, 1.0, 1.0});
  try {
    (void)dml_test(sparse, DmlOptions{});
    FAIL("expected a missing-cell refusal");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("a=0, l=1, m=1") != std::string::npos);
  }

  // Near-deterministic treatment in the c = 1 stratum.
  std::vector<ObservedRow> rows;
  for (int i = 0; i < 4000; ++i) {
    UnitStream rng(13, StreamTag::replicate, static_cast<std::uint64_t>(i));
    ObservedRow r;
    r.c = {static_cast<double>(i % 2)};
    r.a = r.c[0] == 1.0 ? (rng.uniform() < 0.997 ? 1 : 0) : (rng.uniform() < 0.5 ? 1 : 0);
    if (i < 16) r.a = (i / 2) % 2;
    r.l = rng.uniform() < 0.5 ? 1.0 : 0.0;
    r.m = rng.uniform() < 0.5 ? 1.0 : 0.0;
    r.y = rng.normal();
    rows.push_back(r);
  }
  const auto rep = dml_test(make_dataset(rows), DmlOptions{});
  CHECK(rep.trim_rate > kTrimWarnRate);
  CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("simulation refuses specs outside the estimand's assumptions") {
  DiscreteScm confounded;
  confounded.m_support = {0.0, 1.0};
  Stratum st;
  st.types.push_back(ResponseType{0.5, {0.0, 0.0}, {0, 0}, {std::vector{0.0, 0.0}, std::vector{0.0, 0.0}}});
  st.types.push_back(ResponseType{0.5, {0.0, 0.0}, {1, 1}, {std::vector{1.0, 1.0}, std::vector{1.0, 1.0}}});
  confounded.strata.push_back(st);
  CHECK_THROWS_AS(simulate_dataset(confounded, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_dataset(ParametricScm{}, 100, 1), std::invalid_argument);
}

TEST_CASE("seeded fixtures") {
  DmlOptions opt;
  opt.seed = 2024;
  const auto div = dml_test(simulate_dataset(divergent_dgp(), 4000, 2024), opt);
  CHECK(div.p_value < 0.05);
  const auto col = dml_test(simulate_dataset(level_dgp(), 2000, 2024), opt);
  CHECK(col.ci_low <= 0.0);
  CHECK(col.ci_high >= 0.0);
  CHECK(col.warnings.empty());
}

TEST_CASE("null models") {
  for (const auto& s : {collapse_dgp(), level_dgp()}) {
    CHECK(s.crossworld_independent());
    CHECK(s.estimand_identified());
    CHECK(std::abs(compute_effects(enumerate_population(s)).gaps.te) <= 1e-12);
  }
  CHECK_FALSE(divergent_dgp().crossworld_independent());
}

TEST_CASE("a constant L makes the influence function vanish under saturated fits") {
  const auto rep = estimate_in_sample(simulate_dataset(collapse_dgp(), 2000, 11), Learner::saturated);
  CHECK(std::abs(rep.psi_hat) <= 1e-12);
  CHECK(rep.se <= 1e-12);
  CHECK_FALSE(rep.reject);
  CHECK(rep.p_value == 1.0);
  CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("learner names") {
  CHECK(learner_from_string("default") == Learner::parametric);
  CHECK(learner_from_string("saturated") == Learner::saturated);
  CHECK(to_string(Learner::parametric) == "default");
  CHECK_THROWS_AS(learner_from_string("forest"), std::invalid_argument);
}
