#include "doctest.h"

#include <cmath>
#include <memory>

#include "riagap/identities.hpp"
#include "riagap/oracle.hpp"
#include "riagap/population.hpp"
#include "riagap/scm.hpp"

using namespace riagap;

namespace {

DiscreteScm degenerate_mediator_scm(std::uint64_t seed) {
  auto s = random_discrete_scm(seed);
  // Collapse the mediator onto its first support point.
  s.m_support = {s.m_support.front()};
  for (auto& st : s.strata) {
    for (auto& t : st.types) {
      t.m = {0, 0};
      for (auto& y : t.y) y.resize(1);
    }
  }
  return s;
}

double policy_mean(const Population& pop, int a, std::size_t k) {
  double v = 0.0;
  for (std::size_t i = 0; i < pop.size(); ++i) v += pop.weight(i) * pop.y_at(pop.units()[i], a, k);
  return v;
}

}  // namespace

TEST_CASE("two-type mediator population") {
  const auto pop = enumerate_population(miles_scm());
  const auto e = compute_effects(pop);
  CHECK(e.mode == OracleMode::exact);
  CHECK(std::abs(e.effects.nie) <= 1e-12);
  CHECK(std::abs(e.effects.nie_r - 0.25) <= 1e-12);
  const auto n = natural_effects(pop);
  CHECK(std::abs(n.nie) <= 1e-12);
  CHECK(std::abs(ria_effects(pop).nie_r - 0.25) <= 1e-12);
  const auto rhs = covariance_rhs(pop, CovarianceForm::binary_randomized);
  CHECK(std::abs(rhs.nie_gap + 0.25) <= 1e-12);
  CHECK(e.mc_se.nie == 0.0);
}

TEST_CASE("sharper null: fixed mediators give no indirect effect") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto s = random_discrete_scm(seed);
    for (auto& st : s.strata) {
      for (auto& t : st.types) t.m[1] = t.m[0];
    }
    CHECK(std::abs(compute_effects(enumerate_population(s)).effects.nie) <= 1e-12);
  }
}

TEST_CASE("sharper null: each unit has fixed mediator or flat outcome") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto s = random_discrete_scm(seed);
    std::size_t j = 0;
    for (auto& st : s.strata) {
      for (auto& t : st.types) {
        if (j++ % 2 == 0) {
          t.m[1] = t.m[0];
        } else {
          std::fill(t.y[1].begin(), t.y[1].end(), t.y[1].front());
        }
      }
    }
    CHECK(std::abs(compute_effects(enumerate_population(s)).effects.nie) <= 1e-12);
  }
}

TEST_CASE("natural indirect effect equals the unit-level product form on sampled draws") {
  const auto pop = sample_population(fig1_dgp(1.0), 1000000, 1);
  const auto nat = natural_effects(pop);
  std::vector<double> prod(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const auto& u = pop.units()[i];
    prod[i] = (u.m[1] - u.m[0]) * (pop.y(u, 1, 1.0) - pop.y(u, 1, 0.0));
  }
  double s = 0.0;
  for (const double v : prod) s += v;
  CHECK(std::abs(nat.nie - s / static_cast<double>(pop.size())) <= 1e-12);
}

TEST_CASE("exact-mode decompositions") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto e = compute_effects(enumerate_population(random_discrete_scm(seed)));
    const auto& f = e.effects;
    CHECK(std::abs(f.te - (f.nie + f.nde)) <= 1e-12);
    CHECK(std::abs(f.te_r - (f.nie_r + f.nde_r)) <= 1e-12);
    CHECK(std::abs(f.te - (f.nie_organic + f.nde_organic)) <= 1e-12);
    CHECK(std::abs(e.gaps.te) <= std::abs(e.gaps.nie) + std::abs(e.gaps.nde) + 1e-12);
  }
}

TEST_CASE("degenerate mediator") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto pop = enumerate_population(degenerate_mediator_scm(seed));
    const auto e = compute_effects(pop);
    CHECK(std::abs(e.effects.nie_r) <= 1e-12);
    CHECK(std::abs(e.effects.nde_r - (policy_mean(pop, 1, 0) - policy_mean(pop, 0, 0))) <= 1e-12);
    double ey1 = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) ey1 += pop.weight(i) * pop.y_factual(pop.units()[i], 1);
    CHECK(std::abs(e.effects.nie_organic - (ey1 - policy_mean(pop, 1, 0))) <= 1e-12);
    CHECK(std::abs(e.effects.nie) <= 1e-12);
  }
}

TEST_CASE("cross-world independence collapses every analogue") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto e = compute_effects(enumerate_population(random_independent_scm(seed)));
    const auto& f = e.effects;
    CHECK(std::abs(f.te_r - f.te) <= 1e-12);
    CHECK(std::abs(f.nie_r - f.nie) <= 1e-12);
    CHECK(std::abs(f.nde_r - f.nde) <= 1e-12);
    CHECK(std::abs(f.nie_organic - f.nie) <= 1e-12);
  }
}

TEST_CASE("covariance terms vanish for outcomes constant across units") {
  auto s = random_discrete_scm(17);
  const auto ref = s.strata.front().types.front().y;
  for (auto& st : s.strata) {
    for (auto& t : st.types) t.y = ref;
  }
  const auto pop = enumerate_population(s);
  for (const auto form : {CovarianceForm::general, CovarianceForm::organic}) {
    const auto r = covariance_rhs(pop, form);
    CHECK(std::abs(r.te_gap) <= 1e-12);
    CHECK(std::abs(r.nie_gap) <= 1e-12);
    CHECK(std::abs(r.nde_gap) <= 1e-12);
  }
}

TEST_CASE("general form agrees with per-stratum binary form") {
  RandomDiscreteOptions opt;
  opt.min_m = 2;
  opt.max_m = 2;
  opt.max_strata = 3;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto s = random_discrete_scm(seed, opt);
    const auto general = covariance_rhs(enumerate_population(s), CovarianceForm::general);
    double nie = 0.0, nde = 0.0, te = 0.0;
    for (const auto& st : s.strata) {
      DiscreteScm one;
      one.m_support = s.m_support;
      Stratum copy = st;
      copy.prob = 1.0;
      one.strata.push_back(copy);
      const auto r = covariance_rhs(enumerate_population(one), CovarianceForm::binary_randomized);
      nie += st.prob * r.nie_gap;
      nde += st.prob * r.nde_gap;
      te += st.prob * r.te_gap;
    }
    CHECK(std::abs(general.nie_gap - nie) <= 1e-12);
    CHECK(std::abs(general.nde_gap - nde) <= 1e-12);
    CHECK(std::abs(general.te_gap - te) <= 1e-12);
  }
}

TEST_CASE("Monte Carlo mode on a sampled discrete population tracks the exact values") {
  const auto spec = random_discrete_scm(23);
  const auto exact = compute_effects(enumerate_population(spec));
  const auto mc = compute_effects(sample_population(spec, 400000, 9), OracleMode::monte_carlo);
  CHECK(mc.mode == OracleMode::monte_carlo);
  CHECK(mc.mc_se.nie_r > 0.0);
  CHECK(std::abs(mc.effects.nie - exact.effects.nie) <= 4.0 * mc.mc_se.nie + 1e-12);
  CHECK(std::abs(mc.effects.nie_r - exact.effects.nie_r) <= 4.0 * mc.mc_se.nie_r + 1e-12);
  CHECK(std::abs(mc.gaps.te - exact.gaps.te) <= 4.0 * mc.gap_se.te + 1e-12);
}

TEST_CASE("oracle errors") {
  auto spec = std::make_shared<const Scm>(miles_scm());
  const Population empty(spec, {}, {}, true);
  CHECK_THROWS_AS(natural_effects(empty), std::invalid_argument);
  CHECK_THROWS_AS(compute_effects(empty), std::invalid_argument);

  ParametricScm linear;
  const auto cont = sample_population(linear, 100, 1);
  try {
    (void)compute_effects(cont, OracleMode::exact);
    FAIL("expected refusal");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("MC mode required") != std::string::npos);
  }
  CHECK_THROWS_AS(covariance_rhs(cont, CovarianceForm::general), std::domain_error);

  auto zero = random_discrete_scm(3, RandomDiscreteOptions{2, 2, 1, 3, 4});
  Stratum extra = zero.strata.front();
  extra.c = {9.0};
  extra.prob = 0.0;
  zero.strata.push_back(extra);
  CHECK_THROWS_AS(compute_effects(enumerate_population(zero)), std::domain_error);

  auto three = random_discrete_scm(4, RandomDiscreteOptions{3, 3, 1, 3, 4});
  CHECK_THROWS_AS(covariance_rhs(enumerate_population(three), CovarianceForm::binary_randomized),
                  std::domain_error);
}
