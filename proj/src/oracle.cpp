#include "riagap/oracle.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "riagap/summation.hpp"

namespace riagap {

namespace {

using Groups = std::vector<std::vector<std::size_t>>;

Groups strata_members(const Population& pop) {
  Groups g(pop.n_strata());
  const auto units = pop.units();
  for (std::size_t i = 0; i < units.size(); ++i) g.at(units[i].stratum).push_back(i);
  return g;
}

double weighted_sum(const Population& pop, const std::vector<std::size_t>& members,
                    const std::function<double(std::size_t)>& f) {
  std::vector<double> terms(members.size());
  for (std::size_t j = 0; j < members.size(); ++j) terms[j] = pop.weight(members[j]) * f(members[j]);
  return pairwise_sum(terms);
}

double weighted_sum(const Population& pop, const std::function<double(std::size_t)>& f) {
  std::vector<double> terms(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) terms[i] = pop.weight(i) * f(i);
  return pairwise_sum(terms);
}

double stratum_mass(const Population& pop, const std::vector<std::size_t>& members, std::size_t s) {
  const double w = weighted_sum(pop, members, [](std::size_t) { return 1.0; });
  if (!(w > 0.0)) throw std::domain_error("stratum " + std::to_string(s) + " has zero mass");
  return w;
}

// E_C Cov(X, Y | C) with population covariances inside each stratum.
double expected_conditional_cov(const Population& pop, const Groups& groups,
                                const std::function<double(std::size_t)>& x,
                                const std::function<double(std::size_t)>& y) {
  std::vector<double> per_stratum;
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const auto& mem = groups[s];
    if (mem.empty()) continue;
    const double w = stratum_mass(pop, mem, s);
    const double sxy = weighted_sum(pop, mem, [&](std::size_t i) { return x(i) * y(i); });
    const double sx = weighted_sum(pop, mem, x);
    const double sy = weighted_sum(pop, mem, y);
    per_stratum.push_back(sxy - sx * sy / w);
  }
  return pairwise_sum(per_stratum);
}

// A mean-type functional with its per-unit influence values (Monte Carlo only).
struct Quantity {
  double value = 0.0;
  std::vector<double> infl;
};

Quantity natural_mean(const Population& pop, bool with_infl, const std::function<double(std::size_t)>& v) {
  Quantity q;
  q.value = weighted_sum(pop, v);
  if (with_infl) {
    q.infl.resize(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) q.infl[i] = v(i) - q.value;
  }
  return q;
}

// E(Y_{a, G_{a'}}) over finite mediator support via stratum tabulation.
Quantity ria_stratified(const Population& pop, const Groups& groups, int a, int a_med, bool with_infl) {
  const auto units = pop.units();
  const std::size_t k_count = pop.m_support().size();
  std::vector<double> theta_s(groups.size(), 0.0);
  std::vector<std::vector<double>> f(groups.size()), mu(groups.size());
  std::vector<double> stratum_terms;
  for (std::size_t s = 0; s < groups.size(); ++s) {
    const auto& mem = groups[s];
    if (mem.empty()) continue;
    const double w = stratum_mass(pop, mem, s);
    f[s].resize(k_count);
    mu[s].resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      f[s][k] = weighted_sum(pop, mem, [&](std::size_t i) {
                  return units[i].m_index[a_med] == k ? 1.0 : 0.0;
                }) / w;
      mu[s][k] = weighted_sum(pop, mem, [&](std::size_t i) { return pop.y_at(units[i], a, k); }) / w;
      theta_s[s] += mu[s][k] * f[s][k];
    }
    stratum_terms.push_back(w * theta_s[s]);
  }
  Quantity q;
  q.value = pairwise_sum(stratum_terms);
  if (with_infl) {
    q.infl.resize(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const auto& u = units[i];
      const std::size_t s = u.stratum;
      double plug = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) plug += pop.y_at(u, a, k) * f[s][k];
      q.infl[i] = (theta_s[s] - q.value) + (plug - theta_s[s]) + (mu[s][u.m_index[a_med]] - theta_s[s]);
    }
  }
  return q;
}

// E(Y_{a, G_{a'}}) with each unit's independent draw G_{a'}.
Quantity ria_drawn(const Population& pop, int a, int a_med, bool with_infl) {
  const auto units = pop.units();
  return natural_mean(pop, with_infl, [&](std::size_t i) { return pop.y(units[i], a, units[i].g[a_med]); });
}

OracleMode resolve_mode(const Population& pop, std::optional<OracleMode> mode) {
  const OracleMode m = mode.value_or(pop.exact() ? OracleMode::exact : OracleMode::monte_carlo);
  if (m == OracleMode::exact && !pop.discrete_mediator()) {
    throw std::domain_error("continuous mediator: MC mode required");
  }
  return m;
}

}  // namespace

std::string_view to_string(OracleMode m) { return m == OracleMode::exact ? "exact" : "monte-carlo"; }

EffectSet compute_effects(const Population& pop, std::optional<OracleMode> requested) {
  if (pop.size() == 0) throw std::invalid_argument("compute_effects: empty population");
  const OracleMode mode = resolve_mode(pop, requested);
  const bool mc = mode == OracleMode::monte_carlo;
  const auto units = pop.units();

  // Base quantities: E(Y_{1,M1}), E(Y_{1,M0}), E(Y_{0,M0}), E(Y_{1,G1}), E(Y_{1,G0}), E(Y_{0,G0}).
  std::array<Quantity, 6> q;
  q[0] = natural_mean(pop, mc, [&](std::size_t i) { return pop.y(units[i], 1, units[i].m[1]); });
  q[1] = natural_mean(pop, mc, [&](std::size_t i) { return pop.y(units[i], 1, units[i].m[0]); });
  q[2] = natural_mean(pop, mc, [&](std::size_t i) { return pop.y(units[i], 0, units[i].m[0]); });
  if (pop.discrete_mediator()) {
    const auto groups = strata_members(pop);
    q[3] = ria_stratified(pop, groups, 1, 1, mc);
    q[4] = ria_stratified(pop, groups, 1, 0, mc);
    q[5] = ria_stratified(pop, groups, 0, 0, mc);
  } else {
    q[3] = ria_drawn(pop, 1, 1, mc);
    q[4] = ria_drawn(pop, 1, 0, mc);
    q[5] = ria_drawn(pop, 0, 0, mc);
  }

  using Coefs = std::array<double, 6>;
  std::vector<double> buffer(mc ? pop.size() : 0);
  auto value = [&](const Coefs& c) {
    double v = 0.0;
    for (std::size_t j = 0; j < 6; ++j) v += c[j] * q[j].value;
    return v;
  };
  auto se = [&](const Coefs& c) {
    if (!mc) return 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      double d = 0.0;
      for (std::size_t j = 0; j < 6; ++j) d += c[j] * q[j].infl[i];
      buffer[i] = d * d;
    }
    const double n = static_cast<double>(pop.size());
    return std::sqrt(pairwise_sum(buffer)) / n;
  };

  const Coefs te{1, 0, -1, 0, 0, 0}, nie{1, -1, 0, 0, 0, 0}, nde{0, 1, -1, 0, 0, 0};
  const Coefs te_r{0, 0, 0, 1, 0, -1}, nie_r{0, 0, 0, 1, -1, 0}, nde_r{0, 0, 0, 0, 1, -1};
  const Coefs nie_o{1, 0, 0, 0, -1, 0}, nde_o{0, 0, -1, 0, 1, 0};
  auto minus = [](const Coefs& x, const Coefs& y) {
    Coefs r{};
    for (std::size_t j = 0; j < 6; ++j) r[j] = x[j] - y[j];
    return r;
  };

  EffectSet out;
  out.mode = mode;
  out.n_units = pop.size();
  out.effects = {value(te), value(nie), value(nde), value(te_r), value(nie_r), value(nde_r),
                 value(nie_o), value(nde_o)};
  out.mc_se = {se(te), se(nie), se(nde), se(te_r), se(nie_r), se(nde_r), se(nie_o), se(nde_o)};
  const Coefs g_te = minus(te, te_r), g_nie = minus(nie, nie_r), g_nde = minus(nde, nde_r);
  const Coefs g_nie_o = minus(nie, nie_o), g_nde_o = minus(nde, nde_o);
  out.gaps = {value(g_te), value(g_nie), value(g_nde), value(g_nie_o), value(g_nde_o)};
  out.gap_se = {se(g_te), se(g_nie), se(g_nde), se(g_nie_o), se(g_nde_o)};
  return out;
}

NaturalEffects natural_effects(const Population& pop) {
  if (pop.size() == 0) throw std::invalid_argument("natural_effects: empty population");
  const auto units = pop.units();
  const double te = weighted_sum(pop, [&](std::size_t i) {
    return pop.y(units[i], 1, units[i].m[1]) - pop.y(units[i], 0, units[i].m[0]);
  });
  const double nie = weighted_sum(pop, [&](std::size_t i) {
    return pop.y(units[i], 1, units[i].m[1]) - pop.y(units[i], 1, units[i].m[0]);
  });
  const double nde = weighted_sum(pop, [&](std::size_t i) {
    return pop.y(units[i], 1, units[i].m[0]) - pop.y(units[i], 0, units[i].m[0]);
  });
  return {te, nie, nde};
}

RiaEffects ria_effects(const Population& pop, std::optional<OracleMode> mode) {
  const auto e = compute_effects(pop, mode).effects;
  return {e.te_r, e.nie_r, e.nde_r};
}

OrganicEffects organic_effects(const Population& pop, std::optional<OracleMode> mode) {
  const auto e = compute_effects(pop, mode).effects;
  return {e.nie_organic, e.nde_organic};
}

CovarianceTerms covariance_rhs(const Population& pop, CovarianceForm which) {
  if (pop.size() == 0) throw std::invalid_argument("covariance_rhs: empty population");
  if (!pop.discrete_mediator()) {
    throw std::domain_error("covariance_rhs: requires a finite mediator support");
  }
  const auto units = pop.units();
  const auto groups = strata_members(pop);
  CovarianceTerms out;

  if (which == CovarianceForm::binary_randomized) {
    if (pop.m_support() != std::vector<double>{0.0, 1.0}) {
      throw std::domain_error("binary covariance form: mediator support must be {0, 1}");
    }
    if (pop.n_strata() != 1) throw std::domain_error("binary covariance form: C must be empty");
    auto m = [&](int a) { return [&, a](std::size_t i) { return units[i].m[a]; }; };
    auto dy = [&](int a) {
      return [&, a](std::size_t i) { return pop.y_at(units[i], a, 1) - pop.y_at(units[i], a, 0); };
    };
    out.te_gap = expected_conditional_cov(pop, groups, m(1), dy(1)) -
                 expected_conditional_cov(pop, groups, m(0), dy(0));
    out.nie_gap = expected_conditional_cov(
        pop, groups, [&](std::size_t i) { return units[i].m[1] - units[i].m[0]; }, dy(1));
    out.nde_gap = expected_conditional_cov(pop, groups, m(0),
                                           [&](std::size_t i) { return dy(1)(i) - dy(0)(i); });
    return out;
  }

  const std::size_t k_count = pop.m_support().size();
  auto ind = [&](int a, std::size_t k) {
    return [&, a, k](std::size_t i) { return units[i].m_index[a] == k ? 1.0 : 0.0; };
  };
  auto yk = [&](int a, std::size_t k) {
    return [&, a, k](std::size_t i) { return pop.y_at(units[i], a, k); };
  };
  std::vector<double> te_terms, nie_terms, nde_terms, org_terms;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (which == CovarianceForm::general) {
      te_terms.push_back(expected_conditional_cov(pop, groups, ind(1, k), yk(1, k)) -
                         expected_conditional_cov(pop, groups, ind(0, k), yk(0, k)));
      nie_terms.push_back(expected_conditional_cov(
          pop, groups, [&](std::size_t i) { return ind(1, k)(i) - ind(0, k)(i); }, yk(1, k)));
      nde_terms.push_back(expected_conditional_cov(
          pop, groups, ind(0, k), [&](std::size_t i) { return yk(1, k)(i) - yk(0, k)(i); }));
    } else {
      org_terms.push_back(expected_conditional_cov(pop, groups, ind(0, k), yk(1, k)));
    }
  }
  if (which == CovarianceForm::general) {
    out.te_gap = pairwise_sum(te_terms);
    out.nie_gap = pairwise_sum(nie_terms);
    out.nde_gap = pairwise_sum(nde_terms);
  } else {
    const double s = pairwise_sum(org_terms);
    out.nie_gap = -s;
    out.nde_gap = s;
  }
  return out;
}

}  // namespace riagap
