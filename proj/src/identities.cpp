#include "riagap/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "riagap/iv.hpp"
#include "riagap/mannwhitney.hpp"
#include "riagap/parallel.hpp"
#include "riagap/population.hpp"
#include "riagap/random.hpp"

namespace riagap {

namespace {

class Draws {
 public:
  explicit Draws(std::uint64_t seed) : rng_(seed, StreamTag::spec_generator, 0) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(rng_.uniform() * static_cast<double>(n)));
  }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }
  bool coin(double p = 0.5) { return rng_.uniform() < p; }
  // Random probability vector; sparse draws leave some cells empty.
  std::vector<double> simplex(std::size_t n, bool sparse = false) {
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) {
      x = rng_.uniform();
      if (sparse && coin(0.3)) x = 0.0;
      total += x;
    }
    if (total <= 0.0) {
      w[index(n)] = 1.0;
      total = 1.0;
    }
    for (auto& x : w) x /= total;
    return w;
  }

 private:
  UnitStream rng_;
};

double mc_violation(double diff, double se) {
  const double excess = std::max(0.0, std::abs(diff) - kRoundingFloor);
  if (excess == 0.0) return 0.0;
  if (se <= 0.0) return std::numeric_limits<double>::infinity();
  return excess / se;
}

bool triangle_holds(const GapFields& g) {
  const double slack = 1e-12 * (1.0 + std::abs(g.nie) + std::abs(g.nde));
  return std::abs(g.te) <= std::abs(g.nie) + std::abs(g.nde) + slack;
}

std::vector<double> outcome_support(Draws& d, std::size_t max_support) {
  const std::size_t n = d.between(1, max_support);
  const double scale = d.uniform(0.5, 2.0);
  const double shift = d.uniform(-2.0, 2.0);
  std::vector<double> ys(n);
  for (std::size_t j = 0; j < n; ++j) ys[j] = shift + scale * static_cast<double>(j);
  return ys;
}

std::vector<double> integer_support(std::size_t k) {
  std::vector<double> v(k);
  std::iota(v.begin(), v.end(), 0.0);
  return v;
}

OutcomeForm random_form(Draws& d, const std::vector<Variable>& allowed) {
  OutcomeForm g;
  const std::size_t n_terms = d.between(1, 4);
  g.terms.push_back(term(d.uniform(-2.0, 2.0)));
  for (std::size_t t = 0; t < n_terms; ++t) {
    Term tm;
    tm.coef = d.uniform(-2.0, 2.0);
    const std::size_t n_factors = d.between(1, 2);
    for (std::size_t f = 0; f < n_factors; ++f) {
      const Variable v = allowed[d.index(allowed.size())];
      if (d.coin(0.25)) {
        tm.factors.push_back(step(v, d.uniform(-1.0, 1.0)));
      } else {
        tm.factors.push_back(power(v, static_cast<int>(d.between(1, 3))));
      }
    }
    g.terms.push_back(std::move(tm));
  }
  return g;
}

struct Job {
  double violation = 0.0;
  double abs_violation = 0.0;
  bool ok = true;
  bool triangle = true;
  std::string note;

  void absolute(double diff) {
    abs_violation = std::max(abs_violation, std::abs(diff));
    violation = abs_violation;
  }
  void monte_carlo(double diff, double se) {
    abs_violation = std::max(abs_violation, std::abs(diff));
    violation = std::max(violation, mc_violation(diff, se));
  }
};

SpecResult finish(std::uint64_t seed, const Job& job, double tolerance) {
  SpecResult r;
  r.seed = seed;
  r.violation = job.violation;
  r.abs_violation = job.abs_violation;
  r.triangle_ok = job.triangle;
  r.pass = job.ok && job.violation <= tolerance;
  r.note = job.note;
  return r;
}

IdentityReport single(Proposition p, double tolerance, ToleranceUnit unit, SpecResult r) {
  IdentityReport rep;
  rep.proposition = p;
  rep.n_specs = 1;
  rep.tolerance = tolerance;
  rep.unit = unit;
  rep.max_violation = r.violation;
  rep.specs.push_back(std::move(r));
  return rep;
}

Population enumerate(const DiscreteScm& s) { return enumerate_population(s); }

}  // namespace

std::string_view to_string(Proposition p) {
  switch (p) {
    case Proposition::binary_covariance: return "1";
    case Proposition::general_covariance: return "2";
    case Proposition::organic_covariance: return "3";
    case Proposition::linear_closed_form: return "4";
    case Proposition::structural_null: return "5";
    case Proposition::iv_bridge: return "6";
    case Proposition::mann_whitney: return "7";
    case Proposition::crossworld_collapse: return "collapse";
  }
  return "?";
}

Proposition proposition_from_string(std::string_view s) {
  for (auto p : {Proposition::binary_covariance, Proposition::general_covariance,
                 Proposition::organic_covariance, Proposition::linear_closed_form,
                 Proposition::structural_null, Proposition::iv_bridge, Proposition::mann_whitney,
                 Proposition::crossworld_collapse}) {
    if (to_string(p) == s) return p;
  }
  throw std::invalid_argument("unknown proposition '" + std::string(s) +
                              "' (expected 1, 2, 3, 4, 5, 6, 7 or collapse)");
}

std::size_t IdentityReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(specs.begin(), specs.end(), [](const SpecResult& r) { return !r.pass; }));
}

std::size_t IdentityReport::triangle_failures() const {
  return static_cast<std::size_t>(
      std::count_if(specs.begin(), specs.end(), [](const SpecResult& r) { return !r.triangle_ok; }));
}

DiscreteScm random_discrete_scm(std::uint64_t seed, const RandomDiscreteOptions& opt) {
  Draws d(seed);
  DiscreteScm s;
  const std::size_t k = d.between(opt.min_m, opt.max_m);
  s.m_support = integer_support(k);
  const std::size_t n_strata = d.between(1, opt.max_strata);
  const auto stratum_probs = d.simplex(n_strata);
  for (std::size_t c = 0; c < n_strata; ++c) {
    Stratum st;
    st.c = {static_cast<double>(c)};
    st.prob = stratum_probs[c];
    st.propensity = d.uniform(0.2, 0.8);
    const auto ys = outcome_support(d, opt.max_y_support);
    const std::size_t n_types = d.between(2, std::max<std::size_t>(2, opt.max_types));
    const auto type_probs = d.simplex(n_types);
    for (std::size_t t = 0; t < n_types; ++t) {
      ResponseType ty;
      ty.prob = type_probs[t];
      ty.l = {static_cast<double>(d.index(2)), static_cast<double>(d.index(2))};
      ty.m = {d.index(k), d.index(k)};
      for (int a = 0; a < 2; ++a) {
        ty.y[a].resize(k);
        for (auto& y : ty.y[a]) y = ys[d.index(ys.size())];
      }
      st.types.push_back(std::move(ty));
    }
    s.strata.push_back(std::move(st));
  }
  s.validate();
  return s;
}

DiscreteScm random_independent_scm(std::uint64_t seed, const RandomDiscreteOptions& opt) {
  Draws d(seed);
  const std::size_t k = d.between(opt.min_m, opt.max_m);
  const std::size_t n_strata = d.between(1, opt.max_strata);
  const auto stratum_probs = d.simplex(n_strata);
  std::vector<ProductStratum> strata;
  for (std::size_t c = 0; c < n_strata; ++c) {
    ProductStratum ps;
    ps.c = {static_cast<double>(c)};
    ps.prob = stratum_probs[c];
    ps.propensity = d.uniform(0.2, 0.8);
    ps.l_value = 0.0;
    const auto ys = outcome_support(d, opt.max_y_support);
    const std::size_t n_med = d.between(1, 4);
    const auto med_probs = d.simplex(n_med);
    for (std::size_t j = 0; j < n_med; ++j) {
      ps.mediators.push_back({med_probs[j], {d.index(k), d.index(k)}});
    }
    const std::size_t n_out = d.between(1, 4);
    const auto out_probs = d.simplex(n_out);
    for (std::size_t j = 0; j < n_out; ++j) {
      ProductStratum::OutcomeComponent oc{out_probs[j], {}};
      for (int a = 0; a < 2; ++a) {
        oc.y[a].resize(k);
        for (auto& y : oc.y[a]) y = ys[d.index(ys.size())];
      }
      ps.outcomes.push_back(std::move(oc));
    }
    strata.push_back(std::move(ps));
  }
  return product_scm(integer_support(k), strata);
}

ParametricScm random_linear_scm(std::uint64_t seed, LinearSlice slice) {
  Draws d(seed);
  ParametricScm s;
  for (auto& x : s.alpha) x = d.uniform(-2.0, 2.0);
  for (auto& x : s.beta) x = d.uniform(-2.0, 2.0);
  for (auto& x : s.gamma) x = d.uniform(-2.0, 2.0);
  s.m_link = MediatorLink::linear;
  s.noise.var_eps_l = d.uniform(0.25, 2.0);
  s.noise.var_eps_m = d.uniform(0.25, 2.0);
  s.noise.var_eps_y = d.uniform(0.25, 2.0);
  s.noise.cov_eps_l_eps_m = d.uniform(-0.9, 0.9) * std::sqrt(s.noise.var_eps_l * s.noise.var_eps_m);
  s.propensity = d.uniform(0.3, 0.7);
  if (slice == LinearSlice::beta3_zero) s.beta[3] = 0.0;
  if (slice == LinearSlice::gamma7_zero) s.gamma[7] = 0.0;
  s.validate();
  return s;
}

Prop5Inner random_prop5_inner(std::uint64_t seed, Prop5Kind kind) {
  Prop5Inner inner;
  inner.base = random_linear_scm(seed);
  Draws d(mix64(seed ^ 0x5bd1e995ULL));
  if (d.coin()) {
    inner.base.m_link = MediatorLink::logistic;
    inner.base.noise.cov_eps_l_eps_m = 0.0;
  }
  using V = Variable;
  if (kind == Prop5Kind::nie_null) {
    inner.g1 = random_form(d, {V::confounder, V::mediator, V::eps_y1});
    inner.g2 = random_form(d, {V::confounder, V::eps_y2});
  } else {
    inner.g1 = random_form(d, {V::treatment, V::confounder, V::eps_y1});
    inner.g2 = random_form(d, {V::mediator, V::eps_y2});
  }
  return inner;
}

DiscreteScm random_iv_scm(std::uint64_t seed, bool monotone) {
  Draws d(seed);
  for (;;) {
    const std::size_t n_types = d.between(2, 6);
    const auto probs = d.simplex(n_types);
    std::vector<IvType> types;
    double first = 0.0;
    for (std::size_t t = 0; t < n_types; ++t) {
      IvType ty{probs[t], 0, 0, {d.uniform(-2.0, 2.0), d.uniform(-2.0, 2.0)}};
      const std::size_t kind = d.index(monotone ? 3 : 4);
      ty.m0 = kind == 1 || kind == 3 ? 1 : 0;
      ty.m1 = kind == 1 || kind == 2 ? 1 : 0;
      if (t == 0) {
        ty.m0 = 0;
        ty.m1 = 1;
      }
      first += ty.prob * (ty.m1 - ty.m0);
      types.push_back(ty);
    }
    if (std::abs(first) > 0.05) return iv_scm(types);
  }
}

DiscreteScm random_outcome_pair_scm(std::uint64_t seed, std::size_t max_support) {
  Draws d(seed);
  const bool binary = d.coin(0.25);
  auto support = [&]() {
    std::vector<double> pool = binary ? std::vector<double>{0.0, 1.0} : integer_support(6);
    const std::size_t n = d.between(1, std::min(max_support, pool.size()));
    std::vector<double> out;
    while (out.size() < n) {
      const double v = pool[d.index(pool.size())];
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto t_support = support();
  const auto s_support = support();
  const auto probs = d.simplex(t_support.size() * s_support.size(), true);
  DiscreteScm s;
  s.m_support = {0.0};
  Stratum st;
  st.propensity = 0.5;
  for (std::size_t i = 0; i < t_support.size(); ++i) {
    for (std::size_t j = 0; j < s_support.size(); ++j) {
      const double p = probs[i * s_support.size() + j];
      if (p == 0.0) continue;
      st.types.push_back(ResponseType{p, {0.0, 0.0}, {0, 0},
                                      {std::vector{s_support[j]}, std::vector{t_support[i]}}});
    }
  }
  s.strata.push_back(std::move(st));
  s.validate();
  return s;
}

IdentityReport check_prop4(const ParametricScm& spec, std::size_t n_mc, std::uint64_t seed) {
  if (spec.m_link != MediatorLink::linear) {
    throw std::invalid_argument("check_prop4: closed form requires a linear mediator equation");
  }
  if (spec.constrained) throw std::invalid_argument("check_prop4: requires the linear outcome equation");
  const auto pop = sample_population(spec, n_mc, seed);
  const auto eff = compute_effects(pop, OracleMode::monte_carlo);
  const auto& g = spec.gamma;
  const auto& b = spec.beta;
  const double nie_closed = (g[6] + g[7]) * b[3] * spec.noise.var_eps_l;
  const double nde_closed = g[7] * b[2] * spec.noise.var_eps_l + g[7] * spec.noise.cov_eps_l_eps_m;
  Job job;
  job.monte_carlo(eff.gaps.nie - nie_closed, eff.gap_se.nie);
  job.monte_carlo(eff.gaps.nde - nde_closed, eff.gap_se.nde);
  job.triangle = triangle_holds(eff.gaps);
  return single(Proposition::linear_closed_form, kMcSeMultiple, ToleranceUnit::mc_se,
                finish(seed, job, kMcSeMultiple));
}

EquivalenceGap equivalence_gap(const ParametricScm& spec, Prop5Kind target, std::size_t n_mc,
                               std::uint64_t seed) {
  const auto pop = sample_population(spec, n_mc, seed);
  EquivalenceGap out;
  out.effects = compute_effects(pop, OracleMode::monte_carlo);
  const bool nie = target == Prop5Kind::nie_null;
  out.gap = nie ? out.effects.gaps.nie : out.effects.gaps.nde;
  out.se = nie ? out.effects.gap_se.nie : out.effects.gap_se.nde;

  const auto units = pop.units();
  std::vector<double> excess(units.size(), 0.0);
  parallel_for(units.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> grid;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& u = units[i];
      if (pop.discrete_mediator()) {
        grid = pop.m_support();
      } else {
        grid = {u.m[0], u.m[1], u.g[0], u.g[1], -2.0, -1.0, 0.0, 1.0, 2.0};
      }
      double worst = 0.0;
      if (nie) {
        const double ref = pop.y(u, 1, grid.front());
        for (const double m : grid) worst = std::max(worst, std::abs(pop.y(u, 1, m) - ref));
      } else {
        const double y1 = pop.y(u, 1, grid.front());
        const double y0 = pop.y(u, 0, grid.front());
        const double ref = y1 - y0;
        for (const double m : grid) {
          const double a = pop.y(u, 1, m);
          const double b = pop.y(u, 0, m);
          const double bound = 4.0 * std::numeric_limits<double>::epsilon() *
                               (std::abs(a) + std::abs(b) + std::abs(y1) + std::abs(y0));
          worst = std::max(worst, std::abs((a - b) - ref) - bound);
        }
      }
      excess[i] = std::max(0.0, worst);
    }
  });
  out.max_condition_excess = excess.empty() ? 0.0 : *std::max_element(excess.begin(), excess.end());
  out.unit_condition = out.max_condition_excess == 0.0;
  return out;
}

IdentityReport check_prop5(Prop5Kind kind, const Prop5Inner& inner, std::size_t n_mc, std::uint64_t seed) {
  const auto spec = prop5_scm(kind, inner);
  const auto eg = equivalence_gap(spec, kind, n_mc, seed);
  Job job;
  job.monte_carlo(eg.gap, eg.se);
  job.ok = eg.unit_condition;
  job.triangle = triangle_holds(eg.effects.gaps);
  job.note = std::string(kind == Prop5Kind::nie_null ? "nie-null" : "nde-null") +
             (eg.unit_condition ? "" : "; per-unit constancy violated");
  return single(Proposition::structural_null, kMcSeMultiple, ToleranceUnit::mc_se,
                finish(seed, job, kMcSeMultiple));
}

IdentityReport check_crossworld_collapse(const DiscreteScm& spec) {
  spec.validate();
  if (!spec.crossworld_independent()) {
    throw std::invalid_argument("check_crossworld_collapse: spec is not cross-world independent");
  }
  const auto eff = compute_effects(enumerate(spec), OracleMode::exact);
  Job job;
  job.absolute(eff.gaps.te);
  job.absolute(eff.gaps.nie);
  job.absolute(eff.gaps.nde);
  job.absolute(eff.gaps.nie_organic);
  job.absolute(eff.gaps.nde_organic);
  job.triangle = triangle_holds(eff.gaps);
  return single(Proposition::crossworld_collapse, kExactTolerance, ToleranceUnit::absolute,
                finish(0, job, kExactTolerance));
}

namespace {

SpecResult run_one(Proposition prop, std::uint64_t seed, std::size_t n_mc) {
  Job job;
  switch (prop) {
    case Proposition::binary_covariance: {
      RandomDiscreteOptions opt;
      opt.min_m = 2;
      opt.max_m = 2;
      opt.max_strata = 1;
      const auto pop = enumerate(random_discrete_scm(seed, opt));
      const auto eff = compute_effects(pop, OracleMode::exact);
      const auto rhs = covariance_rhs(pop, CovarianceForm::binary_randomized);
      const auto general = covariance_rhs(pop, CovarianceForm::general);
      job.absolute(eff.gaps.te - rhs.te_gap);
      job.absolute(eff.gaps.nie - rhs.nie_gap);
      job.absolute(eff.gaps.nde - rhs.nde_gap);
      job.absolute(general.nie_gap - rhs.nie_gap);
      job.triangle = triangle_holds(eff.gaps);
      break;
    }
    case Proposition::general_covariance: {
      const auto pop = enumerate(random_discrete_scm(seed));
      const auto eff = compute_effects(pop, OracleMode::exact);
      const auto rhs = covariance_rhs(pop, CovarianceForm::general);
      job.absolute(eff.gaps.te - rhs.te_gap);
      job.absolute(eff.gaps.nie - rhs.nie_gap);
      job.absolute(eff.gaps.nde - rhs.nde_gap);
      job.triangle = triangle_holds(eff.gaps);
      break;
    }
    case Proposition::organic_covariance: {
      const auto pop = enumerate(random_discrete_scm(seed));
      const auto eff = compute_effects(pop, OracleMode::exact);
      const auto rhs = covariance_rhs(pop, CovarianceForm::organic);
      job.absolute(eff.gaps.nie_organic - rhs.nie_gap);
      job.absolute(eff.gaps.nde_organic - rhs.nde_gap);
      job.triangle = triangle_holds(eff.gaps);
      break;
    }
    case Proposition::linear_closed_form: {
      const auto slice = static_cast<LinearSlice>(seed % 3);
      return check_prop4(random_linear_scm(seed, slice), n_mc, seed).specs.front();
    }
    case Proposition::structural_null: {
      auto nie = check_prop5(Prop5Kind::nie_null, random_prop5_inner(seed, Prop5Kind::nie_null), n_mc, seed)
                     .specs.front();
      const auto nde =
          check_prop5(Prop5Kind::nde_null, random_prop5_inner(seed, Prop5Kind::nde_null), n_mc, seed)
              .specs.front();
      nie.violation = std::max(nie.violation, nde.violation);
      nie.abs_violation = std::max(nie.abs_violation, nde.abs_violation);
      nie.pass = nie.pass && nde.pass;
      nie.triangle_ok = nie.triangle_ok && nde.triangle_ok;
      nie.note = nie.note + ", " + nde.note;
      return nie;
    }
    case Proposition::iv_bridge: {
      const bool monotone = seed % 2 == 0;
      const auto pop = enumerate(random_iv_scm(seed, monotone));
      const auto iv = iv_oracle(pop);
      const auto eff = compute_effects(pop, OracleMode::exact);
      job.absolute(iv.wald - iv.ate - eff.gaps.nie / iv.first_stage);
      job.absolute(iv.wald - iv.ate - iv.selection_cov / iv.first_stage);
      job.absolute(eff.gaps.nie - eff.gaps.te);
      if (iv.monotonic) job.absolute(iv.wald - iv.late);
      job.note = iv.monotonic ? "monotone" : "defiers present";
      job.triangle = triangle_holds(eff.gaps);
      break;
    }
    case Proposition::mann_whitney: {
      const auto pop = enumerate(random_outcome_pair_scm(seed));
      const auto mw = mw_oracle(pop);
      const auto eff = compute_effects(pop, OracleMode::exact);
      job.absolute(mw.gap - mw.cov_sum);
      if (mw.binary_cov) job.absolute(mw.gap - *mw.binary_cov);
      if ((mw.natural - 0.5) * (mw.ria - 0.5) < 0.0) job.note = "sign reversal around 1/2";
      job.triangle = triangle_holds(eff.gaps);
      break;
    }
    case Proposition::crossworld_collapse: {
      auto r = check_crossworld_collapse(random_independent_scm(seed)).specs.front();
      r.seed = seed;
      return r;
    }
  }
  return finish(seed, job, kExactTolerance);
}

bool monte_carlo(Proposition p) {
  return p == Proposition::linear_closed_form || p == Proposition::structural_null;
}

}  // namespace

IdentityReport run_identity_suite(Proposition prop, std::size_t n_specs, std::uint64_t base_seed,
                                  std::size_t n_mc) {
  IdentityReport rep;
  rep.proposition = prop;
  rep.n_specs = n_specs;
  rep.unit = monte_carlo(prop) ? ToleranceUnit::mc_se : ToleranceUnit::absolute;
  rep.tolerance = monte_carlo(prop) ? kMcSeMultiple : kExactTolerance;
  rep.specs.resize(n_specs);
  if (monte_carlo(prop)) {
    // Sampling parallelizes internally.
    for (std::size_t i = 0; i < n_specs; ++i) rep.specs[i] = run_one(prop, base_seed + i, n_mc);
  } else {
    parallel_for(
        n_specs,
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) rep.specs[i] = run_one(prop, base_seed + i, n_mc);
        },
        1);
  }
  for (const auto& r : rep.specs) rep.max_violation = std::max(rep.max_violation, r.violation);
  return rep;
}

}  // namespace riagap
