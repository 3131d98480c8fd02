#include "riagap/scm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

namespace riagap {

namespace {

constexpr double kProbTol = 1e-9;
constexpr double kIndepTol = 1e-12;

void require_finite(const std::string& field, double v) {
  if (!std::isfinite(v)) throw SpecError(field, "must be finite");
}

template <std::size_t N>
void require_finite(const std::string& field, const std::array<double, N>& xs) {
  for (std::size_t i = 0; i < N; ++i) require_finite(field + "[" + std::to_string(i) + "]", xs[i]);
}

void require_open_unit(const std::string& field, double p) {
  if (!(p > 0.0 && p < 1.0)) throw SpecError(field, "must lie strictly inside (0, 1)");
}

void forbid(const OutcomeForm& g, Variable v, const std::string& field, const std::string& why) {
  if (g.uses(v)) {
    throw SpecError(field, "must not depend on " + std::string(to_string(v)) + " (" + why + ")");
  }
}

// Weighted pairs (x, y); true when the empirical joint law factorizes.
bool independent(const std::vector<std::pair<double, std::pair<double, double>>>& rows) {
  double total = 0.0;
  std::map<double, double> px;
  std::map<double, double> py;
  std::map<std::pair<double, double>, double> pxy;
  for (const auto& [w, xy] : rows) {
    total += w;
    px[xy.first] += w;
    py[xy.second] += w;
    pxy[xy] += w;
  }
  if (total <= 0.0) return true;
  for (const auto& [x, wx] : px) {
    for (const auto& [y, wy] : py) {
      const auto it = pxy.find({x, y});
      const double joint = it == pxy.end() ? 0.0 : it->second;
      if (std::abs(joint / total - (wx / total) * (wy / total)) > kIndepTol) return false;
    }
  }
  return true;
}

void split_unit_interval(std::vector<double> cuts, const std::function<void(double, double)>& cell) {
  cuts.push_back(0.0);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (hi > lo) cell(0.5 * (lo + hi), hi - lo);
  }
}

}  // namespace

double expit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void ParametricScm::validate() const {
  require_finite("alpha", alpha);
  require_finite("beta", beta);
  require_finite("gamma", gamma);
  require_finite("noise.var_eps_l", noise.var_eps_l);
  require_finite("noise.var_eps_m", noise.var_eps_m);
  require_finite("noise.cov_eps_l_eps_m", noise.cov_eps_l_eps_m);
  require_finite("noise.var_eps_y", noise.var_eps_y);
  if (noise.var_eps_l < 0) throw SpecError("noise.var_eps_l", "variance must be nonnegative");
  if (noise.var_eps_m < 0) throw SpecError("noise.var_eps_m", "variance must be nonnegative");
  if (noise.var_eps_y < 0) throw SpecError("noise.var_eps_y", "variance must be nonnegative");
  if (std::abs(noise.cov_eps_l_eps_m) > std::sqrt(noise.var_eps_l * noise.var_eps_m) + 1e-12) {
    throw SpecError("noise.cov_eps_l_eps_m", "|cov| exceeds sqrt(var_eps_l * var_eps_m)");
  }
  if (m_link == MediatorLink::logistic && noise.cov_eps_l_eps_m != 0.0) {
    throw SpecError("noise.cov_eps_l_eps_m", "must be 0 with the logistic mediator link");
  }
  require_open_unit("propensity", propensity);
  if (constrained) {
    const auto& g = *constrained;
    if (g.kind == Prop5Kind::nde_null) {
      forbid(g.g1, Variable::mediator, "outcome.g1", "not additively separable");
      forbid(g.g2, Variable::treatment, "outcome.g2", "not additively separable");
      forbid(g.g2, Variable::confounder, "outcome.g2", "not additively separable");
    } else {
      forbid(g.g1, Variable::treatment, "outcome.g1", "treatment enters only through (1-A)");
      forbid(g.g2, Variable::treatment, "outcome.g2", "treatment enters only through A");
      forbid(g.g2, Variable::mediator, "outcome.g2", "no mediator effect under A=1");
    }
  }
}

double ParametricScm::l_value(int a, double eps_l) const { return alpha[0] + alpha[1] * a + eps_l; }

double ParametricScm::m_index(int a, double l) const {
  return beta[0] + beta[1] * a + beta[2] * l + beta[3] * a * l;
}

double ParametricScm::m_value(int a, double l, double eps_m) const {
  const double idx = m_index(a, l);
  if (m_link == MediatorLink::linear) return idx + eps_m;
  return eps_m < expit(idx) ? 1.0 : 0.0;
}

double ParametricScm::y_value(const OutcomeInputs& in) const {
  if (constrained) {
    const auto& g = *constrained;
    if (g.kind == Prop5Kind::nde_null) return g.g1.eval(in) + g.g2.eval(in);
    return (1.0 - in.a) * g.g1.eval(in) + in.a * g.g2.eval(in);
  }
  const double a = in.a;
  const double l = in.l;
  const double m = in.m;
  return gamma[0] + gamma[1] * a + gamma[2] * l + gamma[3] * m + gamma[4] * a * l +
         gamma[5] * a * m + gamma[6] * l * m + gamma[7] * a * l * m + in.eps_y1;
}

bool ParametricScm::estimand_identified() const {
  if (!constrained) return true;
  for (const auto* g : {&constrained->g1, &constrained->g2}) {
    if (g->uses(Variable::eps_l) || g->uses(Variable::eps_m)) return false;
  }
  return true;
}

void DiscreteScm::validate() const {
  if (m_support.empty()) throw SpecError("m_support", "must be nonempty");
  for (const double v : m_support) require_finite("m_support", v);
  if (std::set<double>(m_support.begin(), m_support.end()).size() != m_support.size()) {
    throw SpecError("m_support", "values must be distinct");
  }
  if (strata.empty()) throw SpecError("strata", "must be nonempty");
  if (!(outcome_noise_sd >= 0.0) || !std::isfinite(outcome_noise_sd)) {
    throw SpecError("outcome_noise_sd", "must be finite and nonnegative");
  }
  const std::size_t k = m_support.size();
  const std::size_t dim = strata.front().c.size();
  double total = 0.0;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const auto& st = strata[s];
    const std::string sf = "strata[" + std::to_string(s) + "]";
    if (st.c.size() != dim) throw SpecError(sf + ".c", "all strata need the same C dimension");
    for (const double v : st.c) require_finite(sf + ".c", v);
    if (!(st.prob >= 0.0)) throw SpecError(sf + ".prob", "must be nonnegative");
    require_open_unit(sf + ".propensity", st.propensity);
    if (st.types.empty()) throw SpecError(sf + ".types", "must be nonempty");
    total += st.prob;
    double tp = 0.0;
    for (std::size_t t = 0; t < st.types.size(); ++t) {
      const auto& ty = st.types[t];
      const std::string tf = sf + ".types[" + std::to_string(t) + "]";
      if (!(ty.prob >= 0.0)) throw SpecError(tf + ".prob", "must be nonnegative");
      tp += ty.prob;
      require_finite(tf + ".l", ty.l);
      for (int a = 0; a < 2; ++a) {
        if (ty.m[a] >= k) throw SpecError(tf + ".m", "mediator value outside m_support");
        if (ty.y[a].size() != k) {
          throw SpecError(tf + ".y", "each arm needs one outcome per m_support value");
        }
        for (const double v : ty.y[a]) require_finite(tf + ".y", v);
      }
    }
    if (std::abs(tp - 1.0) > kProbTol) throw SpecError(sf + ".types", "probabilities must sum to 1");
  }
  if (std::abs(total - 1.0) > kProbTol) throw SpecError("strata", "probabilities must sum to 1");
}

bool DiscreteScm::estimand_identified() const {
  for (const auto& st : strata) {
    for (int a = 0; a < 2; ++a) {
      std::map<double, std::vector<const ResponseType*>> by_l;
      for (const auto& ty : st.types) by_l[ty.l[a]].push_back(&ty);
      for (const auto& [l, group] : by_l) {
        for (std::size_t k = 0; k < m_support.size(); ++k) {
          std::vector<std::pair<double, std::pair<double, double>>> rows;
          for (const auto* ty : group) {
            rows.push_back({ty->prob, {static_cast<double>(ty->m[a]), ty->y[a][k]}});
          }
          if (!independent(rows)) return false;
        }
      }
    }
  }
  return true;
}

bool DiscreteScm::crossworld_independent() const {
  for (const auto& st : strata) {
    for (int am = 0; am < 2; ++am) {
      for (int ay = 0; ay < 2; ++ay) {
        for (std::size_t k = 0; k < m_support.size(); ++k) {
          std::vector<std::pair<double, std::pair<double, double>>> rows;
          for (const auto& ty : st.types) {
            rows.push_back({ty.prob, {static_cast<double>(ty.m[am]), ty.y[ay][k]}});
          }
          if (!independent(rows)) return false;
        }
      }
    }
  }
  return true;
}

void validate(const Scm& spec) {
  std::visit([](const auto& s) { s.validate(); }, spec);
}

bool estimand_identified(const Scm& spec) {
  return std::visit([](const auto& s) { return s.estimand_identified(); }, spec);
}

ParametricScm fig1_dgp(double b) {
  ParametricScm s;
  s.alpha = {0.0, 1.0};
  s.beta = {0.0, 1.0, 1.0, b};
  s.gamma = {0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0};
  s.m_link = MediatorLink::logistic;
  s.noise = NoiseSpec{1.0, 0.0, 0.0, 1.0};
  s.propensity = 0.5;
  return s;
}

ParametricScm prop5_scm(Prop5Kind kind, const Prop5Inner& inner) {
  ParametricScm s = inner.base;
  s.gamma = {};
  s.constrained = ConstrainedOutcome{kind, inner.g1, inner.g2};
  s.validate();
  return s;
}

DiscreteScm miles_scm() {
  DiscreteScm s;
  s.m_support = {0.0, 1.0};
  Stratum st;
  st.propensity = 0.5;
  // M moves, Y does not respond to M.
  st.types.push_back(ResponseType{0.5, {0.0, 0.0}, {0, 1}, {std::vector{0.0, 0.0}, std::vector{0.0, 0.0}}});
  // M fixed, Y responds to M.
  st.types.push_back(ResponseType{0.5, {0.0, 0.0}, {0, 0}, {std::vector{0.0, 1.0}, std::vector{0.0, 1.0}}});
  s.strata.push_back(std::move(st));
  return s;
}

DiscreteScm binary_structural_scm(const BinaryStructuralModel& model) {
  DiscreteScm s;
  s.m_support = {0.0, 1.0};
  s.outcome_noise_sd = model.outcome_noise_sd;
  for (const auto& spec : model.strata) {
    Stratum st;
    st.c = spec.c;
    st.prob = spec.prob;
    st.propensity = spec.propensity;
    const double pl0 = model.p_l(spec.c, 0);
    const double pl1 = model.p_l(spec.c, 1);
    split_unit_interval({pl0, pl1}, [&](double ul, double wl) {
      const std::array<int, 2> l{ul < pl0 ? 1 : 0, ul < pl1 ? 1 : 0};
      const double pm0 = model.p_m(spec.c, 0, l[0]);
      const double pm1 = model.p_m(spec.c, 1, l[1]);
      split_unit_interval({pm0, pm1}, [&](double um, double wm) {
        ResponseType ty;
        ty.prob = wl * wm;
        ty.l = {static_cast<double>(l[0]), static_cast<double>(l[1])};
        ty.m = {um < pm0 ? 1u : 0u, um < pm1 ? 1u : 0u};
        for (int a = 0; a < 2; ++a) {
          ty.y[a] = {model.y_mean(spec.c, a, l[a], 0), model.y_mean(spec.c, a, l[a], 1)};
        }
        st.types.push_back(std::move(ty));
      });
    });
    s.strata.push_back(std::move(st));
  }
  s.validate();
  return s;
}

DiscreteScm product_scm(std::vector<double> m_support, const std::vector<ProductStratum>& strata) {
  DiscreteScm s;
  s.m_support = std::move(m_support);
  for (const auto& ps : strata) {
    Stratum st;
    st.c = ps.c;
    st.prob = ps.prob;
    st.propensity = ps.propensity;
    for (const auto& mc : ps.mediators) {
      for (const auto& oc : ps.outcomes) {
        st.types.push_back(ResponseType{mc.prob * oc.prob, {ps.l_value, ps.l_value}, mc.m, oc.y});
      }
    }
    s.strata.push_back(std::move(st));
  }
  s.validate();
  return s;
}

DiscreteScm iv_scm(const std::vector<IvType>& types) {
  DiscreteScm s;
  s.m_support = {0.0, 1.0};
  Stratum st;
  st.propensity = 0.5;
  for (const auto& t : types) {
    if ((t.m0 != 0 && t.m0 != 1) || (t.m1 != 0 && t.m1 != 1)) {
      throw SpecError("types.m", "IV treatment must be binary");
    }
    const std::vector<double> y{t.y[0], t.y[1]};
    st.types.push_back(ResponseType{t.prob,
                                    {0.0, 0.0},
                                    {static_cast<std::size_t>(t.m0), static_cast<std::size_t>(t.m1)},
                                    {y, y}});
  }
  s.strata.push_back(std::move(st));
  s.validate();
  return s;
}

}  // namespace riagap
