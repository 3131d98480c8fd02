#include "riagap/population.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riagap/parallel.hpp"
#include "riagap/random.hpp"

namespace riagap {

namespace {

std::size_t draw_index(UnitStream& rng, const std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulate(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = (acc += p[i]);
  return c;
}

void draw_parametric(const ParametricScm& s, UnitStream& rng, UnitPotentials& u) {
  const auto& nz = s.noise;
  const double sd_l = std::sqrt(nz.var_eps_l);
  const double sd_m = std::sqrt(nz.var_eps_m);
  const double sd_y = std::sqrt(nz.var_eps_y);

  auto mediator_noise = [&](double z1, double& eps_l, double& eps_m) {
    eps_l = sd_l * z1;
    if (s.m_link == MediatorLink::logistic) {
      eps_m = rng.uniform();
    } else if (sd_l > 0.0) {
      const double slope = nz.cov_eps_l_eps_m / nz.var_eps_l;
      const double resid = std::max(0.0, nz.var_eps_m - slope * nz.cov_eps_l_eps_m);
      eps_m = slope * eps_l + std::sqrt(resid) * rng.normal();
    } else {
      eps_m = sd_m * rng.normal();
    }
  };

  double eps_l = 0.0;
  double eps_m = 0.0;
  mediator_noise(rng.normal(), eps_l, eps_m);
  u.noise = {eps_l, eps_m, sd_y * rng.normal(), sd_y * rng.normal()};
  for (int a = 0; a < 2; ++a) {
    u.l[a] = s.l_value(a, eps_l);
    u.m[a] = s.m_value(a, u.l[a], eps_m);
    u.m_index[a] = static_cast<std::uint32_t>(u.m[a] > 0.5 && s.m_link == MediatorLink::logistic);
  }
  double ghost_l = 0.0;
  double ghost_m = 0.0;
  mediator_noise(rng.normal(), ghost_l, ghost_m);
  for (int a = 0; a < 2; ++a) u.g[a] = s.m_value(a, s.l_value(a, ghost_l), ghost_m);
}

}  // namespace

Population::Population(std::shared_ptr<const Scm> spec, std::vector<UnitPotentials> units,
                       std::vector<double> weights, bool exact)
    : spec_(std::move(spec)), units_(std::move(units)), weights_(std::move(weights)), exact_(exact) {
  if (!weights_.empty() && weights_.size() != units_.size()) {
    throw std::invalid_argument("population weights must match the unit count");
  }
  if (!units_.empty()) uniform_weight_ = 1.0 / static_cast<double>(units_.size());
  if (const auto* d = std::get_if<DiscreteScm>(spec_.get())) {
    m_support_ = d->m_support;
    n_strata_ = d->strata.size();
  } else {
    const auto& p = std::get<ParametricScm>(*spec_);
    if (p.m_link == MediatorLink::logistic) m_support_ = {0.0, 1.0};
  }
}

double Population::stratum_propensity(std::size_t s) const {
  if (const auto* d = std::get_if<DiscreteScm>(spec_.get())) return d->strata.at(s).propensity;
  return std::get<ParametricScm>(*spec_).propensity;
}

std::vector<double> Population::stratum_c(std::size_t s) const {
  if (const auto* d = std::get_if<DiscreteScm>(spec_.get())) return d->strata.at(s).c;
  return {};
}

double Population::y(const UnitPotentials& u, int a, double m) const {
  if (const auto* d = std::get_if<DiscreteScm>(spec_.get())) {
    const auto it = std::find(d->m_support.begin(), d->m_support.end(), m);
    if (it == d->m_support.end()) throw std::invalid_argument("mediator value outside m_support");
    return y_at(u, a, static_cast<std::size_t>(it - d->m_support.begin()));
  }
  const auto& p = std::get<ParametricScm>(*spec_);
  OutcomeInputs in;
  in.a = a;
  in.l = u.l[a];
  in.m = m;
  in.eps_l = u.noise[0];
  in.eps_m = u.noise[1];
  in.eps_y1 = u.noise[2];
  in.eps_y2 = u.noise[3];
  return p.y_value(in);
}

double Population::y_at(const UnitPotentials& u, int a, std::size_t k) const {
  if (const auto* d = std::get_if<DiscreteScm>(spec_.get())) {
    return d->strata[u.stratum].types[u.type].y[a][k] + u.noise[2];
  }
  if (m_support_.empty()) throw std::logic_error("y_at requires a finite mediator support");
  return y(u, a, m_support_.at(k));
}

Population sample_population(const Scm& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_population: n must be >= 1");
  validate(spec);
  auto shared = std::make_shared<const Scm>(spec);
  std::vector<UnitPotentials> units(n);

  if (const auto* d = std::get_if<DiscreteScm>(&spec)) {
    std::vector<double> strata_p;
    std::vector<std::vector<double>> type_cum;
    for (const auto& st : d->strata) {
      strata_p.push_back(st.prob);
      std::vector<double> tp;
      for (const auto& ty : st.types) tp.push_back(ty.prob);
      type_cum.push_back(cumulate(tp));
    }
    const auto strata_cum = cumulate(strata_p);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        UnitStream rng(seed, StreamTag::potentials, i);
        auto& u = units[i];
        u.stratum = static_cast<std::uint32_t>(draw_index(rng, strata_cum));
        u.type = static_cast<std::uint32_t>(draw_index(rng, type_cum[u.stratum]));
        const auto& ty = d->strata[u.stratum].types[u.type];
        for (int a = 0; a < 2; ++a) {
          u.l[a] = ty.l[a];
          u.m_index[a] = static_cast<std::uint32_t>(ty.m[a]);
          u.m[a] = d->m_support[ty.m[a]];
        }
        const double z = rng.normal();
        u.noise[2] = d->outcome_noise_sd * z;
      }
    });
  } else {
    const auto& p = std::get<ParametricScm>(spec);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        UnitStream rng(seed, StreamTag::potentials, i);
        draw_parametric(p, rng, units[i]);
      }
    });
  }
  return Population(std::move(shared), std::move(units), {}, false);
}

Population enumerate_population(const DiscreteScm& spec) {
  spec.validate();
  std::vector<UnitPotentials> units;
  std::vector<double> weights;
  for (std::size_t s = 0; s < spec.strata.size(); ++s) {
    const auto& st = spec.strata[s];
    for (std::size_t t = 0; t < st.types.size(); ++t) {
      const auto& ty = st.types[t];
      UnitPotentials u;
      u.stratum = static_cast<std::uint32_t>(s);
      u.type = static_cast<std::uint32_t>(t);
      for (int a = 0; a < 2; ++a) {
        u.l[a] = ty.l[a];
        u.m_index[a] = static_cast<std::uint32_t>(ty.m[a]);
        u.m[a] = spec.m_support[ty.m[a]];
      }
      units.push_back(u);
      weights.push_back(st.prob * ty.prob);
    }
  }
  return Population(std::make_shared<const Scm>(spec), std::move(units), std::move(weights), true);
}

std::vector<ObservedRow> observe(const Population& pop, std::uint64_t seed) {
  std::vector<ObservedRow> rows(pop.size());
  const auto units = pop.units();
  parallel_for(pop.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      UnitStream rng(seed, StreamTag::assignment, i);
      const auto& u = units[i];
      auto& r = rows[i];
      r.a = rng.uniform() < pop.stratum_propensity(u.stratum) ? 1 : 0;
      r.c = pop.stratum_c(u.stratum);
      r.l = u.l[r.a];
      r.m = u.m[r.a];
      r.y = pop.y_factual(u, r.a);
    }
  });
  return rows;
}

}  // namespace riagap
