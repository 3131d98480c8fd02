#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "riagap/scm.hpp"

namespace riagap {

/// One unit's cross-world potentials. Discrete models resolve outcomes
/// through (stratum, type); parametric models evaluate the outcome equation
/// at any mediator value with the unit's own noise.
struct UnitPotentials {
  std::uint32_t stratum = 0;
  std::uint32_t type = 0;
  std::array<double, 2> l{0.0, 0.0};
  std::array<double, 2> m{0.0, 0.0};
  std::array<std::uint32_t, 2> m_index{0, 0};
  /// Independent draws G_0, G_1 from the laws of M_0, M_1 (parametric only).
  std::array<double, 2> g{0.0, 0.0};
  /// eps_L, eps_M, eps_Y1, eps_Y2. Discrete models use eps_Y1 as outcome noise.
  std::array<double, 4> noise{0.0, 0.0, 0.0, 0.0};
};

struct ObservedRow {
  std::vector<double> c;
  int a = 0;
  double l = 0.0;
  double m = 0.0;
  double y = 0.0;
};

/// A finite population treated by the oracle as the full population: either
/// an exact enumeration of a discrete model (weighted types) or an i.i.d.
/// sample with equal weights.
class Population {
 public:
  Population(std::shared_ptr<const Scm> spec, std::vector<UnitPotentials> units,
             std::vector<double> weights, bool exact);

  const Scm& spec() const { return *spec_; }
  std::span<const UnitPotentials> units() const { return units_; }
  std::size_t size() const { return units_.size(); }
  double weight(std::size_t i) const { return weights_.empty() ? uniform_weight_ : weights_[i]; }
  bool exact() const { return exact_; }

  /// Finite mediator support: always for discrete models, {0, 1} for the logistic link.
  bool discrete_mediator() const { return !m_support_.empty(); }
  const std::vector<double>& m_support() const { return m_support_; }
  std::size_t n_strata() const { return n_strata_; }
  double stratum_propensity(std::size_t s) const;
  std::vector<double> stratum_c(std::size_t s) const;

  double y(const UnitPotentials& u, int a, double m) const;
  /// Y_{a, m_support[k]}; requires discrete_mediator().
  double y_at(const UnitPotentials& u, int a, std::size_t k) const;
  double y_factual(const UnitPotentials& u, int a) const { return y(u, a, u.m[a]); }

 private:
  std::shared_ptr<const Scm> spec_;
  std::vector<UnitPotentials> units_;
  std::vector<double> weights_;
  double uniform_weight_ = 0.0;
  bool exact_ = false;
  std::vector<double> m_support_;
  std::size_t n_strata_ = 1;
};

/// n i.i.d. units; unit i draws only from the (seed, i) substream.
Population sample_population(const Scm& spec, std::size_t n, std::uint64_t seed);

/// Exact weighted enumeration: one unit per (stratum, response type).
Population enumerate_population(const DiscreteScm& spec);

/// Factual rows: A ~ Bernoulli(propensity(c)), then (l, m, y) = (L_A, M_A, Y_{A, M_A}).
/// Row i realizes unit i.
std::vector<ObservedRow> observe(const Population& pop, std::uint64_t seed);

}  // namespace riagap
