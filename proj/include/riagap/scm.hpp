#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "riagap/outcome_form.hpp"

namespace riagap {

/// Rejected model specification. field() names the offending field.
class SpecError : public std::invalid_argument {
 public:
  SpecError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class MediatorLink { linear, logistic };

struct NoiseSpec {
  double var_eps_l = 1.0;
  double var_eps_m = 1.0;
  double cov_eps_l_eps_m = 0.0;  // only meaningful with a linear mediator link
  double var_eps_y = 1.0;
};

enum class Prop5Kind {
  nie_null,  // Y = (1-A) g1(L, M, eps) + A g2(L, eps)
  nde_null,  // Y = g1(A, L, eps) + g2(M, eps)
};

struct ConstrainedOutcome {
  Prop5Kind kind = Prop5Kind::nde_null;
  OutcomeForm g1;
  OutcomeForm g2;
};

/// Randomized-treatment structural model with scalar L and M:
///   L = a0 + a1 A + eL
///   M = b0 + b1 A + b2 L + b3 AL + eM             (linear link)
///   M = 1(U < expit(b0 + b1 A + b2 L + b3 AL))    (logistic link, U uniform)
///   Y = g0 + g1 A + g2 L + g3 M + g4 AL + g5 AM + g6 LM + g7 ALM + eY
/// A set `constrained` outcome replaces the Y equation.
struct ParametricScm {
  std::array<double, 2> alpha{0.0, 0.0};
  std::array<double, 4> beta{0.0, 0.0, 0.0, 0.0};
  std::array<double, 8> gamma{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  MediatorLink m_link = MediatorLink::linear;
  NoiseSpec noise;
  double propensity = 0.5;
  std::optional<ConstrainedOutcome> constrained;

  void validate() const;

  double l_value(int a, double eps_l) const;
  double m_index(int a, double l) const;
  /// eps_m is the additive noise (linear) or the unit's uniform draw (logistic).
  double m_value(int a, double l, double eps_m) const;
  double y_value(const OutcomeInputs& in) const;

  /// True when eY is independent of (eL, eM), which gives mediator
  /// ignorability given (C, A, L).
  bool estimand_identified() const;
};

struct ResponseType {
  double prob = 0.0;                      // P(type | stratum)
  std::array<double, 2> l{0.0, 0.0};      // L_0, L_1
  std::array<std::size_t, 2> m{0, 0};     // indices into m_support: M_0, M_1
  std::array<std::vector<double>, 2> y;   // y[a][k] = Y_{a, m_support[k]}
};

struct Stratum {
  std::vector<double> c;
  double prob = 1.0;
  double propensity = 0.5;  // P(A = 1 | C = c)
  std::vector<ResponseType> types;
};

/// Finite model given as a distribution over complete response types, which
/// encodes the full cross-world joint law of (L_a, M_a, Y_{a,m}).
/// Observed outcomes add N(0, outcome_noise_sd^2) noise shared across worlds.
struct DiscreteScm {
  std::vector<double> m_support;
  std::vector<Stratum> strata;
  double outcome_noise_sd = 0.0;

  void validate() const;
  std::size_t c_dim() const { return strata.empty() ? 0 : strata.front().c.size(); }

  /// Y_{a,m} independent of M_a given (C, L_a), checked by enumeration.
  bool estimand_identified() const;
  /// Y_{a,m} independent of M_{a'} given C for all a, a', m, checked by enumeration.
  bool crossworld_independent() const;
};

using Scm = std::variant<ParametricScm, DiscreteScm>;

void validate(const Scm& spec);
bool estimand_identified(const Scm& spec);

double expit(double x);

/// L ~ N(A, 1); M ~ Bernoulli(expit(A + L + bAL)); Y ~ N(A + L + M + LM, 1); P(A=1) = 1/2.
ParametricScm fig1_dgp(double b);

struct Prop5Inner {
  ParametricScm base;  // supplies the L and M equations and noise
  OutcomeForm g1;
  OutcomeForm g2;
};

/// Builds an outcome equation satisfying the equivalence condition for
/// `kind`; throws SpecError when g1/g2 read a forbidden variable.
ParametricScm prop5_scm(Prop5Kind kind, const Prop5Inner& inner);

/// Two equiprobable types: (M1-M0 = 1, Y11-Y10 = 0) and (M1-M0 = 0, Y11-Y10 = 1).
DiscreteScm miles_scm();

/// Binary L and M generated by threshold crossings of per-unit uniforms
/// shared across worlds; Y_{a,m} = y_mean(c, a, L_a, m) + noise.
struct BinaryStructuralModel {
  struct StratumSpec {
    std::vector<double> c;
    double prob = 1.0;
    double propensity = 0.5;
  };
  std::vector<StratumSpec> strata;
  std::function<double(const std::vector<double>& c, int a)> p_l;
  std::function<double(const std::vector<double>& c, int a, int l)> p_m;
  std::function<double(const std::vector<double>& c, int a, int l, int m)> y_mean;
  double outcome_noise_sd = 1.0;
};

DiscreteScm binary_structural_scm(const BinaryStructuralModel& model);

/// Cross-world independent model: within each stratum, mediator components
/// (M_0, M_1) and outcome components (Y tables) are paired as a product law.
struct ProductStratum {
  std::vector<double> c;
  double prob = 1.0;
  double propensity = 0.5;
  double l_value = 0.0;
  struct MediatorComponent {
    double prob;
    std::array<std::size_t, 2> m;
  };
  struct OutcomeComponent {
    double prob;
    std::array<std::vector<double>, 2> y;
  };
  std::vector<MediatorComponent> mediators;
  std::vector<OutcomeComponent> outcomes;
};

DiscreteScm product_scm(std::vector<double> m_support, const std::vector<ProductStratum>& strata);

/// Binary instrument A, binary treatment M, outcome depending on m only.
struct IvType {
  double prob;
  int m0;
  int m1;
  std::array<double, 2> y;  // Y_{M=0}, Y_{M=1}
};
DiscreteScm iv_scm(const std::vector<IvType>& types);

}  // namespace riagap
