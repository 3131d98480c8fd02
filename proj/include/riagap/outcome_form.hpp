#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace riagap {

/// Inputs an outcome equation may read. The noise inputs are the unit's own
/// draws, shared across all interventions on that unit.
enum class Variable { treatment, confounder, mediator, eps_l, eps_m, eps_y1, eps_y2 };

std::string_view to_string(Variable v);
Variable variable_from_string(std::string_view name);

enum class FactorKind {
  power,  // x^k, k a positive integer
  step,   // 1(x > t)
};

struct Factor {
  Variable var;
  FactorKind kind = FactorKind::power;
  double param = 1.0;

  double eval(double x) const;
};

struct OutcomeInputs {
  double a = 0.0;
  double l = 0.0;
  double m = 0.0;
  double eps_l = 0.0;
  double eps_m = 0.0;
  double eps_y1 = 0.0;
  double eps_y2 = 0.0;

  double get(Variable v) const;
};

struct Term {
  double coef = 0.0;
  std::vector<Factor> factors;

  bool uses(Variable v) const;
  double eval(const OutcomeInputs& in) const;
};

/// Sum of coefficient-times-product terms: the library of nonlinear forms
/// (polynomials, products, thresholds) used for constrained outcome equations.
struct OutcomeForm {
  std::vector<Term> terms;

  bool uses(Variable v) const;
  double eval(const OutcomeInputs& in) const;
  std::string describe() const;

  bool operator==(const OutcomeForm&) const = default;
};

inline bool operator==(const Factor& x, const Factor& y) {
  return x.var == y.var && x.kind == y.kind && x.param == y.param;
}
inline bool operator==(const Term& x, const Term& y) {
  return x.coef == y.coef && x.factors == y.factors;
}

Factor power(Variable v, int k = 1);
Factor step(Variable v, double threshold);
Term term(double coef, std::initializer_list<Factor> factors = {});

}  // namespace riagap
