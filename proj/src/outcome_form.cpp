#include "riagap/outcome_form.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace riagap {

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::treatment: return "A";
    case Variable::confounder: return "L";
    case Variable::mediator: return "M";
    case Variable::eps_l: return "eps_L";
    case Variable::eps_m: return "eps_M";
    case Variable::eps_y1: return "eps_Y1";
    case Variable::eps_y2: return "eps_Y2";
  }
  return "?";
}

Variable variable_from_string(std::string_view name) {
  for (const Variable v : {Variable::treatment, Variable::confounder, Variable::mediator,
                           Variable::eps_l, Variable::eps_m, Variable::eps_y1, Variable::eps_y2}) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown outcome variable '" + std::string(name) + "'");
}

double Factor::eval(double x) const {
  switch (kind) {
    case FactorKind::power: {
      double r = 1.0;
      for (int i = 0; i < static_cast<int>(param); ++i) r *= x;
      return r;
    }
    case FactorKind::step: return x > param ? 1.0 : 0.0;
  }
  return 0.0;
}

double OutcomeInputs::get(Variable v) const {
  switch (v) {
    case Variable::treatment: return a;
    case Variable::confounder: return l;
    case Variable::mediator: return m;
    case Variable::eps_l: return eps_l;
    case Variable::eps_m: return eps_m;
    case Variable::eps_y1: return eps_y1;
    case Variable::eps_y2: return eps_y2;
  }
  return 0.0;
}

bool Term::uses(Variable v) const {
  if (coef == 0.0) return false;
  for (const auto& f : factors) {
    if (f.var == v) return true;
  }
  return false;
}

double Term::eval(const OutcomeInputs& in) const {
  double r = coef;
  for (const auto& f : factors) r *= f.eval(in.get(f.var));
  return r;
}

bool OutcomeForm::uses(Variable v) const {
  for (const auto& t : terms) {
    if (t.uses(v)) return true;
  }
  return false;
}

double OutcomeForm::eval(const OutcomeInputs& in) const {
  double r = 0.0;
  for (const auto& t : terms) r += t.eval(in);
  return r;
}

std::string OutcomeForm::describe() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) os << " + ";
    os << terms[i].coef;
    for (const auto& f : terms[i].factors) {
      os << "*";
      if (f.kind == FactorKind::power) {
        os << to_string(f.var);
        if (f.param != 1.0) os << "^" << f.param;
      } else {
        os << "1(" << to_string(f.var) << ">" << f.param << ")";
      }
    }
  }
  return os.str();
}

Factor power(Variable v, int k) {
  if (k < 1) throw std::invalid_argument("power factor exponent must be >= 1");
  return Factor{v, FactorKind::power, static_cast<double>(k)};
}

Factor step(Variable v, double threshold) { return Factor{v, FactorKind::step, threshold}; }

Term term(double coef, std::initializer_list<Factor> factors) { return Term{coef, factors}; }

}  // namespace riagap
