#include "riagap/dgp.hpp"

namespace riagap {

namespace {

std::vector<BinaryStructuralModel::StratumSpec> binary_c_strata() {
  return {{{0.0}, 0.5, 0.4}, {{1.0}, 0.5, 0.6}};
}

}  // namespace

DiscreteScm collapse_dgp() {
  BinaryStructuralModel m;
  m.strata = binary_c_strata();
  m.p_l = [](const std::vector<double>&, int) { return 0.0; };
  m.p_m = [](const std::vector<double>& c, int a, int) { return expit(-0.3 + 0.8 * a + 0.5 * c[0]); };
  m.y_mean = [](const std::vector<double>& c, int a, int, int mm) {
    return 0.5 * c[0] + a + mm + 0.5 * a * mm;
  };
  m.outcome_noise_sd = 1.0;
  return binary_structural_scm(m);
}

DiscreteScm level_dgp() {
  BinaryStructuralModel m;
  m.strata = binary_c_strata();
  m.p_l = [](const std::vector<double>& c, int a) { return expit(-0.5 + a + 0.5 * c[0]); };
  m.p_m = [](const std::vector<double>& c, int a, int l) { return expit(-0.8 + 0.5 * a + 0.3 * c[0] + 1.5 * l); };
  m.y_mean = [](const std::vector<double>& c, int a, int, int mm) {
    return 0.5 * c[0] + a + mm + 0.5 * a * mm;
  };
  m.outcome_noise_sd = 1.0;
  return binary_structural_scm(m);
}

DiscreteScm divergent_dgp(double b, double kappa) {
  BinaryStructuralModel m;
  m.strata = binary_c_strata();
  m.p_l = [](const std::vector<double>& c, int a) { return expit(-0.5 + a + 0.5 * c[0]); };
  m.p_m = [b](const std::vector<double>& c, int a, int l) {
    return expit(-0.5 + 0.5 * a + 0.3 * c[0] + b * a * l);
  };
  m.y_mean = [kappa](const std::vector<double>& c, int a, int l, int mm) {
    return 0.5 * c[0] + a + l + mm + kappa * l * mm;
  };
  m.outcome_noise_sd = 1.0;
  return binary_structural_scm(m);
}

}  // namespace riagap
