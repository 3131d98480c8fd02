#include "riagap/iv.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "riagap/summation.hpp"

namespace riagap {

bool respects_exclusion(const Population& pop) {
  if (!pop.discrete_mediator()) return false;
  for (const auto& u : pop.units()) {
    for (std::size_t k = 0; k < pop.m_support().size(); ++k) {
      if (pop.y_at(u, 0, k) != pop.y_at(u, 1, k)) return false;
    }
  }
  return true;
}

IvEffectSet iv_oracle(const Population& pop) {
  if (pop.size() == 0) throw std::invalid_argument("iv_oracle: empty population");
  if (pop.m_support() != std::vector<double>{0.0, 1.0}) {
    throw std::domain_error("iv_oracle: treatment M must be binary with support {0, 1}");
  }
  if (pop.n_strata() != 1) throw std::domain_error("iv_oracle: instrument must be randomized (no C strata)");
  if (!respects_exclusion(pop)) throw std::domain_error("iv_oracle: exclusion restriction violated");

  const auto units = pop.units();
  const std::size_t n = units.size();
  std::vector<double> first(n), effect(n), complier(n), complier_effect(n), reduced(n), product(n);
  bool monotonic = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = units[i];
    const double w = pop.weight(i);
    const double dm = u.m[1] - u.m[0];
    const double dy = pop.y_at(u, 1, 1) - pop.y_at(u, 1, 0);
    const bool is_complier = u.m[1] == 1.0 && u.m[0] == 0.0;
    if (u.m[1] == 0.0 && u.m[0] == 1.0 && w > 0.0) monotonic = false;
    first[i] = w * dm;
    effect[i] = w * dy;
    complier[i] = is_complier ? w : 0.0;
    complier_effect[i] = is_complier ? w * dy : 0.0;
    reduced[i] = w * (pop.y_factual(u, 1) - pop.y_factual(u, 0));
    product[i] = w * dm * dy;
  }

  IvEffectSet out;
  out.first_stage = pairwise_sum(first);
  if (std::abs(out.first_stage) < 1e-15) {
    throw std::domain_error("iv_oracle: relevance violated (E(M_1 - M_0) = 0)");
  }
  out.ate = pairwise_sum(effect);
  out.complier_share = pairwise_sum(complier);
  out.late = out.complier_share > 0.0 ? pairwise_sum(complier_effect) / out.complier_share
                                      : std::numeric_limits<double>::quiet_NaN();
  out.wald = pairwise_sum(reduced) / out.first_stage;
  out.selection_cov = pairwise_sum(product) - out.first_stage * out.ate;
  out.monotonic = monotonic;
  return out;
}

}  // namespace riagap
