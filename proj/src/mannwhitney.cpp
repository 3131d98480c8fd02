#include "riagap/mannwhitney.hpp"

#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "riagap/summation.hpp"

namespace riagap {

MwEffectSet mw_oracle(const Population& pop) {
  if (pop.size() == 0) throw std::invalid_argument("mw_oracle: empty support");
  std::map<double, double> p1;
  std::map<double, double> p0;
  std::map<std::pair<double, double>, double> joint;
  std::vector<double> natural(pop.size());
  const auto units = pop.units();
  for (std::size_t i = 0; i < units.size(); ++i) {
    const double w = pop.weight(i);
    const double y1 = pop.y_factual(units[i], 1);
    const double y0 = pop.y_factual(units[i], 0);
    p1[y1] += w;
    p0[y0] += w;
    joint[{y1, y0}] += w;
    natural[i] = y1 >= y0 ? w : 0.0;
  }
  if (p1.size() * p0.size() > kMaxSupportCells) {
    throw std::domain_error("mw_oracle: outcome support too large for exact tabulation");
  }

  std::vector<double> ria_terms;
  std::vector<double> cov_terms;
  ria_terms.reserve(p1.size() * p0.size());
  cov_terms.reserve(p1.size() * p0.size());
  for (const auto& [t, wt] : p1) {
    for (const auto& [s, ws] : p0) {
      if (!(t >= s)) continue;
      const auto it = joint.find({t, s});
      const double pts = it == joint.end() ? 0.0 : it->second;
      ria_terms.push_back(wt * ws);
      cov_terms.push_back(pts - wt * ws);
    }
  }

  MwEffectSet out;
  out.natural = pairwise_sum(natural);
  out.ria = pairwise_sum(ria_terms);
  out.gap = out.natural - out.ria;
  out.cov_sum = pairwise_sum(cov_terms);

  auto binary = [](const std::map<double, double>& p) {
    for (const auto& [v, w] : p) {
      if (v != 0.0 && v != 1.0) return false;
    }
    return true;
  };
  if (binary(p1) && binary(p0)) {
    std::vector<double> prod(pop.size()), e1(pop.size()), e0(pop.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
      const double w = pop.weight(i);
      const double y1 = pop.y_factual(units[i], 1);
      const double y0 = pop.y_factual(units[i], 0);
      prod[i] = w * y1 * y0;
      e1[i] = w * y1;
      e0[i] = w * y0;
    }
    out.binary_cov = pairwise_sum(prod) - pairwise_sum(e1) * pairwise_sum(e0);
  }
  return out;
}

}  // namespace riagap
