#include "riagap/estimation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "riagap/format.hpp"
#include "riagap/parallel.hpp"
#include "riagap/population.hpp"
#include "riagap/random.hpp"
#include "riagap/summation.hpp"

namespace riagap {

namespace {

struct RowValues {
  double phi1 = 0.0;
  double phi0 = 0.0;
  double psi1 = 0.0;
  double psi0 = 0.0;
  bool trimmed = false;
};

std::uint64_t row_key(const ObservedRow& r) {
  std::uint64_t h = mix64(0x243f6a8885a308d3ULL ^ r.c.size());
  auto absorb = [&h](double v) { h = mix64(h ^ std::bit_cast<std::uint64_t>(v + 0.0)); };
  for (const double c : r.c) absorb(c);
  absorb(r.a);
  absorb(r.l);
  absorb(r.m);
  absorb(r.y);
  return h;
}

bool row_less(const ObservedRow& x, const ObservedRow& y) {
  if (x.c != y.c) return x.c < y.c;
  return std::tie(x.a, x.l, x.m, x.y) < std::tie(y.a, y.l, y.m, y.y);
}

std::vector<std::size_t> canonical_order(const Dataset& data) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return row_less(data.rows[i], data.rows[j]); });
  return order;
}

double ordered_mean(const std::vector<double>& v, const std::vector<std::size_t>& order) {
  std::vector<double> sorted(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = v[order[i]];
  return mean_of(sorted);
}

RowValues evaluate(const NuisanceFit& fit, const ObservedRow& r) {
  RowValues v;
  v.phi1 = eif_phi(r, fit, 1);
  v.phi0 = eif_phi(r, fit, 0);
  v.psi1 = eif_psi_full(r, fit, 1);
  v.psi0 = eif_psi_full(r, fit, 0);
  v.trimmed = fit.trimmed(r);
  return v;
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

EstimateReport summarize(const Dataset& data, const std::vector<RowValues>& vals, double alpha) {
  const auto order = canonical_order(data);
  const std::size_t n = data.size();
  std::vector<double> d(n), te(n), ter(n);
  std::size_t trimmed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = vals[i].phi1 - vals[i].phi0 - vals[i].psi1 + vals[i].psi0;
    te[i] = vals[i].phi1 - vals[i].phi0;
    ter[i] = vals[i].psi1 - vals[i].psi0;
    trimmed += vals[i].trimmed ? 1 : 0;
  }
  EstimateReport rep;
  rep.n = n;
  rep.alpha = alpha;
  rep.psi_hat = ordered_mean(d, order);
  rep.te_hat = ordered_mean(te, order);
  rep.te_r_hat = ordered_mean(ter, order);

  auto se_of = [&](const std::vector<double>& x, double centre, std::vector<double>* keep) {
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double e = x[i] - centre;
      if (keep) (*keep)[i] = e;
      sq[i] = e * e;
    }
    return std::sqrt(ordered_mean(sq, order) / static_cast<double>(n));
  };
  rep.eif.resize(n);
  rep.se = se_of(d, rep.psi_hat, &rep.eif);
  rep.te_se = se_of(te, rep.te_hat, nullptr);
  rep.te_r_se = se_of(ter, rep.te_r_hat, nullptr);

  const boost::math::normal_distribution<double> normal;
  const double zq = boost::math::quantile(normal, 1.0 - alpha / 2.0);
  rep.ci_low = rep.psi_hat - zq * rep.se;
  rep.ci_high = rep.psi_hat + zq * rep.se;
  const double scale = 1.0 + rep.te_se * std::sqrt(static_cast<double>(n));
  const bool degenerate = rep.se <= kDegenerateScale * scale;
  if (!degenerate) {
    rep.z_stat = rep.psi_hat / rep.se;
    rep.p_value = 2.0 * boost::math::cdf(boost::math::complement(normal, std::abs(rep.z_stat)));
  } else {
    rep.z_stat = 0.0;
    rep.p_value = std::abs(rep.psi_hat) <= kDegenerateScale * scale ? 1.0 : 0.0;
  }
  rep.p_value = std::min(1.0, rep.p_value);
  rep.reject = rep.p_value < alpha;
  rep.lower_bound = std::abs(rep.psi_hat);

  std::ostringstream verdict;
  verdict << (rep.reject ? "reject" : "do not reject") << " H0: TE - TE^R = 0 at alpha = " << format_double(alpha)
          << " (p = " << format_double(rep.p_value) << "); ";
  if (rep.reject) {
    verdict << "natural effects and their randomized interventional analogues differ "
               "(NIE != NIE^R or NDE != NDE^R)";
  } else {
    verdict << "no evidence that natural effects differ from their randomized interventional analogues";
  }
  rep.verdict = verdict.str();

  rep.trimmed_rows = trimmed;
  rep.trim_rate = static_cast<double>(trimmed) / static_cast<double>(n);
  if (rep.trim_rate > kTrimWarnRate) {
    rep.warnings.push_back("probability trimming affected " + format_double(100.0 * rep.trim_rate) +
                           "% of rows (more than 5%); overlap is poor and inference may be unreliable");
  }
  if (degenerate) {
    rep.warnings.push_back("influence values are numerically constant; the Wald test is degenerate here");
  }
  return rep;
}

}  // namespace

double gcomp_ey_a(const NuisanceFit& fit, const Dataset& data, int a) {
  std::vector<double> v(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) v[i] = fit.ey(data.rows[i].c, a);
  return mean_of(v);
}

double gcomp_ey_aga(const NuisanceFit& fit, const Dataset& data, int a) {
  std::vector<double> v(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) v[i] = fit.xi(data.rows[i].c, a);
  return mean_of(v);
}

double eif_phi(const ObservedRow& row, const NuisanceFit& fit, int a) {
  const double ey = fit.ey(row.c, a);
  if (row.a != a) return ey;
  return (row.y - ey) / fit.f_a(row.c, a) + ey;
}

double eif_psi(const ObservedRow& row, const NuisanceFit& fit, int a) {
  if (row.a != a) return 0.0;
  const auto& c = row.c;
  const int l = static_cast<int>(row.l);
  const int m = static_cast<int>(row.m);
  const double xi = fit.xi(c, a);
  const double ratio = fit.f_m(c, a, m) / fit.f_m_l(c, a, l, m);
  const double residual = ratio * (row.y - fit.mu(c, a, l, m));
  double m_term = 0.0;
  for (int mm = 0; mm < 2; ++mm) m_term += fit.mu(c, a, l, mm) * fit.f_m(c, a, mm);
  double l_term = 0.0;
  for (int ll = 0; ll < 2; ++ll) {
    const double w = fit.f_l(c, a, ll);
    if (w != 0.0) l_term += fit.mu(c, a, ll, m) * w;
  }
  return (residual + (m_term - xi) + (l_term - xi)) / fit.f_a(c, a);
}

double eif_psi_full(const ObservedRow& row, const NuisanceFit& fit, int a) {
  return eif_psi(row, fit, a) + fit.xi(row.c, a);
}

std::vector<std::size_t> assign_folds(const Dataset& data, std::size_t folds, std::uint64_t seed) {
  if (folds == 0) throw std::invalid_argument("folds must be at least 1");
  const std::uint64_t salt = mix64(seed ^ (static_cast<std::uint64_t>(StreamTag::folds) << 56));
  std::vector<std::size_t> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = static_cast<std::size_t>(mix64(salt ^ row_key(data.rows[i])) % folds);
  }
  return out;
}

EstimateReport dml_test(const Dataset& data, const DmlOptions& opt) {
  validate_dataset(data);
  require_alpha(opt.alpha);
  if (opt.folds < 2) throw std::invalid_argument("dml_test: folds must be at least 2");
  const auto fold = assign_folds(data, opt.folds, opt.seed);

  std::vector<std::vector<std::size_t>> members(opt.folds);
  for (std::size_t i = 0; i < data.size(); ++i) members[fold[i]].push_back(i);
  std::set<double> l_values;
  for (const auto& r : data.rows) l_values.insert(r.l);
  for (std::size_t k = 0; k < opt.folds; ++k) {
    std::set<std::tuple<int, double, double>> seen;
    for (const auto i : members[k]) seen.insert({data.rows[i].a, data.rows[i].l, data.rows[i].m});
    for (int a = 0; a < 2; ++a) {
      for (const double l : l_values) {
        for (const double m : {0.0, 1.0}) {
          if (!seen.count({a, l, m})) {
            throw std::domain_error("fold " + std::to_string(k + 1) + " has no rows with (a=" +
                                    std::to_string(a) + ", l=" + format_double(l) + ", m=" +
                                    format_double(m) + "); every cell must appear in every fold");
          }
        }
      }
    }
  }

  const auto order = canonical_order(data);
  std::vector<NuisanceFit> fits(opt.folds);
  parallel_for(
      opt.folds,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          std::vector<std::size_t> train;
          train.reserve(data.size() - members[k].size());
          for (const auto i : order) {
            if (fold[i] != k) train.push_back(i);
          }
          fits[k] = fit_nuisance(data, train, opt.learner, opt.trim);
        }
      },
      1);

  std::vector<RowValues> vals(data.size());
  parallel_for(data.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) vals[i] = evaluate(fits[fold[i]], data.rows[i]);
  });

  auto rep = summarize(data, vals, opt.alpha);
  rep.folds = opt.folds;
  rep.seed = opt.seed;
  rep.learner = opt.learner;
  for (const auto& m : members) rep.fold_sizes.push_back(m.size());
  return rep;
}

EstimateReport estimate_in_sample(const Dataset& data, Learner learner, double alpha, double trim) {
  validate_dataset(data);
  require_alpha(alpha);
  const auto fit = fit_nuisance(data, canonical_order(data), learner, trim);
  std::vector<RowValues> vals(data.size());
  parallel_for(data.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) vals[i] = evaluate(fit, data.rows[i]);
  });
  auto rep = summarize(data, vals, alpha);
  rep.folds = 1;
  rep.learner = learner;
  rep.fold_sizes = {data.size()};
  return rep;
}

Dataset simulate_dataset(const Scm& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  if (!estimand_identified(spec)) {
    throw std::invalid_argument(
        "spec is not flagged estimand_identified (outcome noise is not independent of the L and M "
        "noise); estimation refuses it");
  }
  const auto pop = sample_population(spec, n, seed);
  auto data = make_dataset(observe(pop, seed));
  try {
    validate_dataset(data);
  } catch (const SchemaError& e) {
    throw std::invalid_argument(std::string("simulated data unusable for estimation: ") + e.what());
  }
  return data;
}

}  // namespace riagap
