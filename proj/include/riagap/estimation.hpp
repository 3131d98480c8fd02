#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "riagap/dataset.hpp"
#include "riagap/nuisance.hpp"
#include "riagap/scm.hpp"

namespace riagap {

/// Mean over rows of ey(c_i, a).
double gcomp_ey_a(const NuisanceFit& fit, const Dataset& data, int a);
/// Mean over rows of xi(c_i, a).
double gcomp_ey_aga(const NuisanceFit& fit, const Dataset& data, int a);

/// 1(A=a)/P(A=a|C) [Y - E(Y|C,a)] + E(Y|C,a).
double eif_phi(const ObservedRow& row, const NuisanceFit& fit, int a);
/// The bracket of the influence function of E(Y_{a,G_a}), scaled by
/// 1(A=a)/P(A=a|C): weighted residual plus the M- and L-marginalized terms.
/// Zero when A != a.
double eif_psi(const ObservedRow& row, const NuisanceFit& fit, int a);
/// eif_psi + xi(C, a); its mean estimates E(Y_{a,G_a}).
double eif_psi_full(const ObservedRow& row, const NuisanceFit& fit, int a);

struct DmlOptions {
  std::size_t folds = 2;
  Learner learner = Learner::parametric;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  double trim = kDefaultTrim;
};

inline constexpr double kTrimWarnRate = 0.05;
/// se (relative to the TE influence scale) at or below which inference is degenerate.
inline constexpr double kDegenerateScale = 1e-10;

struct EstimateReport {
  double psi_hat = 0.0;  // TE - TE^R
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double z_stat = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  std::size_t n = 0;
  std::size_t folds = 0;  // 1 for the in-sample fit
  std::uint64_t seed = 0;
  Learner learner = Learner::parametric;
  std::vector<std::size_t> fold_sizes;
  double te_hat = 0.0;
  double te_se = 0.0;
  double te_r_hat = 0.0;
  double te_r_se = 0.0;
  double lower_bound = 0.0;  // |psi_hat|, a lower bound on |NIE - NIE^R| + |NDE - NDE^R|
  bool reject = false;
  std::string verdict;
  std::size_t trimmed_rows = 0;
  double trim_rate = 0.0;
  std::vector<std::string> warnings;
  std::vector<double> eif;  // centered, in input row order
};

/// Fold index of every row. Depends on (seed, row content) only, so the
/// assignment travels with the row under any reordering of the table.
std::vector<std::size_t> assign_folds(const Dataset& data, std::size_t folds, std::uint64_t seed);

/// Cross-fitted test of H0: TE - TE^R = 0. Throws std::invalid_argument for
/// folds < 2 and std::domain_error when a fold lacks an (a, l, m) cell.
EstimateReport dml_test(const Dataset& data, const DmlOptions& opt);

/// Single-fold variant: nuisances fitted and evaluated on all rows.
EstimateReport estimate_in_sample(const Dataset& data, Learner learner, double alpha = 0.05,
                                  double trim = kDefaultTrim);

/// Observed sample of size n from a model with binary L and M that satisfies
/// mediator ignorability; refuses specs that do not.
Dataset simulate_dataset(const Scm& spec, std::size_t n, std::uint64_t seed);

}  // namespace riagap
