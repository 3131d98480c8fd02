#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riagap/dataset.hpp"

namespace riagap {

using CVec = std::vector<double>;

inline constexpr double kDefaultTrim = 0.01;

/// Fitted nuisance functions on one training fold. The std::function members
/// return raw fitted values; the accessor methods apply the trimming bound.
struct NuisanceFit {
  std::function<double(const CVec&)> pi;                        // P(A=1 | c)
  std::function<double(const CVec&, int a)> pm;                 // P(M=1 | c, a)
  std::function<double(const CVec&, int a, int l)> pm_l;        // P(M=1 | c, a, l)
  std::function<double(const CVec&, int a)> pl;                 // P(L=1 | c, a)
  std::function<double(const CVec&, int a, int l, int m)> mu;   // E(Y | c, a, l, m)
  std::function<double(const CVec&, int a)> ey;                 // E(Y | c, a)
  /// L takes a single value in the training data; f(l | c, a) is then a
  /// point mass and is not trimmed.
  bool l_point_mass = false;
  double trim = kDefaultTrim;

  double clamp(double p) const;
  double f_a(const CVec& c, int a) const;
  double f_m(const CVec& c, int a, int m) const;
  double f_m_l(const CVec& c, int a, int l, int m) const;
  double f_l(const CVec& c, int a, int l) const;
  /// sum_l sum_m mu(c,a,l,m) f(m | c,a) f(l | c,a)
  double xi(const CVec& c, int a) const;
  /// True when any probability used for this row was moved by trimming.
  bool trimmed(const ObservedRow& row) const;
};

enum class Learner {
  parametric,  // logistic / OLS with interactions ("default")
  saturated,   // cell means on exact covariate values
};

std::string_view to_string(Learner l);
Learner learner_from_string(std::string_view s);

/// Fits every nuisance on the given rows of `data`.
NuisanceFit fit_nuisance(const Dataset& data, std::span<const std::size_t> rows, Learner learner,
                         double trim = kDefaultTrim);

}  // namespace riagap
