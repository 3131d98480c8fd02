#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace riagap {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kRidge = 1e-8;
inline constexpr double kIrlsTolerance = 1e-8;
inline constexpr int kIrlsMaxIter = 100;

struct LinearFit {
  Eigen::VectorXd coef;
  bool ridge = false;  // fallback used on a singular Gram matrix
};

/// Least squares through the normal equations; falls back to a 1e-8 ridge
/// when X'X is numerically singular.
LinearFit fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

struct LogisticFit {
  Eigen::VectorXd coef;
  int iterations = 0;
  bool ridge = false;
};

/// Logistic regression by IRLS. Stops when the largest coefficient step is
/// below 1e-8; throws FitError after 100 iterations without convergence or
/// on a non-binary target.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace riagap
