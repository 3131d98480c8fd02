#include "riagap/regression.hpp"

#include <cmath>
#include <string>

namespace riagap {

namespace {

Eigen::VectorXd solve_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& rhs, bool& ridge) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
  const bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
                  ldlt.vectorD().minCoeff() > 1e-12 * scale;
  if (ok) {
    ridge = false;
    return ldlt.solve(rhs);
  }
  ridge = true;
  Eigen::MatrixXd reg = gram;
  reg.diagonal().array() += kRidge * scale;
  return reg.ldlt().solve(rhs);
}

}  // namespace

LinearFit fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("fit_linear: row count mismatch");
  if (x.rows() == 0) throw FitError("fit_linear: no rows");
  LinearFit fit;
  fit.coef = solve_gram(x.transpose() * x, x.transpose() * y, fit.ridge);
  if (!fit.coef.allFinite()) throw FitError("fit_linear: non-finite coefficients");
  return fit;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw std::invalid_argument("fit_logistic: row count mismatch");
  if (x.rows() == 0) throw FitError("fit_logistic: no rows");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw FitError("fit_logistic: target must be binary");
  }
  LogisticFit fit;
  fit.coef = Eigen::VectorXd::Zero(x.cols());
  for (int it = 1; it <= kIrlsMaxIter; ++it) {
    const Eigen::ArrayXd eta = (x * fit.coef).array();
    const Eigen::ArrayXd p = 1.0 / (1.0 + (-eta).exp());
    const Eigen::ArrayXd w = (p * (1.0 - p)).max(1e-12);
    const Eigen::MatrixXd gram = x.transpose() * (x.array().colwise() * w).matrix();
    const Eigen::VectorXd score = x.transpose() * (y.array() - p).matrix();
    bool ridge = false;
    const Eigen::VectorXd step = solve_gram(gram, score, ridge);
    fit.ridge = fit.ridge || ridge;
    if (!step.allFinite()) throw FitError("fit_logistic: non-finite IRLS step");
    fit.coef += step;
    fit.iterations = it;
    if (step.cwiseAbs().maxCoeff() < kIrlsTolerance) return fit;
  }
  throw FitError("fit_logistic: IRLS did not converge in " + std::to_string(kIrlsMaxIter) +
                 " iterations (separation?)");
}

}  // namespace riagap
