#include "riagap/nuisance.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "riagap/format.hpp"
#include "riagap/regression.hpp"

namespace riagap {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

using Features = std::function<void(const CVec& c, int a, int l, int m, std::vector<double>& out)>;

void base_features(const CVec& c, std::vector<double>& out) {
  out.push_back(1.0);
  for (const double v : c) out.push_back(v);
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) out.push_back(c[i] * c[j]);
  }
}

void pi_features(const CVec& c, int, int, int, std::vector<double>& out) { base_features(c, out); }

void arm_features(const CVec& c, int a, int, int, std::vector<double>& out) {
  base_features(c, out);
  out.push_back(a);
  for (const double v : c) out.push_back(v * a);
}

void arm_l_features(const CVec& c, int a, int l, int, std::vector<double>& out) {
  base_features(c, out);
  out.push_back(a);
  out.push_back(l);
  for (const double v : c) out.push_back(v * a);
  for (const double v : c) out.push_back(v * l);
  out.push_back(a * l);
}

void mu_features(const CVec& c, int a, int l, int m, std::vector<double>& out) {
  out.push_back(1.0);
  for (const double v : c) out.push_back(v);
  out.push_back(a);
  out.push_back(l);
  out.push_back(m);
  out.push_back(a * m);
  out.push_back(l * m);
  out.push_back(a * l);
  out.push_back(a * l * m);
}

void ey_features(const CVec& c, int, int, int, std::vector<double>& out) {
  out.push_back(1.0);
  for (const double v : c) out.push_back(v);
}

// Linear index model on a feature map, with training-constant columns dropped.
struct IndexModel {
  Features features;
  std::vector<std::size_t> keep;
  Eigen::VectorXd coef;
  bool logistic = false;

  double predict(const CVec& c, int a, int l, int m) const {
    std::vector<double> f;
    features(c, a, l, m, f);
    double eta = 0.0;
    for (std::size_t j = 0; j < keep.size(); ++j) eta += coef[static_cast<Eigen::Index>(j)] * f[keep[j]];
    return logistic ? riagap::logistic(eta) : eta;
  }
};

std::shared_ptr<IndexModel> fit_index(const Dataset& data, std::span<const std::size_t> rows, Features feats,
                                      bool is_logistic, const std::function<double(const ObservedRow&)>& target,
                                      const std::string& name) {
  if (rows.empty()) throw FitError(name + ": no training rows");
  std::vector<std::vector<double>> design(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = data.rows[rows[i]];
    feats(r.c, r.a, static_cast<int>(r.l), static_cast<int>(r.m), design[i]);
  }
  const std::size_t p = design.front().size();
  auto model = std::make_shared<IndexModel>();
  model->features = std::move(feats);
  model->logistic = is_logistic;
  for (std::size_t j = 0; j < p; ++j) {
    bool constant = true;
    for (std::size_t i = 1; i < rows.size() && constant; ++i) constant = design[i][j] == design[0][j];
    if (j == 0 || !constant) model->keep.push_back(j);
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(model->keep.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < model->keep.size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = design[i][model->keep[j]];
    }
    y[static_cast<Eigen::Index>(i)] = target(data.rows[rows[i]]);
  }
  try {
    model->coef = is_logistic ? fit_logistic(x, y).coef : fit_linear(x, y).coef;
  } catch (const FitError& e) {
    throw FitError(name + ": " + e.what());
  }
  return model;
}

std::string describe_cell(const CVec& c, std::initializer_list<std::pair<const char*, int>> extra) {
  std::ostringstream ss;
  ss << "c=(";
  for (std::size_t j = 0; j < c.size(); ++j) ss << (j ? "," : "") << format_double(c[j]);
  ss << ")";
  for (const auto& [k, v] : extra) ss << ", " << k << "=" << v;
  return ss.str();
}

// Cell means keyed by (c, a, l, m); unused slots hold -1.
class CellMeans {
 public:
  using Key = std::tuple<CVec, int, int, int>;
  void add(Key k, double v) {
    auto& [sum, n] = cells_[std::move(k)];
    sum += v;
    n += 1.0;
  }
  double at(const Key& k, const std::string& name) const {
    const auto it = cells_.find(k);
    if (it == cells_.end()) {
      const auto& [c, a, l, m] = k;
      throw FitError(name + ": no training rows in cell " +
                     describe_cell(c, {{"a", a}, {"l", l}, {"m", m}}));
    }
    return it->second.first / it->second.second;
  }

 private:
  std::map<Key, std::pair<double, double>> cells_;
};

NuisanceFit fit_parametric(const Dataset& data, std::span<const std::size_t> rows, bool l_point) {
  NuisanceFit fit;
  auto pi = fit_index(data, rows, pi_features, true, [](const ObservedRow& r) { return r.a; }, "pi");
  auto pm = fit_index(data, rows, arm_features, true, [](const ObservedRow& r) { return r.m; }, "pm");
  auto pm_l = fit_index(data, rows, arm_l_features, true, [](const ObservedRow& r) { return r.m; }, "pm_l");
  auto mu = fit_index(data, rows, mu_features, false, [](const ObservedRow& r) { return r.y; }, "mu");
  fit.pi = [pi](const CVec& c) { return pi->predict(c, 0, 0, 0); };
  fit.pm = [pm](const CVec& c, int a) { return pm->predict(c, a, 0, 0); };
  fit.pm_l = [pm_l](const CVec& c, int a, int l) { return pm_l->predict(c, a, l, 0); };
  fit.mu = [mu](const CVec& c, int a, int l, int m) { return mu->predict(c, a, l, m); };
  if (l_point) {
    const double l0 = data.rows[rows.front()].l;
    fit.pl = [l0](const CVec&, int) { return l0; };
  } else {
    auto pl = fit_index(data, rows, arm_features, true, [](const ObservedRow& r) { return r.l; }, "pl");
    fit.pl = [pl](const CVec& c, int a) { return pl->predict(c, a, 0, 0); };
  }
  std::array<std::shared_ptr<IndexModel>, 2> ey;
  for (int a = 0; a < 2; ++a) {
    std::vector<std::size_t> arm;
    for (const auto i : rows) {
      if (data.rows[i].a == a) arm.push_back(i);
    }
    ey[a] = fit_index(data, arm, ey_features, false, [](const ObservedRow& r) { return r.y; },
                      "ey(a=" + std::to_string(a) + ")");
  }
  fit.ey = [ey](const CVec& c, int a) { return ey[a]->predict(c, a, 0, 0); };
  return fit;
}

NuisanceFit fit_saturated(const Dataset& data, std::span<const std::size_t> rows) {
  auto pi = std::make_shared<CellMeans>();
  auto pm = std::make_shared<CellMeans>();
  auto pm_l = std::make_shared<CellMeans>();
  auto pl = std::make_shared<CellMeans>();
  auto mu = std::make_shared<CellMeans>();
  auto ey = std::make_shared<CellMeans>();
  for (const auto i : rows) {
    const auto& r = data.rows[i];
    const int l = static_cast<int>(r.l);
    const int m = static_cast<int>(r.m);
    pi->add({r.c, -1, -1, -1}, r.a);
    pm->add({r.c, r.a, -1, -1}, r.m);
    pm_l->add({r.c, r.a, l, -1}, r.m);
    pl->add({r.c, r.a, -1, -1}, r.l);
    mu->add({r.c, r.a, l, m}, r.y);
    ey->add({r.c, r.a, -1, -1}, r.y);
  }
  NuisanceFit fit;
  fit.pi = [pi](const CVec& c) { return pi->at({c, -1, -1, -1}, "pi"); };
  fit.pm = [pm](const CVec& c, int a) { return pm->at({c, a, -1, -1}, "pm"); };
  fit.pm_l = [pm_l](const CVec& c, int a, int l) { return pm_l->at({c, a, l, -1}, "pm_l"); };
  fit.pl = [pl](const CVec& c, int a) { return pl->at({c, a, -1, -1}, "pl"); };
  fit.mu = [mu](const CVec& c, int a, int l, int m) { return mu->at({c, a, l, m}, "mu"); };
  fit.ey = [ey](const CVec& c, int a) { return ey->at({c, a, -1, -1}, "ey"); };
  return fit;
}

}  // namespace

double NuisanceFit::clamp(double p) const { return std::clamp(p, trim, 1.0 - trim); }

double NuisanceFit::f_a(const CVec& c, int a) const {
  const double p = clamp(pi(c));
  return a == 1 ? p : 1.0 - p;
}

double NuisanceFit::f_m(const CVec& c, int a, int m) const {
  const double p = clamp(pm(c, a));
  return m == 1 ? p : 1.0 - p;
}

double NuisanceFit::f_m_l(const CVec& c, int a, int l, int m) const {
  const double p = clamp(pm_l(c, a, l));
  return m == 1 ? p : 1.0 - p;
}

double NuisanceFit::f_l(const CVec& c, int a, int l) const {
  const double raw = pl(c, a);
  const double p = l_point_mass ? raw : clamp(raw);
  return l == 1 ? p : 1.0 - p;
}

double NuisanceFit::xi(const CVec& c, int a) const {
  double total = 0.0;
  for (int l = 0; l < 2; ++l) {
    const double wl = f_l(c, a, l);
    if (wl == 0.0) continue;
    for (int m = 0; m < 2; ++m) total += mu(c, a, l, m) * f_m(c, a, m) * wl;
  }
  return total;
}

bool NuisanceFit::trimmed(const ObservedRow& row) const {
  auto moved = [this](double p) { return p < trim || p > 1.0 - trim; };
  if (moved(pi(row.c))) return true;
  const int l = static_cast<int>(row.l);
  for (int a = 0; a < 2; ++a) {
    if (moved(pm(row.c, a)) || moved(pm_l(row.c, a, l))) return true;
    if (!l_point_mass && moved(pl(row.c, a))) return true;
  }
  return false;
}

std::string_view to_string(Learner l) {
  return l == Learner::parametric ? "default" : "saturated";
}

Learner learner_from_string(std::string_view s) {
  if (s == "default" || s == "parametric") return Learner::parametric;
  if (s == "saturated") return Learner::saturated;
  throw std::invalid_argument("unknown learner set '" + std::string(s) + "' (expected default or saturated)");
}

NuisanceFit fit_nuisance(const Dataset& data, std::span<const std::size_t> rows, Learner learner, double trim) {
  if (!(trim >= 0.0 && trim < 0.5)) throw std::invalid_argument("trim must lie in [0, 0.5)");
  if (rows.empty()) throw FitError("fit_nuisance: empty training set");
  bool l_point = true;
  for (const auto i : rows) l_point = l_point && data.rows[i].l == data.rows[rows.front()].l;
  NuisanceFit fit = learner == Learner::parametric ? fit_parametric(data, rows, l_point)
                                                   : fit_saturated(data, rows);
  fit.l_point_mass = l_point;
  fit.trim = trim;
  return fit;
}

}  // namespace riagap
