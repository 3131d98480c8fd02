#include "riagap/sweep.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "riagap/format.hpp"
#include "riagap/population.hpp"
#include "riagap/scm.hpp"

namespace riagap {

namespace {

double parse_real(const std::string& s) {
  double v = 0.0;
  const auto* first = s.data();
  if (!s.empty() && *first == '+') ++first;
  const auto [p, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("b-grid: cannot parse '" + s + "' as a number");
  }
  return v;
}

bool beyond(double v, double se) { return std::abs(v) > 4.0 * se; }

}  // namespace

void SweepConfig::validate() const {
  if (b_grid.empty()) throw std::invalid_argument("b-grid must be nonempty");
  for (std::size_t i = 0; i < b_grid.size(); ++i) {
    if (!std::isfinite(b_grid[i])) throw std::invalid_argument("b-grid values must be finite");
    if (i > 0 && !(b_grid[i] > b_grid[i - 1])) {
      throw std::invalid_argument("b-grid must be strictly increasing");
    }
  }
  if (n_mc == 0) throw std::invalid_argument("n-mc must be at least 1");
}

SweepResult sweep_fig1(const SweepConfig& config) {
  config.validate();
  SweepResult out;
  for (const double b : config.b_grid) {
    const auto pop = sample_population(fig1_dgp(b), config.n_mc, config.seed);
    SweepRow row;
    row.b = b;
    row.effects = compute_effects(pop, OracleMode::monte_carlo);
    const auto& e = row.effects.effects;
    const auto& se = row.effects.mc_se;
    row.sign_reversal = beyond(e.nie, se.nie) && beyond(e.nie_r, se.nie_r) &&
                        std::signbit(e.nie) != std::signbit(e.nie_r);
    out.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    if (!out.rows[i].sign_reversal) continue;
    std::size_t j = i;
    while (j + 1 < out.rows.size() && out.rows[j + 1].sign_reversal) ++j;
    out.reversal_intervals.emplace_back(out.rows[i].b, out.rows[j].b);
    i = j;
  }
  return out;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "b,nie,nie_r,nde,nde_r,te,te_r,nie_se,nie_r_se,nde_se,nde_r_se,nie_gap,nie_gap_se,nde_gap,nde_gap_se,"
         "sign_reversal\n";
  for (const auto& r : result.rows) {
    const auto& e = r.effects.effects;
    const auto& s = r.effects.mc_se;
    const auto& g = r.effects.gaps;
    const auto& gs = r.effects.gap_se;
    for (const double v : {r.b, e.nie, e.nie_r, e.nde, e.nde_r, e.te, e.te_r, s.nie, s.nie_r, s.nde, s.nde_r,
                           g.nie, gs.nie, g.nde, gs.nde}) {
      out << format_double(v) << ',';
    }
    out << (r.sign_reversal ? 1 : 0) << '\n';
  }
  out << "# sign reversal of NIE vs NIE^R at 4 se: ";
  if (result.reversal_intervals.empty()) {
    out << "none\n";
    return;
  }
  for (std::size_t i = 0; i < result.reversal_intervals.size(); ++i) {
    const auto& [lo, hi] = result.reversal_intervals[i];
    out << (i ? "; " : "") << "b in [" << format_double(lo) << ", " << format_double(hi) << "]";
  }
  out << '\n';
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  v.back() = hi;
  return v;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  if (text.find(':') != std::string::npos) {
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("b-grid range must look like lo:hi:n");
    const double n = parse_real(parts[2]);
    if (n < 1 || n != std::floor(n)) throw std::invalid_argument("b-grid point count must be a positive integer");
    return linspace(parse_real(parts[0]), parse_real(parts[1]), static_cast<std::size_t>(n));
  }
  std::stringstream ss(text);
  std::string p;
  std::vector<double> v;
  while (std::getline(ss, p, ',')) v.push_back(parse_real(p));
  return v;
}

}  // namespace riagap
