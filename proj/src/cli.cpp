#include "riagap/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "riagap/dataset.hpp"
#include "riagap/dgp.hpp"
#include "riagap/estimation.hpp"
#include "riagap/format.hpp"
#include "riagap/identities.hpp"
#include "riagap/iv.hpp"
#include "riagap/mannwhitney.hpp"
#include "riagap/oracle.hpp"
#include "riagap/population.hpp"
#include "riagap/serialize.hpp"
#include "riagap/sweep.hpp"

namespace riagap {

namespace {

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

std::string cell(double v) {
  std::ostringstream ss;
  ss << std::setw(14) << std::setprecision(8) << v;
  return ss.str();
}

void print_effect_table(const EffectSet& e, std::ostream& out) {
  out << "mode: " << to_string(e.mode) << "   units: " << e.n_units << '\n';
  out << std::left << std::setw(8) << "effect" << std::right << std::setw(14) << "natural" << std::setw(14)
      << "analogue" << std::setw(14) << "gap";
  const bool mc = e.mode == OracleMode::monte_carlo;
  if (mc) out << std::setw(14) << "gap_se";
  out << '\n';
  auto row = [&](const char* name, double nat, double ana, double gap, double se) {
    out << std::left << std::setw(8) << name << std::right << cell(nat) << cell(ana) << cell(gap);
    if (mc) out << cell(se);
    out << '\n';
  };
  const auto& f = e.effects;
  row("TE", f.te, f.te_r, e.gaps.te, e.gap_se.te);
  row("NIE", f.nie, f.nie_r, e.gaps.nie, e.gap_se.nie);
  row("NDE", f.nde, f.nde_r, e.gaps.nde, e.gap_se.nde);
  row("NIE-org", f.nie, f.nie_organic, e.gaps.nie_organic, e.gap_se.nie_organic);
  row("NDE-org", f.nde, f.nde_organic, e.gaps.nde_organic, e.gap_se.nde_organic);
}

Population population_for(const Scm& spec, std::optional<std::uint64_t> seed, std::size_t n_mc,
                          const char* command) {
  if (const auto* d = std::get_if<DiscreteScm>(&spec)) return enumerate_population(*d);
  if (!seed) {
    throw std::invalid_argument(std::string(command) +
                                ": --seed is required for Monte Carlo evaluation of a parametric spec");
  }
  return sample_population(spec, n_mc, *seed);
}

DiscreteScm preset_discrete(const std::string& name) {
  if (name == "miles") return miles_scm();
  if (name == "collapse") return collapse_dgp();
  if (name == "divergent") return divergent_dgp();
  if (name == "level") return level_dgp();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace

int run_test(const std::string& data_path, const TestFlags& flags, std::ostream& out, std::ostream& err) {
  const auto data = read_dataset_file(data_path);
  DmlOptions opt;
  opt.folds = flags.folds;
  opt.alpha = flags.alpha;
  opt.seed = flags.seed;
  opt.learner = flags.learner;
  const auto rep = dml_test(data, opt);
  const auto text = canonical_dump(to_json(rep, flags.emit_eif));
  emit(flags.out, text, out);
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  std::ostream& say = flags.out.empty() || flags.out == "-" ? err : out;
  say << "TE - TE^R = " << format_double(rep.psi_hat) << " (se " << format_double(rep.se) << "), "
      << format_double(100.0 * (1.0 - rep.alpha)) << "% CI [" << format_double(rep.ci_low) << ", "
      << format_double(rep.ci_high) << "], p = " << format_double(rep.p_value) << '\n';
  say << rep.verdict << '\n';
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural mediation effects versus randomized interventional analogues"};
  app.name("ria-gap");
  app.require_subcommand(1);
  app.footer("Environment: RIA_GAP_THREADS caps the number of worker threads.\n"
             "Exit status: 0 on completion (a rejection is a result, not an error), 1 on an operational error, "
             "2 on a usage error.");

  std::string spec_path, out_path, data_path;
  std::optional<std::uint64_t> seed;
  std::size_t n_mc = 1000000;

  auto* simulate = app.add_subcommand("simulate", "Sample units from a spec; write potentials or observed rows as CSV");
  std::size_t sim_n = 1000;
  bool observed = false;
  simulate->add_option("--spec", spec_path, "Spec JSON file")->required();
  simulate->add_option("--n", sim_n, "Number of units")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "RNG seed")->required();
  simulate->add_flag("--observed", observed, "Write observed rows (c1..ck,a,l,m,y) instead of unit potentials");
  simulate->add_option("--out", out_path, "Output CSV (default: stdout)");

  auto* oracle = app.add_subcommand("oracle", "Ground-truth natural, randomized and organic effects");
  oracle->add_option("--spec", spec_path, "Spec JSON file")->required();
  oracle->add_option("--n-mc", n_mc, "Monte Carlo units for parametric specs")->check(CLI::PositiveNumber);
  oracle->add_option("--seed", seed, "RNG seed (required for parametric specs)");
  oracle->add_option("--out", out_path, "EffectSet JSON output");

  auto* identities = app.add_subcommand("identities", "Check an identity over randomly generated models");
  std::string prop;
  std::size_t n_seeds = 200;
  identities->add_option("--prop", prop, "1, 2, 3, 4, 5, 6, 7 or collapse")->required();
  identities->add_option("--seeds", n_seeds, "Number of random models")->check(CLI::PositiveNumber);
  identities->add_option("--seed", seed, "First model seed (default 1)");
  identities->add_option("--n-mc", n_mc, "Monte Carlo units per model for 4 and 5")->check(CLI::PositiveNumber);
  identities->add_option("--out", out_path, "IdentityReport JSON output");

  auto* test = app.add_subcommand("test", "Cross-fitted test of H0: TE - TE^R = 0 on observed data");
  TestFlags tf;
  std::string learners = "default";
  std::uint64_t test_seed = 0;
  test->add_option("--data", data_path, "CSV with columns c1..ck,a,l,m,y")->required();
  test->add_option("--folds", tf.folds, "Cross-fitting folds (>= 2)")->check(CLI::Range(2, 1000));
  test->add_option("--alpha", tf.alpha, "Test level")->check(CLI::Range(0.0, 1.0));
  test->add_option("--seed", test_seed, "Fold-assignment seed")->required();
  test->add_option("--learners", learners, "Nuisance learners: default or saturated");
  test->add_option("--out", tf.out, "EstimateReport JSON output (default: stdout)");
  test->add_flag("--emit-eif", tf.emit_eif, "Include per-row influence values");

  auto* sweep = app.add_subcommand("sweep", "Sweep the A-L interaction b of the logistic-mediator model");
  std::string grid = "-2:2:41";
  std::size_t sweep_n = 200000;
  sweep->add_option("--b-grid", grid, "lo:hi:n or comma list (write --b-grid=-2:2:41)");
  sweep->add_option("--n-mc", sweep_n, "Monte Carlo units per grid point")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "RNG seed")->required();
  sweep->add_option("--out", out_path, "CSV output (default: stdout)");

  auto* iv = app.add_subcommand("iv", "Wald, ATE and LATE for a binary-instrument discrete spec");
  iv->add_option("--spec", spec_path, "Spec JSON file")->required();
  iv->add_option("--out", out_path, "IvEffectSet JSON output");

  auto* mw = app.add_subcommand("mw", "Mann-Whitney natural estimand, its analogue, and the covariance sum");
  mw->add_option("--spec", spec_path, "Spec JSON file")->required();
  mw->add_option("--out", out_path, "MwEffectSet JSON output");

  auto* spec_cmd = app.add_subcommand("spec", "Emit a preset spec or canonicalize a spec file");
  std::string preset, canonicalize;
  double b = 0.0;
  auto* preset_opt = spec_cmd->add_option("--preset", preset, "fig1, miles, collapse, level or divergent");
  auto* canon_opt = spec_cmd->add_option("--canonicalize", canonicalize, "Spec JSON file to re-emit");
  preset_opt->excludes(canon_opt);
  spec_cmd->add_option("--b", b, "A-L interaction for the fig1 preset");
  spec_cmd->add_option("--out", out_path, "Output JSON (default: stdout)");

  std::vector<std::string> argv_store{"ria-gap"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      const auto spec = read_scm_file(spec_path);
      const auto pop = sample_population(spec, sim_n, *seed);
      std::ostringstream ss;
      if (observed) {
        write_dataset(make_dataset(observe(pop, *seed)), ss);
      } else {
        write_population_csv(pop, ss);
      }
      emit(out_path, ss.str(), out);
    } else if (oracle->parsed()) {
      const auto spec = read_scm_file(spec_path);
      const auto eff = compute_effects(population_for(spec, seed, n_mc, "oracle"));
      print_effect_table(eff, out_path.empty() ? err : out);
      emit(out_path, canonical_dump(to_json(eff)), out);
    } else if (identities->parsed()) {
      const auto p = proposition_from_string(prop);
      const auto rep = run_identity_suite(p, n_seeds, seed.value_or(1), n_mc);
      emit(out_path, canonical_dump(to_json(rep)), out);
      std::ostream& say = out_path.empty() ? err : out;
      say << "identity " << to_string(p) << ": " << rep.n_specs << " models, max violation "
          << format_double(rep.max_violation) << " (tolerance " << format_double(rep.tolerance)
          << (rep.unit == ToleranceUnit::mc_se ? " MC se" : " absolute") << "), failures " << rep.failures()
          << ", triangle failures " << rep.triangle_failures() << ": " << (rep.pass() ? "PASS" : "FAIL") << '\n';
    } else if (test->parsed()) {
      tf.learner = learner_from_string(learners);
      tf.seed = test_seed;
      return run_test(data_path, tf, out, err);
    } else if (sweep->parsed()) {
      SweepConfig cfg;
      cfg.b_grid = parse_grid(grid);
      cfg.n_mc = sweep_n;
      cfg.seed = *seed;
      cfg.output = out_path;
      const auto res = sweep_fig1(cfg);
      std::ostringstream ss;
      write_sweep_csv(res, ss);
      emit(out_path, ss.str(), out);
    } else if (iv->parsed()) {
      const auto spec = read_scm_file(spec_path);
      const auto* d = std::get_if<DiscreteScm>(&spec);
      if (!d) throw std::invalid_argument("iv: requires a discrete spec");
      emit(out_path, canonical_dump(to_json(iv_oracle(enumerate_population(*d)))), out);
    } else if (mw->parsed()) {
      const auto spec = read_scm_file(spec_path);
      const auto* d = std::get_if<DiscreteScm>(&spec);
      if (!d) throw std::invalid_argument("mw: requires a discrete spec (finite outcome support)");
      emit(out_path, canonical_dump(to_json(mw_oracle(enumerate_population(*d)))), out);
    } else if (spec_cmd->parsed()) {
      Json doc;
      if (!canonicalize.empty()) {
        doc = scm_to_json(read_scm_file(canonicalize));
      } else if (preset == "fig1") {
        doc = scm_to_json(fig1_dgp(b));
      } else if (!preset.empty()) {
        doc = scm_to_json(preset_discrete(preset));
      } else {
        throw std::invalid_argument("spec: give --preset or --canonicalize");
      }
      emit(out_path, canonical_dump(doc), out);
    }
  } catch (const SchemaError& e) {
    err << "error: schema: " << e.what() << '\n';
    return 1;
  } catch (const SpecError& e) {
    err << "error: invalid spec: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace riagap
