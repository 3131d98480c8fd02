#include "riagap/serialize.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "riagap/format.hpp"

namespace riagap {

namespace {

// Walks a document and reports errors with the dotted path of the field.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const Json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) throw SpecError(label(), "must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j_.items()) {
      if (!ok.count(k)) throw SpecError(child_path(k), "unknown field");
    }
  }
  bool has(const char* key) const { return j_.contains(key); }
  Reader at(const char* key) const {
    if (!j_.contains(key)) throw SpecError(child_path(key), "missing required field");
    return Reader(j_.at(key), child_path(key));
  }
  Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  double number() const {
    if (!j_.is_number()) throw SpecError(label(), "must be a number");
    return j_.get<double>();
  }
  std::string string() const {
    if (!j_.is_string()) throw SpecError(label(), "must be a string");
    return j_.get<std::string>();
  }
  std::size_t array_size() const {
    if (!j_.is_array()) throw SpecError(label(), "must be an array");
    return j_.size();
  }
  std::vector<double> numbers() const {
    std::vector<double> out(array_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }
  template <std::size_t N>
  std::array<double, N> fixed() const {
    const auto v = numbers();
    if (v.size() != N) throw SpecError(label(), "must have exactly " + std::to_string(N) + " entries");
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }
  double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }

 private:
  std::string label() const { return path_.empty() ? "document" : path_; }
  std::string child_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const Json& j_;
  std::string path_;
};

Json form_to_json(const OutcomeForm& g) {
  Json terms = Json::array();
  for (const auto& t : g.terms) {
    Json factors = Json::array();
    for (const auto& f : t.factors) {
      factors.push_back({{"var", std::string(to_string(f.var))},
                         {"kind", f.kind == FactorKind::power ? "power" : "step"},
                         {"param", f.param}});
    }
    terms.push_back({{"coef", t.coef}, {"factors", factors}});
  }
  return terms;
}

OutcomeForm form_from_json(const Reader& r) {
  OutcomeForm g;
  for (std::size_t i = 0; i < r.array_size(); ++i) {
    const auto tr = r.at(i);
    tr.require_object({"coef", "factors"});
    Term t;
    t.coef = tr.at("coef").number();
    if (tr.has("factors")) {
      const auto fr = tr.at("factors");
      for (std::size_t k = 0; k < fr.array_size(); ++k) {
        const auto f = fr.at(k);
        f.require_object({"var", "kind", "param"});
        Factor factor{Variable::treatment, FactorKind::power, 1.0};
        try {
          factor.var = variable_from_string(f.at("var").string());
        } catch (const std::invalid_argument& e) {
          throw SpecError(f.path() + ".var", e.what());
        }
        const auto kind = f.has("kind") ? f.at("kind").string() : std::string("power");
        if (kind == "power") {
          factor.kind = FactorKind::power;
        } else if (kind == "step") {
          factor.kind = FactorKind::step;
        } else {
          throw SpecError(f.path() + ".kind", "must be \"power\" or \"step\"");
        }
        factor.param = f.number_or("param", 1.0);
        if (factor.kind == FactorKind::power &&
            (factor.param < 1.0 || factor.param != std::floor(factor.param))) {
          throw SpecError(f.path() + ".param", "power exponent must be a positive integer");
        }
        t.factors.push_back(factor);
      }
    }
    g.terms.push_back(std::move(t));
  }
  return g;
}

std::string_view kind_name(Prop5Kind k) { return k == Prop5Kind::nie_null ? "nie_null" : "nde_null"; }

Json parametric_to_json(const ParametricScm& s) {
  Json j{{"family", "parametric"},
         {"alpha", s.alpha},
         {"beta", s.beta},
         {"gamma", s.gamma},
         {"m_link", s.m_link == MediatorLink::linear ? "linear" : "logistic"},
         {"noise",
          {{"var_eps_l", s.noise.var_eps_l},
           {"var_eps_m", s.noise.var_eps_m},
           {"cov_eps_l_eps_m", s.noise.cov_eps_l_eps_m},
           {"var_eps_y", s.noise.var_eps_y}}},
         {"propensity", s.propensity}};
  if (s.constrained) {
    j["outcome"] = {{"kind", std::string(kind_name(s.constrained->kind))},
                    {"g1", form_to_json(s.constrained->g1)},
                    {"g2", form_to_json(s.constrained->g2)}};
  }
  return j;
}

ParametricScm parametric_from_json(const Reader& r) {
  r.require_object({"family", "alpha", "beta", "gamma", "m_link", "noise", "propensity", "outcome"});
  ParametricScm s;
  s.alpha = r.at("alpha").fixed<2>();
  s.beta = r.at("beta").fixed<4>();
  s.gamma = r.has("gamma") ? r.at("gamma").fixed<8>() : std::array<double, 8>{};
  const auto link = r.at("m_link").string();
  if (link == "linear") {
    s.m_link = MediatorLink::linear;
  } else if (link == "logistic") {
    s.m_link = MediatorLink::logistic;
  } else {
    throw SpecError("m_link", "must be \"linear\" or \"logistic\"");
  }
  if (r.has("noise")) {
    const auto n = r.at("noise");
    n.require_object({"var_eps_l", "var_eps_m", "cov_eps_l_eps_m", "var_eps_y"});
    s.noise.var_eps_l = n.number_or("var_eps_l", 1.0);
    s.noise.var_eps_m = n.number_or("var_eps_m", 1.0);
    s.noise.cov_eps_l_eps_m = n.number_or("cov_eps_l_eps_m", 0.0);
    s.noise.var_eps_y = n.number_or("var_eps_y", 1.0);
  }
  s.propensity = r.number_or("propensity", 0.5);
  if (r.has("outcome")) {
    const auto o = r.at("outcome");
    o.require_object({"kind", "g1", "g2"});
    const auto kind = o.at("kind").string();
    Prop5Inner inner;
    inner.base = s;
    inner.g1 = form_from_json(o.at("g1"));
    inner.g2 = form_from_json(o.at("g2"));
    if (kind == "nie_null") return prop5_scm(Prop5Kind::nie_null, inner);
    if (kind == "nde_null") return prop5_scm(Prop5Kind::nde_null, inner);
    throw SpecError("outcome.kind", "must be \"nie_null\" or \"nde_null\"");
  }
  s.validate();
  return s;
}

Json discrete_to_json(const DiscreteScm& s) {
  Json strata = Json::array();
  for (const auto& st : s.strata) {
    Json types = Json::array();
    for (const auto& t : st.types) {
      types.push_back({{"prob", t.prob},
                       {"l", t.l},
                       {"m", {s.m_support[t.m[0]], s.m_support[t.m[1]]}},
                       {"y", {t.y[0], t.y[1]}}});
    }
    strata.push_back({{"c", st.c}, {"prob", st.prob}, {"propensity", st.propensity}, {"types", types}});
  }
  return {{"family", "discrete"},
          {"m_support", s.m_support},
          {"outcome_noise_sd", s.outcome_noise_sd},
          {"strata", strata}};
}

DiscreteScm discrete_from_json(const Reader& r) {
  r.require_object({"family", "m_support", "outcome_noise_sd", "strata"});
  DiscreteScm s;
  s.m_support = r.at("m_support").numbers();
  s.outcome_noise_sd = r.number_or("outcome_noise_sd", 0.0);
  const auto sr = r.at("strata");
  for (std::size_t i = 0; i < sr.array_size(); ++i) {
    const auto x = sr.at(i);
    x.require_object({"c", "prob", "propensity", "types"});
    Stratum st;
    st.c = x.has("c") ? x.at("c").numbers() : std::vector<double>{};
    st.prob = x.number_or("prob", 1.0);
    st.propensity = x.number_or("propensity", 0.5);
    const auto tr = x.at("types");
    for (std::size_t k = 0; k < tr.array_size(); ++k) {
      const auto t = tr.at(k);
      t.require_object({"prob", "l", "m", "y"});
      ResponseType ty;
      ty.prob = t.at("prob").number();
      ty.l = t.has("l") ? t.at("l").fixed<2>() : std::array<double, 2>{0.0, 0.0};
      const auto m = t.at("m").fixed<2>();
      for (int a = 0; a < 2; ++a) {
        const auto it = std::find(s.m_support.begin(), s.m_support.end(), m[a]);
        if (it == s.m_support.end()) throw SpecError(t.path() + ".m", "value outside m_support");
        ty.m[a] = static_cast<std::size_t>(it - s.m_support.begin());
      }
      const auto yr = t.at("y");
      if (yr.array_size() != 2) throw SpecError(yr.path(), "must hold one outcome row per arm");
      ty.y = {yr.at(std::size_t{0}).numbers(), yr.at(std::size_t{1}).numbers()};
      st.types.push_back(std::move(ty));
    }
    s.strata.push_back(std::move(st));
  }
  s.validate();
  return s;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json fields_to_json(const EffectFields& f) {
  return {{"te", f.te},   {"nie", f.nie},     {"nde", f.nde},     {"te_r", f.te_r},
          {"nie_r", f.nie_r}, {"nde_r", f.nde_r}, {"nie_organic", f.nie_organic},
          {"nde_organic", f.nde_organic}};
}

Json gaps_to_json(const GapFields& g) {
  return {{"te", g.te}, {"nie", g.nie}, {"nde", g.nde}, {"nie_organic", g.nie_organic},
          {"nde_organic", g.nde_organic}};
}

std::string csv_field(double v) { return format_double(v); }

}  // namespace

Json scm_to_json(const Scm& spec) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ParametricScm>) {
          return parametric_to_json(s);
        } else {
          return discrete_to_json(s);
        }
      },
      spec);
}

Scm scm_from_json(const Json& doc) {
  const Reader r(doc, "");
  if (!doc.is_object()) throw SpecError("document", "must be a JSON object");
  const auto family = r.at("family").string();
  if (family == "parametric") return parametric_from_json(r);
  if (family == "discrete") return discrete_from_json(r);
  throw SpecError("family", "must be \"parametric\" or \"discrete\"");
}

std::string canonical_dump(const Json& doc) { return doc.dump(2) + "\n"; }

Scm parse_scm(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SpecError("document", std::string("invalid JSON: ") + e.what());
  }
  return scm_from_json(doc);
}

Scm read_scm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scm(ss.str());
}

Json to_json(const EffectSet& e) {
  return {{"mode", std::string(to_string(e.mode))},
          {"n_units", e.n_units},
          {"effects", fields_to_json(e.effects)},
          {"mc_se", fields_to_json(e.mc_se)},
          {"gaps", gaps_to_json(e.gaps)},
          {"gap_se", gaps_to_json(e.gap_se)}};
}

Json to_json(const IdentityReport& r) {
  Json specs = Json::array();
  for (const auto& s : r.specs) {
    specs.push_back({{"seed", s.seed},
                     {"violation", number_or_null(s.violation)},
                     {"abs_violation", number_or_null(s.abs_violation)},
                     {"pass", s.pass},
                     {"triangle_ok", s.triangle_ok},
                     {"note", s.note}});
  }
  return {{"proposition", std::string(to_string(r.proposition))},
          {"n_specs", r.n_specs},
          {"max_violation", number_or_null(r.max_violation)},
          {"tolerance", r.tolerance},
          {"tolerance_unit", r.unit == ToleranceUnit::absolute ? "absolute" : "mc_se"},
          {"failures", r.failures()},
          {"triangle_failures", r.triangle_failures()},
          {"pass", r.pass()},
          {"specs", specs}};
}

Json to_json(const IvEffectSet& e) {
  return {{"ate", e.ate},
          {"late", number_or_null(e.late)},
          {"wald", e.wald},
          {"complier_share", e.complier_share},
          {"first_stage", e.first_stage},
          {"selection_cov", e.selection_cov},
          {"monotonic", e.monotonic}};
}

Json to_json(const MwEffectSet& e) {
  Json j{{"natural", e.natural}, {"ria", e.ria}, {"gap", e.gap}, {"cov_sum", e.cov_sum}};
  j["binary_cov"] = e.binary_cov ? Json(*e.binary_cov) : Json(nullptr);
  return j;
}

Json to_json(const EstimateReport& r, bool emit_eif) {
  Json j{{"psi_hat", r.psi_hat},
         {"se", r.se},
         {"ci_low", r.ci_low},
         {"ci_high", r.ci_high},
         {"z_stat", r.z_stat},
         {"p_value", r.p_value},
         {"alpha", r.alpha},
         {"n", r.n},
         {"folds", r.folds},
         {"fold_sizes", r.fold_sizes},
         {"seed", r.seed},
         {"learners", std::string(to_string(r.learner))},
         {"te_hat", r.te_hat},
         {"te_se", r.te_se},
         {"te_r_hat", r.te_r_hat},
         {"te_r_se", r.te_r_se},
         {"lower_bound", r.lower_bound},
         {"reject", r.reject},
         {"verdict", r.verdict},
         {"trimmed_rows", r.trimmed_rows},
         {"trim_rate", r.trim_rate},
         {"warnings", r.warnings}};
  if (emit_eif) j["eif"] = r.eif;
  return j;
}

void write_population_csv(const Population& pop, std::ostream& out) {
  const auto& spec = pop.spec();
  const auto* disc = std::get_if<DiscreteScm>(&spec);
  const std::size_t dim = disc ? disc->c_dim() : 0;
  out << "unit_id,weight";
  for (std::size_t j = 0; j < dim; ++j) out << ",c" << (j + 1);
  out << ",l0,l1,m0,m1";
  if (disc) {
    for (int a = 0; a < 2; ++a) {
      for (std::size_t k = 0; k < disc->m_support.size(); ++k) out << ",y_a" << a << "_k" << k;
    }
    out << ",eps_y";
  } else {
    out << ",g0,g1,eps_L,eps_M,eps_Y1,eps_Y2,y_function";
  }
  out << '\n';
  const auto units = pop.units();
  std::string tag;
  if (!disc) {
    const auto& p = std::get<ParametricScm>(spec);
    tag = p.constrained ? std::string(kind_name(p.constrained->kind)) : std::string("gamma_linear");
  }
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& u = units[i];
    out << i << ',' << csv_field(pop.weight(i));
    if (disc) {
      for (const double c : disc->strata[u.stratum].c) out << ',' << csv_field(c);
    }
    out << ',' << csv_field(u.l[0]) << ',' << csv_field(u.l[1]) << ',' << csv_field(u.m[0]) << ','
        << csv_field(u.m[1]);
    if (disc) {
      for (int a = 0; a < 2; ++a) {
        for (std::size_t k = 0; k < disc->m_support.size(); ++k) out << ',' << csv_field(pop.y_at(u, a, k));
      }
      out << ',' << csv_field(u.noise[2]);
    } else {
      out << ',' << csv_field(u.g[0]) << ',' << csv_field(u.g[1]);
      for (const double e : u.noise) out << ',' << csv_field(e);
      out << ',' << tag;
    }
    out << '\n';
  }
}

}  // namespace riagap
