#include "doctest.h"

#include <sstream>

#include "riagap/dgp.hpp"
#include "riagap/identities.hpp"
#include "riagap/oracle.hpp"
#include "riagap/population.hpp"
#include "riagap/serialize.hpp"

using namespace riagap;

namespace {

void round_trip(const Scm& spec) {
  const auto text = canonical_dump(scm_to_json(spec));
  const auto back = parse_scm(text);
  CHECK(canonical_dump(scm_to_json(back)) == text);
}

std::string field_of(const std::string& text) {
  try {
    (void)parse_scm(text);
  } catch (const SpecError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("byte-identical round trips") {
  round_trip(fig1_dgp(-1.5));
  round_trip(fig1_dgp(0.1));
  round_trip(miles_scm());
  round_trip(collapse_dgp());
  round_trip(divergent_dgp());
  round_trip(level_dgp());
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    round_trip(random_discrete_scm(seed));
    round_trip(random_linear_scm(seed));
    round_trip(prop5_scm(Prop5Kind::nie_null, random_prop5_inner(seed, Prop5Kind::nie_null)));
    round_trip(prop5_scm(Prop5Kind::nde_null, random_prop5_inner(seed, Prop5Kind::nde_null)));
    round_trip(random_iv_scm(seed, false));
  }
}

TEST_CASE("round trip preserves the model") {
  const Scm original = random_linear_scm(7);
  const auto back = parse_scm(canonical_dump(scm_to_json(original)));
  const auto a = sample_population(original, 200, 3);
  const auto b = sample_population(back, 200, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.y_factual(a.units()[i], 1) == b.y_factual(b.units()[i], 1));
    CHECK(a.units()[i].m[0] == b.units()[i].m[0]);
  }
}

TEST_CASE("canonical output is sorted and newline terminated") {
  const auto text = canonical_dump(scm_to_json(miles_scm()));
  CHECK(text.back() == '\n');
  CHECK(text.find("\"family\"") < text.find("\"m_support\""));
  CHECK(text.find("\"m_support\"") < text.find("\"strata\""));
}

TEST_CASE("schema errors name the offending field") {
  auto doc = scm_to_json(fig1_dgp(0.5));
  doc.erase("beta");
  CHECK(field_of(doc.dump()) == "beta");

  doc = scm_to_json(fig1_dgp(0.5));
  doc["noise"]["var_eps_y"] = "one";
  CHECK(field_of(doc.dump()) == "noise.var_eps_y");

  doc = scm_to_json(fig1_dgp(0.5));
  doc["noise"]["colour"] = 1;
  CHECK(field_of(doc.dump()) == "noise.colour");

  doc = scm_to_json(miles_scm());
  doc["strata"][0]["types"][1]["prob"] = "half";
  CHECK(field_of(doc.dump()) == "strata[0].types[1].prob");

  doc = scm_to_json(miles_scm());
  doc.erase("family");
  CHECK(field_of(doc.dump()) == "family");

  doc = scm_to_json(miles_scm());
  doc["family"] = "neural";
  CHECK(field_of(doc.dump()) == "family");

  CHECK(field_of("{not json") == "document");
  CHECK(field_of("[1, 2]") == "document");
}

TEST_CASE("invalid models are rejected after parsing") {
  auto doc = scm_to_json(miles_scm());
  doc["strata"][0]["types"][0]["prob"] = 0.9;
  CHECK_THROWS_AS(parse_scm(doc.dump()), SpecError);
}

TEST_CASE("report serialization") {
  const auto e = compute_effects(enumerate_population(miles_scm()));
  const auto j = to_json(e);
  CHECK(j.at("effects").at("nie_r").get<double>() == doctest::Approx(0.25));
  CHECK(j.at("mode").get<std::string>() == "exact");

  const auto pop = enumerate_population(miles_scm());
  std::ostringstream csv;
  write_population_csv(pop, csv);
  const auto text = csv.str();
  CHECK(text.rfind("unit_id,weight,", 0) == 0);
  CHECK(text.find("l0,l1,m0,m1") != std::string::npos);
}
