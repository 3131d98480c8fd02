#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "riagap/estimation.hpp"
#include "riagap/identities.hpp"
#include "riagap/iv.hpp"
#include "riagap/mannwhitney.hpp"
#include "riagap/oracle.hpp"
#include "riagap/population.hpp"
#include "riagap/scm.hpp"

namespace riagap {

using Json = nlohmann::json;

/// Model document: {"family": "parametric" | "discrete", ...}. Unknown or
/// missing fields raise SpecError naming the field.
Json scm_to_json(const Scm& spec);
Scm scm_from_json(const Json& doc);

/// Sorted keys, two-space indent, shortest round-trip numbers, trailing newline.
std::string canonical_dump(const Json& doc);

Scm read_scm_file(const std::string& path);
Scm parse_scm(const std::string& text);

Json to_json(const EffectSet& e);
Json to_json(const IdentityReport& r);
Json to_json(const IvEffectSet& e);
Json to_json(const MwEffectSet& e);
Json to_json(const EstimateReport& r, bool emit_eif);

/// unit_id, c1..ck, l0, l1, m0, m1, then y_a{a}_m{k} for every support value
/// (discrete) or the noise draws and an outcome function tag (parametric).
void write_population_csv(const Population& pop, std::ostream& out);

}  // namespace riagap
