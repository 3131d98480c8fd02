#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "riagap/nuisance.hpp"

namespace riagap {

/// Runs the ria-gap command line on `args` (program name excluded).
/// Returns 0 on completion, 1 on an operational error, 2 on a usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct TestFlags {
  std::size_t folds = 2;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  Learner learner = Learner::parametric;
  std::string out;  // empty: JSON to the output stream
  bool emit_eif = false;
};

/// Reads the CSV, runs the cross-fitted test, writes the report JSON and
/// prints a verdict sentence. Rejection is reported in the data, not the
/// exit status.
int run_test(const std::string& data_path, const TestFlags& flags, std::ostream& out, std::ostream& err);

}  // namespace riagap
