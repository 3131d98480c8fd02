#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "riagap/population.hpp"

namespace riagap {

/// Malformed input table. column() names the offending column (may be empty).
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string column, const std::string& what)
      : std::runtime_error(what), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

/// Observed data with binary a, l, m and real c1..ck, y.
struct Dataset {
  std::vector<std::string> c_names;
  std::vector<ObservedRow> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t c_dim() const { return c_names.size(); }
};

/// Header row then one record per line; columns c1..ck, a, l, m, y in any order.
Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);

void write_dataset(const Dataset& data, std::ostream& out);

/// Throws SchemaError unless a, l, m are binary, values are finite, and both
/// treatment arms are present.
void validate_dataset(const Dataset& data);

Dataset make_dataset(std::vector<ObservedRow> rows);

}  // namespace riagap
