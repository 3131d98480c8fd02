#include "riagap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "riagap/format.hpp"

namespace riagap {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<std::size_t> confounder_index(const std::string& name) {
  if (name.size() < 2 || name[0] != 'c') return std::nullopt;
  std::size_t k = 0;
  const auto* first = name.data() + 1;
  const auto* last = name.data() + name.size();
  const auto [p, ec] = std::from_chars(first, last, k);
  if (ec != std::errc() || p != last || k == 0) return std::nullopt;
  return k;
}

double parse_number(const std::string& cell, const std::string& column, std::size_t line) {
  double v = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [p, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || p != last || !std::isfinite(v)) {
    throw SchemaError(column, "line " + std::to_string(line) + ": column `" + column +
                                  "` has non-numeric value '" + cell + "'");
  }
  return v;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("", "empty input: expected a header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split(line);

  std::map<std::string, std::size_t> pos;
  std::map<std::size_t, std::size_t> c_pos;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto& name = header[j];
    if (pos.count(name)) throw SchemaError(name, "duplicate column `" + name + "`");
    pos[name] = j;
    if (const auto k = confounder_index(name)) {
      c_pos[*k] = j;
    } else if (name != "a" && name != "l" && name != "m" && name != "y") {
      throw SchemaError(name, "unexpected column `" + name + "` (expected c1..ck, a, l, m, y)");
    }
  }
  for (const char* required : {"a", "l", "m", "y"}) {
    if (!pos.count(required)) {
      throw SchemaError(required, std::string("missing required column `") + required + "`");
    }
  }
  Dataset data;
  std::size_t expect = 1;
  for (const auto& [k, j] : c_pos) {
    if (k != expect) {
      const auto name = "c" + std::to_string(expect);
      throw SchemaError(name, "missing column `" + name + "` (confounders must be c1..ck)");
    }
    data.c_names.push_back(header[j]);
    ++expect;
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw SchemaError("", "line " + std::to_string(line_no) + ": expected " +
                                std::to_string(header.size()) + " fields, found " +
                                std::to_string(cells.size()));
    }
    ObservedRow row;
    for (const auto& [k, j] : c_pos) row.c.push_back(parse_number(cells[j], header[j], line_no));
    auto binary = [&](const char* col) {
      const double v = parse_number(cells[pos.at(col)], col, line_no);
      if (v != 0.0 && v != 1.0) {
        throw SchemaError(col, "line " + std::to_string(line_no) + ": column `" + col +
                                   "` must be 0 or 1");
      }
      return v;
    };
    row.a = static_cast<int>(binary("a"));
    row.l = binary("l");
    row.m = binary("m");
    row.y = parse_number(cells[pos.at("y")], "y", line_no);
    data.rows.push_back(std::move(row));
  }
  validate_dataset(data);
  return data;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  return read_dataset(in);
}

void write_dataset(const Dataset& data, std::ostream& out) {
  for (const auto& name : data.c_names) out << name << ',';
  out << "a,l,m,y\n";
  for (const auto& r : data.rows) {
    for (const double c : r.c) out << format_double(c) << ',';
    out << r.a << ',' << format_double(r.l) << ',' << format_double(r.m) << ',' << format_double(r.y)
        << '\n';
  }
}

void validate_dataset(const Dataset& data) {
  if (data.rows.empty()) throw SchemaError("", "dataset has no rows");
  bool arm[2] = {false, false};
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    const auto where = "row " + std::to_string(i + 1) + ": ";
    if (r.c.size() != data.c_dim()) throw SchemaError("c", where + "wrong number of confounders");
    for (std::size_t j = 0; j < r.c.size(); ++j) {
      if (!std::isfinite(r.c[j])) throw SchemaError(data.c_names[j], where + "non-finite value");
    }
    if (r.a != 0 && r.a != 1) throw SchemaError("a", where + "column `a` must be 0 or 1");
    if (r.l != 0.0 && r.l != 1.0) throw SchemaError("l", where + "column `l` must be 0 or 1");
    if (r.m != 0.0 && r.m != 1.0) throw SchemaError("m", where + "column `m` must be 0 or 1");
    if (!std::isfinite(r.y)) throw SchemaError("y", where + "non-finite value");
    arm[r.a] = true;
  }
  if (!arm[0] || !arm[1]) throw SchemaError("a", "both treatment arms (a = 0 and a = 1) must be present");
}

Dataset make_dataset(std::vector<ObservedRow> rows) {
  Dataset data;
  const std::size_t k = rows.empty() ? 0 : rows.front().c.size();
  for (std::size_t j = 0; j < k; ++j) data.c_names.push_back("c" + std::to_string(j + 1));
  data.rows = std::move(rows);
  return data;
}

}  // namespace riagap
