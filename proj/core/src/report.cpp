#include "smallball/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "smallball/errors.hpp"

namespace sblab {

Cell optional_cell(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw DomainError("report row has " + std::to_string(row.size()) + " cells, schema has " +
                      std::to_string(columns.size()));
  }
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (const double* d = std::get_if<double>(&row[i]); d != nullptr && !std::isfinite(*d)) {
      throw DomainError("non-finite value in column '" + columns[i] + "'");
    }
  }
  rows.push_back(std::move(row));
}

void Table::append(const Table& other) {
  if (columns.empty() && rows.empty()) columns = other.columns;
  if (other.columns != columns) throw DomainError("cannot append tables with different schemas");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "NA"; }
    std::string operator()(double v) const {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.10g", v);
      return buf;
    }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i > 0) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string to_json_lines(const Table& t) {
  std::string out;
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::monostate>) {
              obj[t.columns[i]] = nullptr;
            } else {
              obj[t.columns[i]] = v;
            }
          },
          row[i]);
    }
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void write_csv(const Table& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open output file " + path.string());
  out << to_csv(t);
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace sblab
