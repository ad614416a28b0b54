#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sblab {

/// monostate is an absent optional value, written as NA (JSON null).
using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, std::string>;

Cell optional_cell(const std::optional<double>& v);

/// Fixed-schema result rows. Numeric cells must be finite.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  void append(const Table& other);
};

/// Doubles with 10 significant digits ("%.10g"), integers verbatim.
std::string format_cell(const Cell& c);

/// Header plus one line per row, comma separated, LF line endings.
std::string to_csv(const Table& t);

/// One JSON object per row, keyed by column name.
std::string to_json_lines(const Table& t);

void write_csv(const Table& t, const std::filesystem::path& path);

}  // namespace sblab
