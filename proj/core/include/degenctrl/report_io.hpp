#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "degenctrl/grid.hpp"

namespace degenctrl {

using Cell = std::variant<std::string, double, long long>;

/// Rows with a fixed column order. Doubles print with 17 significant digits
/// so a report round-trips exactly.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  [[nodiscard]] const std::vector<std::string>& columns() const { return columns_; }
  [[nodiscard]] std::size_t rows() const { return rows_.size(); }
  [[nodiscard]] const std::vector<Cell>& row(std::size_t i) const { return rows_.at(i); }

  /// Throws InvalidArgument when the row length differs from the header.
  void add_row(std::vector<Cell> row);
  void append(const CsvTable& other);

  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_cell(const Cell& cell);

/// Long-format dump with columns t, x, value.
void write_field_csv(const std::filesystem::path& path, const Field& field);

}  // namespace degenctrl
