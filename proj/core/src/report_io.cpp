#include "degenctrl/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "degenctrl/errors.hpp"

namespace degenctrl {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  return quote(std::get<std::string>(cell));
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw InvalidArgument("row has " + std::to_string(row.size()) + " cells, header has " +
                          std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

void CsvTable::append(const CsvTable& other) {
  if (other.columns_ != columns_) throw InvalidArgument("cannot append a table with different columns");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) out << (c ? "," : "") << quote(columns_[c]);
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
    out << '\n';
  }
}

void CsvTable::write(const std::filesystem::path& path) const {
  auto out = open_for_writing(path);
  write(out);
}

void write_field_csv(const std::filesystem::path& path, const Field& field) {
  auto out = open_for_writing(path);
  out << "t,x,value\n";
  for (std::size_t k = 0; k < field.levels(); ++k) {
    const std::string t = format_double(field.time().instant(k));
    for (std::size_t i = 0; i < field.nodes(); ++i) {
      out << t << ',' << format_double(field.mesh().node(i)) << ',' << format_double(field(k, i)) << '\n';
    }
  }
}

}  // namespace degenctrl
