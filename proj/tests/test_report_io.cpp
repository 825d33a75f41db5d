#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "degenctrl/errors.hpp"
#include "degenctrl/report_io.hpp"

using namespace degenctrl;

TEST(FormatCell, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = format_cell(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_cell(0.5), "0.5");
  EXPECT_EQ(format_cell(0.1), "0.10000000000000001");
}

TEST(FormatCell, SpecialValuesAndIntegers) {
  EXPECT_EQ(format_cell(NAN), "nan");
  EXPECT_EQ(format_cell(INFINITY), "inf");
  EXPECT_EQ(format_cell(-INFINITY), "-inf");
  EXPECT_EQ(format_cell(42LL), "42");
  EXPECT_EQ(format_cell(std::string("plain")), "plain");
}

TEST(FormatCell, QuotesWhenNeeded) {
  EXPECT_EQ(format_cell(std::string("a,b")), "\"a,b\"");
  EXPECT_EQ(format_cell(std::string("say \"hi\"")), "\"say \"\"hi\"\"\"");
}

TEST(CsvTableTest, WritesHeaderAndRows) {
  CsvTable table({"name", "n", "value"});
  table.add_row({std::string("hum"), 64LL, 0.25});
  table.add_row({std::string("x,y"), 128LL, -1.0});
  std::ostringstream out;
  table.write(out);
  EXPECT_EQ(out.str(), "name,n,value\nhum,64,0.25\n\"x,y\",128,-1\n");
  EXPECT_EQ(table.rows(), 2u);
}

TEST(CsvTableTest, RejectsRowLengthMismatch) {
  CsvTable table({"a", "b"});
  EXPECT_THROW(table.add_row({1.0}), InvalidArgument);
  EXPECT_THROW(table.add_row({1.0, 2.0, 3.0}), InvalidArgument);
  EXPECT_EQ(table.rows(), 0u);
}

TEST(CsvTableTest, AppendRequiresSameColumns) {
  CsvTable a({"x"});
  CsvTable b({"x"});
  CsvTable c({"y"});
  a.add_row({1.0});
  b.add_row({2.0});
  a.append(b);
  EXPECT_EQ(a.rows(), 2u);
  EXPECT_THROW(a.append(c), InvalidArgument);
}

TEST(FieldCsv, LongFormatDump) {
  const Grid grid = make_grid(2, 1.0, 1.0, 1);
  const Field f(grid, [](double x, double t) { return x + 10.0 * t; });
  const auto path = std::filesystem::temp_directory_path() / "degenctrl_field_test.csv";
  write_field_csv(path, f);
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  EXPECT_EQ(buffer.str(), "t,x,value\n0,0,0\n0,0.5,0.5\n0,1,1\n1,0,10\n1,0.5,10.5\n1,1,11\n");
  std::filesystem::remove(path);
}
