#include "gausstrace/csv.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

using namespace gausstrace;

TEST(FormatDouble, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(CsvEscape, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("x;y"), "x;y");
}

TEST(CsvTable, WidthCheckedAndNewlines) {
  CsvTable t({"a", "b"});
  t.add_row({"1", "2"});
  EXPECT_THROW(t.add_row({"1"}), std::invalid_argument);
  EXPECT_EQ(t.str(), "a,b\n1,2\n");
}

TEST(CsvTable, SaveWritesSameBytes) {
  CsvTable t({"x"});
  t.add_row({format_double(0.1)});
  const std::string path = ::testing::TempDir() + "gausstrace_csv_test.csv";
  t.save(path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), t.str());
  std::remove(path.c_str());
  EXPECT_THROW(t.save("/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST(IdentityTable, Columns) {
  IdentityReport r;
  r.id = IdentityId::partitraccia2;
  r.domain = "sphere2d";
  r.phi = "x1";
  r.psi = "1";
  r.index = "q=2";
  r.lhs = 0.5;
  r.rhs = 0.25;
  r.lhs_err = 0.125;
  r.rhs_err = 0.0625;
  r.pass = true;
  const CsvTable t = identity_table({r});
  EXPECT_EQ(t.header(), (std::vector<std::string>{"identity_id", "domain", "phi_label", "k_or_q", "lhs", "rhs",
                                                  "lhs_err", "rhs_err", "pass"}));
  EXPECT_EQ(t.rows()[0], (std::vector<std::string>{"partitraccia2", "sphere2d", "x1;1", "q=2", "0.5", "0.25",
                                                   "0.125", "0.0625", "1"}));
}

TEST(DensityTable, Columns) {
  DensityCurve c;
  c.grid = {-0.5, 0.5};
  c.values = {1.0, 2.0};
  c.std_errors = {0.1, 0.2};
  const CsvTable t = density_table(c);
  EXPECT_EQ(t.header(), (std::vector<std::string>{"xi", "value", "stderr"}));
  EXPECT_EQ(t.rows().size(), 2u);
}
