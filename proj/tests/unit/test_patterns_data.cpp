#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nsc/csv.hpp"
#include "nsc/dataset.hpp"
#include "nsc/pattern.hpp"

using nsc::Pattern;

TEST_SUITE("patterns-data") {

TEST_CASE("pattern bits round trip for every K = 3 pattern") {
  CHECK(nsc::pattern_count(3) == 8);
  for (std::uint32_t idx = 0; idx < 8; ++idx) {
    const Pattern r(idx, 3);
    const auto bits = r.decode();
    CHECK(Pattern::encode(bits) == r);
    CHECK(Pattern::parse(r.to_string()) == r);
    int missing = 0;
    for (int b : bits) missing += 1 - b;
    CHECK(r.n_missing() == missing);
  }
}

TEST_CASE("pattern indexing follows the L1-first bit order") {
  CHECK(Pattern::parse("101").index() == 5u);
  CHECK(Pattern::parse("100").index() == 1u);
  CHECK(Pattern::complete(3).index() == 7u);
  CHECK(Pattern::complete(3).is_complete());
  CHECK(Pattern::leave_one_out(3, 1).to_string() == "101");
  CHECK(Pattern::parse("011").missing_mask() == 1u);
}

TEST_CASE("malformed patterns are rejected") {
  CHECK_THROWS_AS(Pattern::parse("1x1"), std::invalid_argument);
  CHECK_THROWS_AS(Pattern(9, 3), std::invalid_argument);
  CHECK_THROWS_AS(Pattern(0, 1), std::invalid_argument);
}

TEST_CASE("csv ingest marks missing coordinates and round trips") {
  const std::string text =
      "L1,L2,L3,X1\n"
      "1,2,3,0.5\n"
      "NA,2,3,1.5\n"
      "1,,NA,2.5\n"
      "NA,NA,NA,3.5\n";
  std::istringstream in(text);
  const nsc::Dataset d = nsc::ingest_csv(in);
  REQUIRE(d.size() == 4);
  CHECK(d.k() == 3);
  CHECK(d.p() == 1);
  CHECK(d.pattern(0).is_complete());
  CHECK(d.pattern(1).to_string() == "011");
  CHECK(d.pattern(2).to_string() == "100");
  CHECK(d.pattern(3).index() == 0u);
  CHECK(std::isnan(d.l(1)[0]));
  CHECK(d.x(3)[0] == doctest::Approx(3.5));

  std::ostringstream out;
  nsc::write_csv(out, d);
  std::istringstream again(out.str());
  const nsc::Dataset d2 = nsc::ingest_csv(again);
  std::ostringstream out2;
  nsc::write_csv(out2, d2);
  CHECK(out.str() == out2.str());
}

TEST_CASE("csv rejects missing covariates and ragged rows") {
  std::istringstream bad_x("L1,L2,X1\n1,2,NA\n");
  CHECK_THROWS_AS(nsc::ingest_csv(bad_x), nsc::CsvError);
  std::istringstream ragged("L1,L2\n1,2,3\n");
  CHECK_THROWS_AS(nsc::ingest_csv(ragged), nsc::CsvError);
  std::istringstream junk("L1,L2\n1,abc\n");
  CHECK_THROWS_AS(nsc::ingest_csv(junk), nsc::CsvError);
}

TEST_CASE("support table counts patterns and leave-one-out availability") {
  nsc::DatasetBuilder b(3, 0);
  const double l[3] = {1, 2, 3};
  b.add(Pattern::complete(3), l, {});
  b.add(Pattern::complete(3), l, {});
  b.add(Pattern::parse("011"), l, {});
  b.add(Pattern::parse("001"), l, {}, 2.5);
  const nsc::Dataset d = std::move(b).build();
  const auto s = nsc::pattern_support(d);
  CHECK(s.complete_count() == 2);
  CHECK(s.count(Pattern::parse("011")) == 1);
  CHECK(s.mass[Pattern::parse("001").index()] == doctest::Approx(2.5));
  CHECK(s.leave_one_out_ok[0]);
  CHECK_FALSE(s.leave_one_out_ok[1]);
  CHECK_FALSE(s.leave_one_out_ok[2]);
  CHECK(d.total_weight() == doctest::Approx(5.5));
}

TEST_CASE("select carries weights and observed values") {
  nsc::DatasetBuilder b(2, 1);
  const double l0[2] = {1, 2}, l1[2] = {3, 4}, x[1] = {7};
  b.add(Pattern::complete(2), l0, x, 2.0);
  b.add(Pattern::parse("10"), l1, x, 3.0);
  const nsc::Dataset d = std::move(b).build();
  const std::size_t rows[3] = {1, 1, 0};
  const nsc::Dataset s = d.select(rows);
  CHECK(s.size() == 3);
  CHECK(s.weight(0) == doctest::Approx(3.0));
  CHECK(s.pattern(0).to_string() == "10");
  CHECK(s.l(2)[1] == doctest::Approx(2.0));
  CHECK(std::isnan(s.l(0)[1]));
}

}  // TEST_SUITE
