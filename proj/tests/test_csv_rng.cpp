#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "stratkit/csv.hpp"
#include "stratkit/errors.hpp"
#include "stratkit/rng.hpp"
#include "test_util.hpp"

using namespace stratkit;

TEST_SUITE("csv") {

TEST_CASE("quoted fields round-trip") {
  const std::string text =
      "id,label\n"
      "1,\"Can be accessed, except if it rains, erosion, etc\"\n"
      "2,\"say \"\"hi\"\"\"\n"
      "3,plain\n";
  const csv::Table t = csv::parse(text);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0][1] == "Can be accessed, except if it rains, erosion, etc");
  CHECK(t.rows[1][1] == "say \"hi\"");
  CHECK(t.rows[2][1] == "plain");

  TempDir dir("csv_roundtrip");
  csv::write_file(dir.file("t.csv"), t);
  const csv::Table back = csv::read_file(dir.file("t.csv"));
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
}

TEST_CASE("ragged rows rejected") {
  CHECK_THROWS_AS(csv::parse("a,b\n1\n"), IoError);
  CHECK_THROWS_AS(csv::parse("a,b\n1,2,3\n"), IoError);
}

TEST_CASE("format_double round-trips exactly") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(gen);
    CHECK(csv::parse_double(csv::format_double(v), "test") == v);
  }
  CHECK(csv::format_double(0.1) == "0.1");
  CHECK(csv::format_double(38.5756) == "38.5756");
}

TEST_CASE("column lookup") {
  const csv::Table t = csv::parse("a,b,c\n1,2,3\n");
  CHECK(t.column("b") == 1);
  CHECK(!t.column("zz").has_value());
}

}  // TEST_SUITE

TEST_SUITE("rng") {

TEST_CASE("engine sequence is the standard one") {
  // The C++ standard pins this value for a default-seeded mt19937_64, which
  // makes every stream in this codebase portable across platforms.
  std::mt19937_64 reference;  // seed 5489
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = reference();
  CHECK(v == 9981545732273789042ull);
}

TEST_CASE("same seed same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(42), d(43);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("uniform01 stays inside the open interval") {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int covers the range without escaping it") {
  Rng rng(9);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t v = rng.uniform_int(3, 7);
    CHECK(v >= 3);
    CHECK(v <= 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
  CHECK_THROWS_AS(rng.uniform_int(5, 4), DataError);
}

TEST_CASE("normal draws have sane moments") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
}

}  // TEST_SUITE
