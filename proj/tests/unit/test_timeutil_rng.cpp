#include "doctest.h"

#include <set>

#include "botlab/error.hpp"
#include "botlab/rng.hpp"
#include "botlab/timeutil.hpp"

using namespace botlab;

TEST_SUITE("timeutil") {
  TEST_CASE("parses Z and numeric offsets") {
    CHECK(parse_timestamp("2020-01-01T00:00:00Z").seconds == 1577836800);
    CHECK(parse_timestamp("2020-01-01T00:00:00+00:00").seconds == 1577836800);
    CHECK(parse_timestamp("2020-01-01T01:30:00+01:30").seconds == 1577836800);
    CHECK(parse_timestamp("2019-12-31T19:00:00-05:00").seconds == 1577836800);
    CHECK(parse_timestamp("2020-01-01T00:00:00.999Z").seconds == 1577836800);
  }

  TEST_CASE("formats round trip") {
    const Timestamp t = from_civil(2021, 11, 10, 23, 59, 58);
    CHECK(format_timestamp(t) == "2021-11-10T23:59:58Z");
    CHECK(parse_timestamp(format_timestamp(t)) == t);
    CHECK(format_timestamp(Timestamp{0}) == "1970-01-01T00:00:00Z");
  }

  TEST_CASE("rejects malformed text") {
    for (const char* bad : {"", "2020-01-01", "2020-13-01T00:00:00Z", "2020-02-30T00:00:00Z",
                            "2020-01-01T24:00:00Z", "2020-01-01T00:00:00", "yesterday"}) {
      CAPTURE(bad);
      CHECK_THROWS_AS(parse_timestamp(bad), ValidationError);
    }
  }

  TEST_CASE("day boundaries") {
    const Timestamp t = from_civil(2021, 3, 4, 17, 5, 6);
    CHECK(utc_day_start(t) == from_civil(2021, 3, 4));
    CHECK(utc_hour(t) == 17);
    CHECK(utc_day_start(from_civil(1969, 12, 31, 23)) == from_civil(1969, 12, 31));
  }
}

TEST_SUITE("rng") {
  TEST_CASE("same seed, same stream") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  }

  TEST_CASE("derived streams differ") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(42, s));
    CHECK(seen.size() == 1000);
  }

  TEST_CASE("bounded draws stay in range") {
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
      const auto v = r.between(-3, 3);
      CHECK(v >= -3);
      CHECK(v <= 3);
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("normal draws have plausible moments") {
    Rng r(3);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double x = r.normal();
      sum += x;
      sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
  }
}
