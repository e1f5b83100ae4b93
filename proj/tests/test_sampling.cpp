#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "gsa/errors.hpp"
#include "gsa/sampling.hpp"

using namespace gsa;

// Reference rows were generated with an independent Gray-code Sobol'
// implementation (zero point skipped, unscrambled, new Joe-Kuo directions).
TEST_CASE("sobol sequence matches reference rows in six dimensions") {
  SampleMatrix m = sobol_sequence(8, 6);
  REQUIRE(m.n() == 8);
  REQUIRE(m.k() == 6);
  const double expect[8][6] = {
      {0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
      {0.75, 0.25, 0.25, 0.25, 0.75, 0.75},
      {0.25, 0.75, 0.75, 0.75, 0.25, 0.25},
      {0.375, 0.375, 0.625, 0.875, 0.375, 0.125},
      {0.875, 0.875, 0.125, 0.375, 0.875, 0.625},
      {0.625, 0.125, 0.875, 0.625, 0.625, 0.875},
      {0.125, 0.625, 0.375, 0.125, 0.125, 0.375},
      {0.1875, 0.3125, 0.9375, 0.4375, 0.5625, 0.3125},
  };
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 6; ++c) CHECK(m.points(r, c) == expect[r][c]);
}

TEST_CASE("sobol sequence matches reference rows at the 64-dimension limit") {
  SampleMatrix m = sobol_sequence(129, 64);
  const int cols[6] = {0, 1, 2, 9, 31, 63};
  const double row32[6] = {0.546875, 0.765625, 0.203125, 0.546875, 0.015625, 0.953125};
  const double row63[6] = {0.0234375, 0.3984375, 0.8203125, 0.1171875, 0.8046875, 0.9453125};
  const double row128[6] = {0.51171875, 0.83203125, 0.79296875, 0.31640625, 0.53515625,
                            0.59765625};
  for (int c = 0; c < 6; ++c) {
    CHECK(m.points(32, cols[c]) == row32[c]);
    CHECK(m.points(63, cols[c]) == row63[c]);
    CHECK(m.points(128, cols[c]) == row128[c]);
  }
}

TEST_CASE("first 2^m - 1 points are column-wise balanced") {
  // With the zero point skipped, the remaining 63 points of the first 64-point
  // block hit every multiple j/64 (j = 1..63) exactly once in every column.
  SampleMatrix m = sobol_sequence(63, 8);
  for (int c = 0; c < 8; ++c) {
    std::set<int> levels;
    for (int r = 0; r < 63; ++r) {
      double scaled = m.points(r, c) * 64.0;
      CHECK(scaled == std::floor(scaled));
      levels.insert(static_cast<int>(scaled));
    }
    REQUIRE(levels.size() == 63);
    CHECK(*levels.begin() == 1);
    CHECK(*levels.rbegin() == 63);
  }
}

TEST_CASE("sobol points stay strictly inside the unit cube") {
  SampleMatrix m = sobol_sequence(1000, 16);
  for (int r = 0; r < m.n(); ++r)
    for (int c = 0; c < m.k(); ++c) {
      CHECK(m.points(r, c) > 0.0);
      CHECK(m.points(r, c) < 1.0);
    }
}

TEST_CASE("dimension limits and argument guards") {
  CHECK_NOTHROW(sobol_sequence(4, 64));
  CHECK_THROWS_AS(sobol_sequence(4, 65), UnsupportedDimension);
  CHECK_THROWS_AS(sobol_sequence(4, 0), UnsupportedDimension);
  CHECK_THROWS_AS(sobol_sequence(-1, 4), std::invalid_argument);

  CHECK_NOTHROW(sobol_design(4, 32));  // joint draw uses 2k = 64 columns
  CHECK_THROWS_AS(sobol_design(4, 33), UnsupportedDimension);
  CHECK_THROWS_AS(sobol_design(1, 4), std::invalid_argument);

  CHECK(SobolDirectionTable::builtin().max_dimension() == 64);
  CHECK_THROWS_AS(SobolDirectionTable::builtin().entry(1), UnsupportedDimension);
  CHECK_THROWS_AS(SobolDirectionTable::builtin().entry(65), UnsupportedDimension);
}

TEST_CASE("design halves come from one joint draw") {
  const std::int64_t n = 32;
  const int k = 5;
  SobolDesign d = sobol_design(n, k);
  SampleMatrix joint = sobol_sequence(n, 2 * k);
  REQUIRE(d.base_size() == n);
  REQUIRE(d.k() == k);
  CHECK(d.evaluation_rows() == n * (k + 2));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < k; ++c) {
      CHECK(d.a.points(r, c) == joint.points(r, c));
      CHECK(d.b.points(r, c) == joint.points(r, c + k));
    }
}

TEST_CASE("ab matrices swap exactly the named columns") {
  SobolDesign d = sobol_design(16, 4);
  for (int i = 0; i < 4; ++i) {
    SampleMatrix ab = d.ab_matrix(i);
    std::vector<double> row(4);
    for (int r = 0; r < 16; ++r) {
      d.ab_row(i, r, row);
      for (int c = 0; c < 4; ++c) {
        double want = (c == i) ? d.b.points(r, c) : d.a.points(r, c);
        CHECK(ab.points(r, c) == want);
        CHECK(row[c] == want);
      }
    }
  }
  SampleMatrix ab01 = d.ab_pair_matrix(0, 1);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 4; ++c) {
      double want = (c <= 1) ? d.b.points(r, c) : d.a.points(r, c);
      CHECK(ab01.points(r, c) == want);
    }

  CHECK_THROWS_AS(d.ab_matrix(-1), InvalidDimension);
  CHECK_THROWS_AS(d.ab_matrix(4), InvalidDimension);
  CHECK_THROWS_AS(d.ab_pair_matrix(2, 2), InvalidPair);
  CHECK_THROWS_AS(d.ab_pair_matrix(0, 4), InvalidPair);
}

TEST_CASE("latin hypercube stratifies every column") {
  const std::int64_t n = 40;
  const int k = 6;
  SampleMatrix m = latin_hypercube(n, k, Seed{7});
  REQUIRE(m.n() == n);
  REQUIRE(m.k() == k);
  for (int c = 0; c < k; ++c) {
    std::vector<int> strata(n, 0);
    for (int r = 0; r < n; ++r) {
      double v = m.points(r, c);
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      ++strata[static_cast<int>(std::floor(v * n))];
    }
    // one point per stratum
    CHECK(std::all_of(strata.begin(), strata.end(), [](int s) { return s == 1; }));
  }
}

TEST_CASE("latin hypercube is seed-deterministic") {
  SampleMatrix a = latin_hypercube(20, 3, Seed{42});
  SampleMatrix b = latin_hypercube(20, 3, Seed{42});
  SampleMatrix c = latin_hypercube(20, 3, Seed{43});
  CHECK(a.points == b.points);
  CHECK(a.points != c.points);
  CHECK_THROWS_AS(latin_hypercube(0, 3, Seed{1}), std::invalid_argument);
  CHECK_THROWS_AS(latin_hypercube(5, 0, Seed{1}), UnsupportedDimension);
}

TEST_CASE("direction table parser agrees with the builtin table") {
  // first line is the customary "d s a m_i" header
  SobolDirectionTable parsed =
      SobolDirectionTable::parse_text("d s a m_i\n2 1 0 1\n3 2 1 1 3\n");
  CHECK(parsed.max_dimension() == 3);
  const auto& builtin = SobolDirectionTable::builtin();
  for (int dim = 2; dim <= 3; ++dim) {
    const auto& p = parsed.entry(dim);
    const auto& b = builtin.entry(dim);
    CHECK(p.s == b.s);
    CHECK(p.a == b.a);
    CHECK(p.m == b.m);
  }
  // sequences generated from the parsed prefix match the builtin ones
  SampleMatrix from_parsed = sobol_sequence(16, 3, parsed);
  SampleMatrix from_builtin = sobol_sequence(16, 3);
  CHECK(from_parsed.points == from_builtin.points);

  CHECK_THROWS_AS(SobolDirectionTable::parse_text(""), std::runtime_error);
  CHECK_THROWS_AS(SobolDirectionTable::parse_text("d s a m_i\n2 1 0 2\n"),
                  std::runtime_error);  // even m value
  CHECK_THROWS_AS(SobolDirectionTable::parse_text("d s a m_i\n5 1 0 1\n"),
                  std::runtime_error);  // dimension gap
}
