#include "gsa/sampling.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gsa/errors.hpp"

namespace gsa {

namespace detail {
const char* sobol_direction_text();  // sobol_directions.cpp
}

SobolDirectionTable SobolDirectionTable::parse_text(const std::string& text) {
  SobolDirectionTable table;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header: d s a m_i
  int expected = 2;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int d = 0;
    Entry e;
    if (!(row >> d >> e.s >> e.a))
      throw std::runtime_error("direction table: malformed row: " + line);
    if (d != expected)
      throw std::runtime_error("direction table: expected dimension " +
                               std::to_string(expected) + ", got " +
                               std::to_string(d));
    e.m.resize(e.s);
    for (int i = 0; i < e.s; ++i) {
      if (!(row >> e.m[i]))
        throw std::runtime_error("direction table: missing m values: " + line);
      if (e.m[i] % 2 == 0)
        throw std::runtime_error("direction table: m values must be odd");
    }
    table.entries_.push_back(std::move(e));
    ++expected;
  }
  if (table.entries_.empty())
    throw std::runtime_error("direction table: no entries");
  return table;
}

SobolDirectionTable SobolDirectionTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("direction table: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

const SobolDirectionTable& SobolDirectionTable::builtin() {
  static const SobolDirectionTable table =
      parse_text(detail::sobol_direction_text());
  return table;
}

const SobolDirectionTable::Entry& SobolDirectionTable::entry(
    int dimension) const {
  if (dimension < 2 || dimension > max_dimension())
    throw UnsupportedDimension("direction table covers dimensions 2.." +
                               std::to_string(max_dimension()) + ", got " +
                               std::to_string(dimension));
  return entries_[dimension - 2];
}

namespace {

constexpr int kBits = 32;  // direction integers use a 2^-32 grid

// Direction integers v_j (j = 1..kBits) for one sequence dimension.
std::vector<std::uint32_t> direction_integers(
    int dimension, const SobolDirectionTable& table) {
  std::vector<std::uint32_t> v(kBits + 1, 0);
  if (dimension == 1) {
    for (int j = 1; j <= kBits; ++j)
      v[j] = 1u << (kBits - j);
    return v;
  }
  const auto& e = table.entry(dimension);
  const int s = e.s;
  for (int j = 1; j <= std::min(s, kBits); ++j)
    v[j] = e.m[j - 1] << (kBits - j);
  for (int j = s + 1; j <= kBits; ++j) {
    v[j] = v[j - s] ^ (v[j - s] >> s);
    for (int t = 1; t < s; ++t)
      if ((e.a >> (s - 1 - t)) & 1u) v[j] ^= v[j - t];
  }
  return v;
}

}  // namespace

SampleMatrix sobol_sequence(std::int64_t n, int k,
                            const SobolDirectionTable& table) {
  if (k < 1) throw UnsupportedDimension("sequence dimension must be >= 1");
  if (k > table.max_dimension())
    throw UnsupportedDimension("sequence dimension " + std::to_string(k) +
                               " exceeds direction table limit " +
                               std::to_string(table.max_dimension()));
  if (n < 0) throw std::invalid_argument("point count must be non-negative");
  if (n >= (std::int64_t{1} << kBits))
    throw std::invalid_argument("point count exceeds 32-bit sequence length");

  std::vector<std::vector<std::uint32_t>> v(k);
  for (int c = 0; c < k; ++c) v[c] = direction_integers(c + 1, table);

  SampleMatrix out;
  out.points.resize(n, k);
  std::vector<std::uint32_t> state(k, 0);
  for (std::int64_t row = 0; row < n; ++row) {
    // Gray-code step: flip the direction indexed by the lowest zero bit of
    // the previous point's index. Skipping the all-zeros point means row r
    // holds sequence element r + 1, whose predecessor index is r.
    const int c = std::countr_one(static_cast<std::uint64_t>(row)) + 1;
    for (int col = 0; col < k; ++col) {
      state[col] ^= v[col][c];
      out.points(row, col) = static_cast<double>(state[col]) * 0x1.0p-32;
    }
  }
  return out;
}

SampleMatrix sobol_sequence(std::int64_t n, int k) {
  return sobol_sequence(n, k, SobolDirectionTable::builtin());
}

SampleMatrix SobolDesign::ab_matrix(int i) const {
  if (i < 0 || i >= k())
    throw InvalidDimension("ab_matrix: column " + std::to_string(i) +
                           " out of range for k=" + std::to_string(k()));
  SampleMatrix out;
  out.points = a.points;
  out.points.col(i) = b.points.col(i);
  return out;
}

SampleMatrix SobolDesign::ab_pair_matrix(int i, int j) const {
  if (i == j) throw InvalidPair("pair matrix needs two distinct columns");
  if (i < 0 || j < 0 || i >= k() || j >= k())
    throw InvalidPair("pair matrix column out of range");
  SampleMatrix out;
  out.points = a.points;
  out.points.col(i) = b.points.col(i);
  out.points.col(j) = b.points.col(j);
  return out;
}

void SobolDesign::ab_row(int i, std::int64_t row,
                         std::vector<double>& out) const {
  out.resize(k());
  for (int c = 0; c < k(); ++c) out[c] = a.points(row, c);
  out[i] = b.points(row, i);
}

SobolDesign sobol_design(std::int64_t base_size, int k) {
  if (base_size < 2)
    throw std::invalid_argument("design base size must be at least 2");
  if (k < 1) throw UnsupportedDimension("design dimension must be >= 1");
  SampleMatrix joint = sobol_sequence(base_size, 2 * k);
  SobolDesign d;
  d.a.points = joint.points.leftCols(k);
  d.b.points = joint.points.rightCols(k);
  return d;
}

SampleMatrix latin_hypercube(std::int64_t n, int k, Seed seed) {
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  if (k < 1) throw UnsupportedDimension("dimension must be >= 1");
  RandomSource rng(seed);
  SampleMatrix out;
  out.points.resize(n, k);
  std::vector<std::int64_t> strata(n);
  for (int col = 0; col < k; ++col) {
    for (std::int64_t j = 0; j < n; ++j) strata[j] = j;
    rng.shuffle(strata);
    for (std::int64_t row = 0; row < n; ++row) {
      out.points(row, col) =
          (static_cast<double>(strata[row]) + rng.uniform()) /
          static_cast<double>(n);
    }
  }
  return out;
}

}  // namespace gsa
