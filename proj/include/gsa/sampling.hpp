#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsa/rng.hpp"

namespace gsa {

// n points in [0,1)^k, one row per point.
struct SampleMatrix {
  Eigen::MatrixXd points;

  std::int64_t n() const { return points.rows(); }
  int k() const { return static_cast<int>(points.cols()); }
};

// Primitive-polynomial degrees, coefficients and initial direction numbers
// for the Sobol' generator. Dimension 1 is the van der Corput sequence and
// needs no table entry; dimensions 2..max_dimension() come from the table.
class SobolDirectionTable {
 public:
  struct Entry {
    int s = 0;                    // polynomial degree
    std::uint32_t a = 0;          // interior coefficient bits
    std::vector<std::uint32_t> m; // s initial direction numbers (odd)
  };

  static const SobolDirectionTable& builtin();
  static SobolDirectionTable parse_file(const std::string& path);
  static SobolDirectionTable parse_text(const std::string& text);

  int max_dimension() const { return static_cast<int>(entries_.size()) + 1; }
  const Entry& entry(int dimension) const;  // dimension in [2, max_dimension()]

 private:
  std::vector<Entry> entries_;  // entries_[j] describes dimension j + 2
};

// First n points of the unscrambled Sobol' sequence in Gray-code order with
// the initial all-zeros point skipped.
SampleMatrix sobol_sequence(std::int64_t n, int k);
SampleMatrix sobol_sequence(std::int64_t n, int k,
                            const SobolDirectionTable& table);

// Saltelli design: A and B are the left/right halves of a joint 2k-dimension
// draw, and AB_i equals A with column i replaced by B's column i. Feeding the
// full design to a model costs base_size * (k + 2) evaluations.
struct SobolDesign {
  SampleMatrix a;
  SampleMatrix b;

  int k() const { return a.k(); }
  std::int64_t base_size() const { return a.n(); }
  std::int64_t evaluation_rows() const { return base_size() * (k() + 2); }

  SampleMatrix ab_matrix(int i) const;
  SampleMatrix ab_pair_matrix(int i, int j) const;
  void ab_row(int i, std::int64_t row, std::vector<double>& out) const;
};

SobolDesign sobol_design(std::int64_t base_size, int k);

// Latin hypercube: each column visits every stratum [j/n, (j+1)/n) once,
// with independent per-column permutations and in-stratum jitter.
SampleMatrix latin_hypercube(std::int64_t n, int k, Seed seed);

}  // namespace gsa
