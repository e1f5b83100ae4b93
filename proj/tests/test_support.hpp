// Shared helpers for the test suites: design evaluation and temp directories.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gsa/evaluator.hpp"
#include "gsa/sampling.hpp"

namespace gsa_test {

struct DesignOutputs {
  std::vector<double> ya;
  std::vector<double> yb;
  std::vector<std::vector<double>> yab;  // one vector per input index
};

// Evaluates f on the A, B, and AB_i rows of a Saltelli design.
inline DesignOutputs evaluate_design(const gsa::Evaluator& f, const gsa::SobolDesign& design) {
  const int k = design.k();
  const std::int64_t n = design.base_size();
  DesignOutputs out;
  out.ya.resize(n);
  out.yb.resize(n);
  out.yab.assign(k, std::vector<double>(n));
  std::vector<double> row(k);
  for (std::int64_t r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) row[c] = design.a.points(r, c);
    out.ya[r] = f(row);
    for (int c = 0; c < k; ++c) row[c] = design.b.points(r, c);
    out.yb[r] = f(row);
    for (int i = 0; i < k; ++i) {
      design.ab_row(i, r, row);
      out.yab[i][r] = f(row);
    }
  }
  return out;
}

// Evaluates f on the AB_ij rows (A with columns i and j taken from B).
inline std::vector<double> evaluate_pair_rows(const gsa::Evaluator& f,
                                              const gsa::SobolDesign& design, int i, int j) {
  const int k = design.k();
  const std::int64_t n = design.base_size();
  gsa::SampleMatrix m = design.ab_pair_matrix(i, j);
  std::vector<double> y(n);
  std::vector<double> row(k);
  for (std::int64_t r = 0; r < n; ++r) {
    for (int c = 0; c < k; ++c) row[c] = m.points(r, c);
    y[r] = f(row);
  }
  return y;
}

// A fresh empty directory under the system temp root; removed manually by callers
// that care, otherwise left for the OS to clean up.
inline std::filesystem::path fresh_temp_dir(const std::string& stem) {
  static std::mt19937_64 rng{std::random_device{}()};
  std::filesystem::path base = std::filesystem::temp_directory_path();
  std::filesystem::path dir;
  do {
    dir = base / (stem + "-" + std::to_string(rng()));
  } while (std::filesystem::exists(dir));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace gsa_test
