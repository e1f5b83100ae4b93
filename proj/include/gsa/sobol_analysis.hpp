#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "gsa/evaluator.hpp"
#include "gsa/rng.hpp"
#include "gsa/sampling.hpp"

namespace gsa {

struct SobolIndices {
  std::vector<double> first_order;
  std::vector<double> total_order;
  std::map<std::pair<int, int>, double> second_order;  // filled on request
  double total_variance = 0.0;
  std::int64_t base_size = 0;
};

struct BootstrapCi {
  std::vector<double> total_lower, total_upper;
  std::vector<double> first_lower, first_upper;
  int replicates = 0;
  double level = 0.0;

  double max_total_width() const;
};

// First-order indices use the Saltelli 2010 estimator
//   V_i = (1/N) sum_j f(B)_j * (f(AB_i)_j - f(A)_j)
// and total-order indices the Jansen estimator
//   T_i = (1/(2N)) sum_j (f(A)_j - f(AB_i)_j)^2 / V
// with V the sample variance of the pooled A and B outputs.
SobolIndices estimate_indices(std::span<const double> ya,
                              std::span<const double> yb,
                              const std::vector<std::vector<double>>& yab);

// Closed second-order effects V_ij = V^c_ij - V_i - V_j from pair matrices
// AB_ij (A with columns i and j taken from B). Keys must satisfy i < j.
std::map<std::pair<int, int>, double> estimate_second_order(
    std::span<const double> ya, std::span<const double> yb,
    const std::vector<std::vector<double>>& yab,
    const std::map<std::pair<int, int>, std::vector<double>>& yab_pairs);

// Percentile bootstrap over joint row resamples (the same rows of A, B and
// every AB_i are kept together in each replicate).
BootstrapCi bootstrap_ci(std::span<const double> ya,
                         std::span<const double> yb,
                         const std::vector<std::vector<double>>& yab,
                         int replicates, double level, Seed seed);

inline constexpr int kBootstrapReplicates = 100;
inline constexpr double kBootstrapLevel = 0.95;
inline constexpr double kCiWidthThreshold = 0.05;

struct ConvergenceStage {
  std::int64_t base_size = 0;
  SobolIndices indices;
  BootstrapCi ci;
};

struct ConvergenceReport {
  bool converged = false;
  std::vector<ConvergenceStage> history;
  std::int64_t n_evaluations = 0;  // cumulative rows over all stages
  double eval_cpu_s = 0.0;         // CPU spent inside the evaluator
  double analysis_cpu_s = 0.0;     // CPU spent sampling/estimating

  const ConvergenceStage& final_stage() const;
  std::int64_t final_base_size() const { return final_stage().base_size; }
};

// Base sizes 2^7 .. 2^17.
std::vector<std::int64_t> default_schedule();

// Walks the schedule with a fresh design per stage until the widest
// total-order bootstrap interval drops below ci_width_threshold.
ConvergenceReport run_to_convergence(
    const Evaluator& f, int k, std::span<const std::int64_t> schedule,
    Seed seed, double ci_width_threshold = kCiWidthThreshold);

}  // namespace gsa
