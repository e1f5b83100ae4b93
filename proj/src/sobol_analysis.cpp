#include "gsa/sobol_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gsa/cpu_timer.hpp"
#include "gsa/errors.hpp"

namespace gsa {
namespace {

struct Pooled {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

Pooled pooled_stats(std::span<const double> ya, std::span<const double> yb) {
  const std::int64_t n = static_cast<std::int64_t>(ya.size());
  double sum = 0.0;
  for (double v : ya) sum += v;
  for (double v : yb) sum += v;
  const double mean = sum / static_cast<double>(2 * n);
  double ss = 0.0;
  for (double v : ya) ss += (v - mean) * (v - mean);
  for (double v : yb) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(2 * n - 1)};
}

void require_degenerate_check(std::span<const double> ya,
                              std::span<const double> yb) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : ya) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : yb) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  if (hi - lo <= std::numeric_limits<double>::epsilon() * scale)
    throw DegenerateVariance(
        "all outputs identical to machine precision; indices undefined");
}

void check_shapes(std::span<const double> ya, std::span<const double> yb,
                  const std::vector<std::vector<double>>& yab) {
  if (ya.size() < 2 || ya.size() != yb.size())
    throw std::invalid_argument("output blocks must share a size of >= 2");
  if (yab.empty()) throw std::invalid_argument("no AB output blocks given");
  for (const auto& col : yab)
    if (col.size() != ya.size())
      throw std::invalid_argument("AB output block size mismatch");
}

// Type-7 quantile (linear interpolation between order statistics).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double BootstrapCi::max_total_width() const {
  double w = 0.0;
  for (std::size_t i = 0; i < total_lower.size(); ++i)
    w = std::max(w, total_upper[i] - total_lower[i]);
  return w;
}

SobolIndices estimate_indices(std::span<const double> ya,
                              std::span<const double> yb,
                              const std::vector<std::vector<double>>& yab) {
  check_shapes(ya, yb, yab);
  require_degenerate_check(ya, yb);
  const std::int64_t n = static_cast<std::int64_t>(ya.size());
  const int k = static_cast<int>(yab.size());
  const Pooled pool = pooled_stats(ya, yb);

  SobolIndices out;
  out.base_size = n;
  out.total_variance = pool.variance;
  out.first_order.resize(k);
  out.total_order.resize(k);
  for (int i = 0; i < k; ++i) {
    const std::vector<double>& yi = yab[i];
    double v_first = 0.0;
    double v_total = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
      v_first += yb[j] * (yi[j] - ya[j]);
      const double d = ya[j] - yi[j];
      v_total += d * d;
    }
    out.first_order[i] = v_first / static_cast<double>(n) / pool.variance;
    out.total_order[i] =
        v_total / (2.0 * static_cast<double>(n)) / pool.variance;
  }
  return out;
}

std::map<std::pair<int, int>, double> estimate_second_order(
    std::span<const double> ya, std::span<const double> yb,
    const std::vector<std::vector<double>>& yab,
    const std::map<std::pair<int, int>, std::vector<double>>& yab_pairs) {
  const SobolIndices base = estimate_indices(ya, yb, yab);
  const std::int64_t n = static_cast<std::int64_t>(ya.size());
  const int k = static_cast<int>(yab.size());

  std::map<std::pair<int, int>, double> out;
  for (const auto& [pair, yij] : yab_pairs) {
    const auto [i, j] = pair;
    if (i == j)
      throw InvalidPair("second-order pair needs two distinct variables");
    if (i < 0 || j < 0 || i >= k || j >= k || i > j)
      throw InvalidPair("second-order pair (" + std::to_string(i) + "," +
                        std::to_string(j) + ") out of range");
    if (yij.size() != ya.size())
      throw std::invalid_argument("AB pair output block size mismatch");
    double v_closed = 0.0;
    for (std::int64_t r = 0; r < n; ++r)
      v_closed += yb[r] * (yij[r] - ya[r]);
    v_closed /= static_cast<double>(n) * base.total_variance;
    out[pair] = v_closed - base.first_order[i] - base.first_order[j];
  }
  return out;
}

BootstrapCi bootstrap_ci(std::span<const double> ya,
                         std::span<const double> yb,
                         const std::vector<std::vector<double>>& yab,
                         int replicates, double level, Seed seed) {
  check_shapes(ya, yb, yab);
  require_degenerate_check(ya, yb);
  if (replicates < 2)
    throw InvalidReplicates("bootstrap needs at least 2 replicates, got " +
                            std::to_string(replicates));
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap level must lie in (0,1)");

  const std::int64_t n = static_cast<std::int64_t>(ya.size());
  const int k = static_cast<int>(yab.size());
  RandomSource rng(seed);

  std::vector<std::vector<double>> first(k), total(k);
  for (int i = 0; i < k; ++i) {
    first[i].reserve(replicates);
    total[i].reserve(replicates);
  }

  std::vector<std::int64_t> rows(n);
  for (int r = 0; r < replicates; ++r) {
    for (std::int64_t j = 0; j < n; ++j)
      rows[j] = static_cast<std::int64_t>(rng.below(n));

    double sum = 0.0;
    for (std::int64_t j : rows) sum += ya[j] + yb[j];
    const double mean = sum / static_cast<double>(2 * n);
    double ss = 0.0;
    for (std::int64_t j : rows) {
      ss += (ya[j] - mean) * (ya[j] - mean);
      ss += (yb[j] - mean) * (yb[j] - mean);
    }
    const double variance = ss / static_cast<double>(2 * n - 1);

    for (int i = 0; i < k; ++i) {
      const std::vector<double>& yi = yab[i];
      double v_first = 0.0;
      double v_total = 0.0;
      for (std::int64_t j : rows) {
        v_first += yb[j] * (yi[j] - ya[j]);
        const double d = ya[j] - yi[j];
        v_total += d * d;
      }
      if (variance > 0.0) {
        first[i].push_back(v_first / static_cast<double>(n) / variance);
        total[i].push_back(v_total / (2.0 * static_cast<double>(n)) /
                           variance);
      } else {
        first[i].push_back(0.0);
        total[i].push_back(0.0);
      }
    }
  }

  BootstrapCi ci;
  ci.replicates = replicates;
  ci.level = level;
  ci.total_lower.resize(k);
  ci.total_upper.resize(k);
  ci.first_lower.resize(k);
  ci.first_upper.resize(k);
  const double ql = (1.0 - level) / 2.0;
  const double qu = 1.0 - ql;
  for (int i = 0; i < k; ++i) {
    std::sort(first[i].begin(), first[i].end());
    std::sort(total[i].begin(), total[i].end());
    ci.first_lower[i] = quantile_sorted(first[i], ql);
    ci.first_upper[i] = quantile_sorted(first[i], qu);
    ci.total_lower[i] = quantile_sorted(total[i], ql);
    ci.total_upper[i] = quantile_sorted(total[i], qu);
  }
  return ci;
}

const ConvergenceStage& ConvergenceReport::final_stage() const {
  if (history.empty())
    throw std::logic_error("convergence report has no stages");
  return history.back();
}

std::vector<std::int64_t> default_schedule() {
  std::vector<std::int64_t> s;
  for (int p = 7; p <= 17; ++p) s.push_back(std::int64_t{1} << p);
  return s;
}

ConvergenceReport run_to_convergence(const Evaluator& f, int k,
                                     std::span<const std::int64_t> schedule,
                                     Seed seed, double ci_width_threshold) {
  if (k < 1) throw InvalidDimension("need at least one input variable");
  if (schedule.empty()) throw std::invalid_argument("empty schedule");

  ConvergenceReport report;
  std::vector<double> buf(k);
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const std::int64_t n = schedule[stage];
    const CpuStopwatch stage_clock;
    double eval_cpu = 0.0;

    const SobolDesign design = sobol_design(n, k);
    std::vector<double> ya(n), yb(n);
    std::vector<std::vector<double>> yab(k, std::vector<double>(n));
    {
      const CpuStopwatch clock;
      for (std::int64_t j = 0; j < n; ++j) {
        for (int c = 0; c < k; ++c) buf[c] = design.a.points(j, c);
        ya[j] = f(buf);
        for (int c = 0; c < k; ++c) buf[c] = design.b.points(j, c);
        yb[j] = f(buf);
      }
      for (int i = 0; i < k; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
          design.ab_row(i, j, buf);
          yab[i][j] = f(buf);
        }
      }
      eval_cpu = clock.elapsed();
    }

    ConvergenceStage entry;
    entry.base_size = n;
    entry.indices = estimate_indices(ya, yb, yab);
    entry.ci = bootstrap_ci(ya, yb, yab, kBootstrapReplicates, kBootstrapLevel,
                            derive_seed(seed, stage));
    report.history.push_back(std::move(entry));
    report.n_evaluations += design.evaluation_rows();
    report.eval_cpu_s += eval_cpu;
    report.analysis_cpu_s += stage_clock.elapsed() - eval_cpu;

    if (report.history.back().ci.max_total_width() < ci_width_threshold) {
      report.converged = true;
      break;
    }
  }
  return report;
}

}  // namespace gsa
