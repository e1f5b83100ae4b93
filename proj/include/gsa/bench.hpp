#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gsa/bass.hpp"
#include "gsa/rng.hpp"
#include "gsa/sobol_analysis.hpp"

namespace gsa {

// Enumerator order is the fixed tie-break order of the fastest-method map.
enum class Method { Sobol, Kriging, Bass, Akmcs };

inline constexpr std::array<Method, 4> kAllMethods{
    Method::Sobol, Method::Kriging, Method::Bass, Method::Akmcs};

std::string method_name(Method m);
Method parse_method(const std::string& name);  // throws invalid_argument

// The benchmark's dimension and nominal-evaluation-time axes.
inline constexpr std::array<int, 6> kCanonicalDimensions{2, 5, 10, 15, 20, 30};
inline constexpr std::array<double, 13> kCanonicalEvalTimes{
    1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 1.0,
    10.0, 60.0, 3600.0, 21600.0, 43200.0, 86400.0};

struct Scenario {
  int dimension = 2;
  double nominal_eval_time_s = 1e-6;
  Seed seed;

  // Free values are allowed via configuration override but are off-grid.
  bool canonical() const;

  friend bool operator<(const Scenario& a, const Scenario& b) {
    if (a.dimension != b.dimension) return a.dimension < b.dimension;
    if (a.nominal_eval_time_s != b.nominal_eval_time_s)
      return a.nominal_eval_time_s < b.nominal_eval_time_s;
    return a.seed.value < b.seed.value;
  }
  friend bool operator==(const Scenario& a, const Scenario& b) {
    return a.dimension == b.dimension &&
           a.nominal_eval_time_s == b.nominal_eval_time_s &&
           a.seed.value == b.seed.value;
  }
};

// Per-run cost components. n_model_evals counts original-model calls only;
// emulator calls never touch it (their CPU lands in sa_cpu_s).
struct CostLedger {
  std::int64_t n_model_evals = 0;
  double emulation_cpu_s = 0.0;
  double sa_cpu_s = 0.0;
};

// Virtual total: each original-model call priced at the nominal duration,
// plus the measured CPU of the emulation and analysis phases.
double total_time(const CostLedger& ledger, double t_nominal_s);

// One entry of the per-round index history recorded when tracing is on.
struct TracePoint {
  std::int64_t sample_size = 0;
  std::vector<double> total_order;
};

struct MethodResult {
  Method method = Method::Sobol;
  SobolIndices indices;
  std::vector<double> ci_low, ci_high;  // 95% band on total_order
  CostLedger ledger;
  bool converged = false;
  std::int64_t converged_sample_size = 0;
  std::vector<TracePoint> trace;  // empty unless requested
};

struct RunOptions {
  McmcConfig mcmc = McmcConfig::paper_profile();
  std::string profile_name = "paper";  // recorded in cell files
  std::int64_t schedule_cap = 0;       // 0 = full base-size schedule
  bool record_trace = false;
};

// Executes one method against one scenario. Sobol' analyzes the raw model;
// Kriging and AKMCS freeze their surrogate and rerun the Sobol' analysis on
// it; BASS computes indices in closed form from its posterior.
MethodResult run_method(Method method, const Scenario& scenario,
                        const RunOptions& options = {});

struct GridConfig {
  std::vector<int> dimensions;
  std::vector<double> eval_times_s;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::vector<std::uint64_t> seeds{1};
  RunOptions options;

  std::vector<Scenario> scenarios() const;  // cross product, sorted

  static GridConfig from_json_text(const std::string& text);
  static GridConfig from_json_file(const std::filesystem::path& path);
};

struct GridResult {
  std::map<Scenario, std::map<Method, MethodResult>> cells;
  std::map<Scenario, std::map<Method, std::string>> errors;
};

// Sweeps every (scenario, method) cell, persisting each finished cell as a
// JSON file under out_dir (write-then-rename) and skipping cells whose file
// already parses, so an interrupted sweep resumes where it stopped. Results
// are memoized per (method, dimension, seed, profile): the nominal time only
// scales the ledger arithmetic, never the computation.
GridResult run_grid(const GridConfig& config,
                    const std::filesystem::path& out_dir);

// Reads every cell file under dir (non-recursive) into a GridResult.
GridResult load_grid(const std::filesystem::path& dir);

// Cell-file (de)serialization, shared by run_grid and the CLI.
std::string cell_file_name(Method method, const Scenario& scenario,
                           const std::string& profile);
void write_cell_file(const std::filesystem::path& path,
                     const Scenario& scenario, const std::string& profile,
                     const MethodResult& result);
struct CellRecord {
  Scenario scenario;
  std::string profile;
  MethodResult result;
};
CellRecord read_cell_file(const std::filesystem::path& path);

struct FastestChoice {
  Method method = Method::Sobol;
  bool tie = false;  // another method matched the winning total exactly
};

// Per-cell argmin of total_time over all four methods; ties resolve to the
// earliest method in kAllMethods order and are flagged.
std::map<Scenario, FastestChoice> fastest_map(const GridResult& grid);

// floor(log10(fastest(cell) / fastest(reference))) per cell.
std::map<Scenario, int> magnitude_grid(const GridResult& grid,
                                       const Scenario& reference);

// One side of a speed-gain comparison: a fixed method, the per-cell fastest,
// or the per-cell second fastest.
struct GainSide {
  enum class Kind { Fixed, Fastest, SecondFastest };
  Kind kind = Kind::Fixed;
  Method method = Method::Sobol;

  static GainSide fixed(Method m) { return {Kind::Fixed, m}; }
  static GainSide fastest() { return {Kind::Fastest, Method::Sobol}; }
  static GainSide second_fastest() {
    return {Kind::SecondFastest, Method::Sobol};
  }
};

// floor(log10(total_time(baseline) / total_time(challenger))) per cell.
std::map<Scenario, int> speed_gain_grid(const GridResult& grid,
                                        GainSide baseline,
                                        GainSide challenger);

}  // namespace gsa
