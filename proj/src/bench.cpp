#include "gsa/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

#include "gsa/akmcs.hpp"
#include "gsa/cpu_timer.hpp"
#include "gsa/errors.hpp"
#include "gsa/test_model.hpp"

namespace gsa {
namespace {

using nlohmann::json;

// Per-method seed tags keep the methods' random streams independent even
// though they share one scenario seed.
constexpr std::uint64_t kTagSobol = 0x736f626cULL;
constexpr std::uint64_t kTagKriging = 0x6b726967ULL;
constexpr std::uint64_t kTagBass = 0x62617373ULL;
constexpr std::uint64_t kTagAkmcs = 0x616b6d63ULL;
constexpr std::uint64_t kTagEmulatorSa = 0x656d7361ULL;

// Base size of the fixed-size estimates recorded in trace mode. Small on
// purpose: traces are diagnostics, and the MC noise (~0.02) sits well below
// the swings the trace is meant to show.
constexpr std::int64_t kTraceBaseSize = 4096;

std::vector<std::int64_t> capped_schedule(std::int64_t cap) {
  std::vector<std::int64_t> schedule = default_schedule();
  if (cap > 0) {
    std::erase_if(schedule, [&](std::int64_t b) { return b > cap; });
    if (schedule.empty()) schedule.push_back(cap);
  }
  return schedule;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Single fixed-size total-order estimate from a frozen Kriging surrogate,
// used for trace points only.
std::vector<double> quick_total_orders(const KrigingModel& model, int d) {
  const SobolDesign design = sobol_design(kTraceBaseSize, d);
  Eigen::VectorXd ya, yb, yi;
  model.predict_block(design.a.points, &ya, nullptr);
  model.predict_block(design.b.points, &yb, nullptr);
  std::vector<std::vector<double>> yab(d);
  for (int i = 0; i < d; ++i) {
    model.predict_block(design.ab_matrix(i).points, &yi, nullptr);
    yab[i].assign(yi.data(), yi.data() + yi.size());
  }
  try {
    return estimate_indices(as_span(ya), as_span(yb), yab).total_order;
  } catch (const DegenerateVariance&) {
    return std::vector<double>(d, 0.0);  // constant surrogate; nothing to rank
  }
}

std::vector<double> quick_total_orders(const BassPosterior& posterior, int d) {
  try {
    return bass_sobol(posterior, d).mean.total_order;
  } catch (const DegenerateVariance&) {
    return std::vector<double>(d, 0.0);
  }
}

void fill_from_stage(MethodResult* out, const ConvergenceStage& stage) {
  out->indices = stage.indices;
  out->ci_low = stage.ci.total_lower;
  out->ci_high = stage.ci.total_upper;
}

// Sensitivity analysis on a frozen surrogate: same convergence walk as the
// raw-model path, with every surrogate call's CPU charged to the SA phase.
void emulator_sa(const KrigingModel& frozen, int d, Seed seed,
                 std::span<const std::int64_t> schedule, MethodResult* out) {
  const Evaluator emul = [&frozen](std::span<const double> p) {
    return frozen.predict_mean(p);
  };
  const ConvergenceReport sa = run_to_convergence(emul, d, schedule, seed);
  out->ledger.sa_cpu_s = sa.eval_cpu_s + sa.analysis_cpu_s;
  out->converged = out->converged && sa.converged;
  fill_from_stage(out, sa.final_stage());
}

std::string describe_cell(const Scenario& sc, Method m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s at d=%d t=%.9g seed=%llu",
                method_name(m).c_str(), sc.dimension, sc.nominal_eval_time_s,
                static_cast<unsigned long long>(sc.seed.value));
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_time_token(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", t);
  return buf;
}

json cell_to_json(const Scenario& sc, const std::string& profile,
                  const MethodResult& r) {
  json j;
  j["method"] = method_name(r.method);
  j["dimension"] = sc.dimension;
  j["nominal_eval_time_s"] = sc.nominal_eval_time_s;
  j["seed"] = sc.seed.value;
  j["profile"] = profile;
  j["n_model_evals"] = r.ledger.n_model_evals;
  j["emulation_cpu_s"] = r.ledger.emulation_cpu_s;
  j["sa_cpu_s"] = r.ledger.sa_cpu_s;
  j["converged"] = r.converged;
  j["converged_sample_size"] = r.converged_sample_size;
  j["indices"] = {{"first", r.indices.first_order},
                  {"total", r.indices.total_order},
                  {"ci_low", r.ci_low},
                  {"ci_high", r.ci_high}};
  j["total_variance"] = r.indices.total_variance;
  if (!r.trace.empty()) {
    json trace = json::array();
    for (const TracePoint& p : r.trace)
      trace.push_back({{"n", p.sample_size}, {"total", p.total_order}});
    j["trace"] = std::move(trace);
  }
  return j;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Sobol: return "sobol";
    case Method::Kriging: return "kriging";
    case Method::Bass: return "bass";
    case Method::Akmcs: return "akmcs";
  }
  throw std::invalid_argument("unknown method enumerator");
}

Method parse_method(const std::string& name) {
  for (const Method m : kAllMethods)
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method: " + name);
}

bool Scenario::canonical() const {
  const bool dim_ok =
      std::find(kCanonicalDimensions.begin(), kCanonicalDimensions.end(),
                dimension) != kCanonicalDimensions.end();
  const bool time_ok =
      std::find(kCanonicalEvalTimes.begin(), kCanonicalEvalTimes.end(),
                nominal_eval_time_s) != kCanonicalEvalTimes.end();
  return dim_ok && time_ok;
}

double total_time(const CostLedger& ledger, double t_nominal_s) {
  return static_cast<double>(ledger.n_model_evals) * t_nominal_s +
         ledger.emulation_cpu_s + ledger.sa_cpu_s;
}

MethodResult run_method(Method method, const Scenario& scenario,
                        const RunOptions& options) {
  const int d = scenario.dimension;
  const TestModel model(d, scenario.nominal_eval_time_s);
  const Evaluator f = model.evaluator();
  const std::vector<std::int64_t> schedule =
      capped_schedule(options.schedule_cap);

  MethodResult result;
  result.method = method;

  switch (method) {
    case Method::Sobol: {
      const ConvergenceReport rep = run_to_convergence(
          f, d, schedule, derive_seed(scenario.seed, kTagSobol));
      result.ledger.n_model_evals = rep.n_evaluations;
      result.ledger.sa_cpu_s = rep.analysis_cpu_s;
      result.converged = rep.converged;
      result.converged_sample_size = rep.final_base_size();
      fill_from_stage(&result, rep.final_stage());
      if (options.record_trace)
        for (const ConvergenceStage& stage : rep.history)
          result.trace.push_back(
              {stage.base_size, stage.indices.total_order});
      break;
    }

    case Method::Kriging: {
      LoopObserver<KrigingModel> observer;
      if (options.record_trace)
        observer = [&result, d](const KrigingModel& m, std::int64_t n) {
          result.trace.push_back({n, quick_total_orders(m, d)});
        };
      const auto loop =
          kriging_emulation_loop(f, d, derive_seed(scenario.seed, kTagKriging),
                                 {}, {}, observer);
      result.ledger.n_model_evals = loop.n_model_evals;
      result.ledger.emulation_cpu_s = loop.cpu_s;
      result.converged = loop.converged;
      result.converged_sample_size = loop.final_sample_size;
      if (loop.model)
        emulator_sa(*loop.model, d,
                    derive_seed(scenario.seed, kTagEmulatorSa), schedule,
                    &result);
      break;
    }

    case Method::Akmcs: {
      LoopObserver<KrigingModel> observer;
      if (options.record_trace)
        observer = [&result, d](const KrigingModel& m, std::int64_t n) {
          result.trace.push_back({n, quick_total_orders(m, d)});
        };
      const AkmcsReport rep =
          run_akmcs(f, d, LearningFunction::uncertainty_sd(),
                    derive_seed(scenario.seed, kTagAkmcs), {}, observer);
      result.ledger.n_model_evals = rep.n_model_evals;
      result.ledger.emulation_cpu_s = rep.cpu_s;
      result.converged = rep.converged;
      result.converged_sample_size = rep.n_model_evals;
      if (rep.model)
        emulator_sa(*rep.model, d,
                    derive_seed(scenario.seed, kTagEmulatorSa), schedule,
                    &result);
      break;
    }

    case Method::Bass: {
      LoopObserver<BassPosterior> observer;
      if (options.record_trace)
        observer = [&result, d](const BassPosterior& p, std::int64_t n) {
          result.trace.push_back({n, quick_total_orders(p, d)});
        };
      const auto loop =
          bass_emulation_loop(f, d, derive_seed(scenario.seed, kTagBass),
                              options.mcmc, {}, {}, observer);
      result.ledger.n_model_evals = loop.n_model_evals;
      result.ledger.emulation_cpu_s = loop.cpu_s;
      result.converged = loop.converged;
      result.converged_sample_size = loop.final_sample_size;
      if (loop.model) {
        const CpuStopwatch sw;
        const BassSobolEnsemble ens = bass_sobol(*loop.model, d);
        result.ledger.sa_cpu_s = sw.elapsed();
        result.indices = ens.mean;
        result.ci_low = ens.total_lower;
        result.ci_high = ens.total_upper;
      }
      break;
    }
  }

  if (result.indices.total_order.empty()) {
    // No surrogate survived (cap smaller than the start size); keep the
    // arrays shaped so cell files stay well-formed.
    result.indices.first_order.assign(d, 0.0);
    result.indices.total_order.assign(d, 0.0);
    result.ci_low.assign(d, 0.0);
    result.ci_high.assign(d, 0.0);
  }
  return result;
}

std::vector<Scenario> GridConfig::scenarios() const {
  std::vector<Scenario> out;
  out.reserve(dimensions.size() * eval_times_s.size() * seeds.size());
  for (const int d : dimensions)
    for (const double t : eval_times_s)
      for (const std::uint64_t s : seeds) out.push_back({d, t, Seed{s}});
  std::sort(out.begin(), out.end());
  return out;
}

GridConfig GridConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  GridConfig cfg;
  cfg.dimensions = j.at("dimensions").get<std::vector<int>>();
  cfg.eval_times_s = j.at("eval_times_s").get<std::vector<double>>();
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j.at("methods"))
      cfg.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("mcmc_profile")) {
    const std::string profile = j.at("mcmc_profile").get<std::string>();
    if (profile == "paper") {
      cfg.options.mcmc = McmcConfig::paper_profile();
    } else if (profile == "desk") {
      cfg.options.mcmc = McmcConfig::desk_profile();
    } else {
      throw std::invalid_argument("mcmc_profile must be 'paper' or 'desk'");
    }
    cfg.options.profile_name = profile;
  }
  if (j.contains("schedule_cap"))
    cfg.options.schedule_cap = j.at("schedule_cap").get<std::int64_t>();

  if (cfg.dimensions.empty() || cfg.eval_times_s.empty() ||
      cfg.methods.empty() || cfg.seeds.empty())
    throw std::invalid_argument("grid config has an empty axis");
  for (const double t : cfg.eval_times_s)
    if (!(t > 0.0))
      throw std::invalid_argument("eval times must be positive seconds");
  return cfg;
}

GridConfig GridConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string cell_file_name(Method method, const Scenario& scenario,
                           const std::string& profile) {
  const std::string time_token = format_time_token(scenario.nominal_eval_time_s);
  const std::string key = method_name(method) + "|d" +
                          std::to_string(scenario.dimension) + "|t" +
                          time_token + "|s" +
                          std::to_string(scenario.seed.value) + "|" + profile;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(key)));
  return method_name(method) + "-d" + std::to_string(scenario.dimension) +
         "-t" + time_token + "-s" + std::to_string(scenario.seed.value) +
         "-" + profile + "-" + hash + ".json";
}

void write_cell_file(const std::filesystem::path& path,
                     const Scenario& scenario, const std::string& profile,
                     const MethodResult& result) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out)
      throw std::runtime_error("cannot write cell file: " + tmp.string());
    out << cell_to_json(scenario, profile, result).dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

CellRecord read_cell_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cell file: " + path.string());
  const json j = json::parse(in);

  CellRecord rec;
  rec.scenario.dimension = j.at("dimension").get<int>();
  rec.scenario.nominal_eval_time_s = j.at("nominal_eval_time_s").get<double>();
  rec.scenario.seed = Seed{j.at("seed").get<std::uint64_t>()};
  rec.profile = j.at("profile").get<std::string>();

  MethodResult& r = rec.result;
  r.method = parse_method(j.at("method").get<std::string>());
  r.ledger.n_model_evals = j.at("n_model_evals").get<std::int64_t>();
  r.ledger.emulation_cpu_s = j.at("emulation_cpu_s").get<double>();
  r.ledger.sa_cpu_s = j.at("sa_cpu_s").get<double>();
  r.converged = j.at("converged").get<bool>();
  r.converged_sample_size = j.at("converged_sample_size").get<std::int64_t>();
  const json& idx = j.at("indices");
  r.indices.first_order = idx.at("first").get<std::vector<double>>();
  r.indices.total_order = idx.at("total").get<std::vector<double>>();
  r.ci_low = idx.at("ci_low").get<std::vector<double>>();
  r.ci_high = idx.at("ci_high").get<std::vector<double>>();
  r.indices.total_variance = j.value("total_variance", 0.0);
  if (j.contains("trace")) {
    for (const json& p : j.at("trace"))
      r.trace.push_back({p.at("n").get<std::int64_t>(),
                         p.at("total").get<std::vector<double>>()});
  }
  return rec;
}

GridResult run_grid(const GridConfig& config,
                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  GridResult grid;
  // A method's work is independent of the nominal time, which only scales
  // ledger arithmetic: memoize per (method, dimension, seed).
  std::map<std::tuple<Method, int, std::uint64_t>, MethodResult> memo;

  for (const Scenario& scenario : config.scenarios()) {
    for (const Method method : config.methods) {
      const std::filesystem::path file =
          out_dir / cell_file_name(method, scenario, config.options.profile_name);
      if (std::filesystem::exists(file)) {
        try {
          grid.cells[scenario][method] = read_cell_file(file).result;
          continue;
        } catch (const std::exception&) {
          // unreadable cell: fall through and recompute it
        }
      }
      try {
        const auto key =
            std::make_tuple(method, scenario.dimension, scenario.seed.value);
        auto it = memo.find(key);
        if (it == memo.end()) {
          it = memo.emplace(key, run_method(method, scenario, config.options))
                   .first;
          it->second.trace.clear();  // traces are not grid artifacts
        }
        write_cell_file(file, scenario, config.options.profile_name,
                        it->second);
        grid.cells[scenario][method] = it->second;
      } catch (const std::exception& e) {
        grid.errors[scenario][method] = e.what();
      }
    }
  }
  return grid;
}

GridResult load_grid(const std::filesystem::path& dir) {
  GridResult grid;
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("not a directory: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json")
      continue;
    try {
      CellRecord rec = read_cell_file(entry.path());
      grid.cells[rec.scenario][rec.result.method] = std::move(rec.result);
    } catch (const std::exception&) {
      // not a cell file; ignore
    }
  }
  return grid;
}

namespace {

// Totals for all four methods of one cell, in kAllMethods order.
std::array<double, 4> cell_totals(const GridResult& grid, const Scenario& sc) {
  const auto cell_it = grid.cells.find(sc);
  if (cell_it == grid.cells.end())
    throw IncompleteCell("missing cell: " + describe_cell(sc, Method::Sobol));
  std::array<double, 4> totals{};
  for (std::size_t i = 0; i < kAllMethods.size(); ++i) {
    const auto it = cell_it->second.find(kAllMethods[i]);
    if (it == cell_it->second.end())
      throw IncompleteCell("missing method: " +
                           describe_cell(sc, kAllMethods[i]));
    totals[i] = total_time(it->second.ledger, sc.nominal_eval_time_s);
  }
  return totals;
}

double fastest_total(const GridResult& grid, const Scenario& sc) {
  const auto totals = cell_totals(grid, sc);
  return *std::min_element(totals.begin(), totals.end());
}

double side_total(const GridResult& grid, const Scenario& sc, GainSide side) {
  if (side.kind == GainSide::Kind::Fixed) {
    const auto cell_it = grid.cells.find(sc);
    if (cell_it == grid.cells.end() ||
        cell_it->second.find(side.method) == cell_it->second.end())
      throw IncompleteCell("missing method: " +
                           describe_cell(sc, side.method));
    return total_time(cell_it->second.at(side.method).ledger,
                      sc.nominal_eval_time_s);
  }
  auto totals = cell_totals(grid, sc);
  std::sort(totals.begin(), totals.end());
  return side.kind == GainSide::Kind::Fastest ? totals[0] : totals[1];
}

}  // namespace

std::map<Scenario, FastestChoice> fastest_map(const GridResult& grid) {
  std::map<Scenario, FastestChoice> out;
  for (const auto& [sc, per_method] : grid.cells) {
    (void)per_method;
    const auto totals = cell_totals(grid, sc);
    FastestChoice choice;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kAllMethods.size(); ++i) {
      if (totals[i] < best) {
        best = totals[i];
        choice.method = kAllMethods[i];
        choice.tie = false;
      } else if (totals[i] == best) {
        choice.tie = true;
      }
    }
    out[sc] = choice;
  }
  return out;
}

std::map<Scenario, int> magnitude_grid(const GridResult& grid,
                                       const Scenario& reference) {
  const double ref = fastest_total(grid, reference);
  std::map<Scenario, int> out;
  for (const auto& [sc, per_method] : grid.cells) {
    (void)per_method;
    out[sc] = static_cast<int>(std::floor(std::log10(fastest_total(grid, sc) / ref)));
  }
  return out;
}

std::map<Scenario, int> speed_gain_grid(const GridResult& grid,
                                        GainSide baseline,
                                        GainSide challenger) {
  std::map<Scenario, int> out;
  for (const auto& [sc, per_method] : grid.cells) {
    (void)per_method;
    const double b = side_total(grid, sc, baseline);
    const double c = side_total(grid, sc, challenger);
    out[sc] = static_cast<int>(std::floor(std::log10(b / c)));
  }
  return out;
}

}  // namespace gsa
