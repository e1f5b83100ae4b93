// Command-line frontend: run one (method, scenario) cell, sweep a grid from
// a JSON config, or render CSV/SVG reports from a directory of cell files.
// Exit codes: 0 success, 1 usage error, 2 execution error. Diagnostics go to
// stderr; results go only to the requested output files.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "gsa/bench.hpp"
#include "gsa/report.hpp"

namespace {

gsa::GainSide parse_side(const std::string& text) {
  if (text == "fastest") return gsa::GainSide::fastest();
  if (text == "second-fastest") return gsa::GainSide::second_fastest();
  return gsa::GainSide::fixed(gsa::parse_method(text));
}

gsa::ReportRequest::Kind parse_kind(const std::string& text) {
  static const std::map<std::string, gsa::ReportRequest::Kind> kinds = {
      {"fastest-map", gsa::ReportRequest::Kind::FastestMap},
      {"magnitude", gsa::ReportRequest::Kind::MagnitudeGrid},
      {"speed-gain", gsa::ReportRequest::Kind::SpeedGain},
      {"trace", gsa::ReportRequest::Kind::Trace},
      {"error-trace", gsa::ReportRequest::Kind::ErrorTrace},
  };
  const auto it = kinds.find(text);
  if (it == kinds.end())
    throw std::invalid_argument("unknown report kind: '" + text + "'");
  return it->second;
}

gsa::RunOptions options_for(const std::string& profile) {
  gsa::RunOptions options;
  options.profile_name = profile;
  options.mcmc = profile == "desk" ? gsa::McmcConfig::desk_profile()
                                   : gsa::McmcConfig::paper_profile();
  return options;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"global sensitivity analysis benchmark"};
  app.require_subcommand(1);

  std::string method_text, eval_time_text, out_text, profile = "paper";
  int dimension = 0;
  std::uint64_t seed = 1;
  CLI::App* run = app.add_subcommand("run", "compute one cell file");
  run->add_option("--method", method_text, "sobol|kriging|akmcs|bass")
      ->required();
  run->add_option("--dim", dimension, "model dimension")->required();
  run->add_option("--eval-time", eval_time_text,
                  "nominal model evaluation time (e.g. 1ms, 6h, 0.25)")
      ->required();
  run->add_option("--seed", seed, "random seed")->required();
  run->add_option("--out", out_text, "cell file to write")->required();
  run->add_option("--mcmc-profile", profile, "paper|desk")
      ->check(CLI::IsMember({"paper", "desk"}));

  std::string config_text, grid_out_text;
  CLI::App* grid = app.add_subcommand("grid", "sweep a grid config, resumable");
  grid->add_option("--config", config_text, "grid config JSON")->required();
  grid->add_option("--out", grid_out_text, "cell-file directory")->required();

  std::string kind_text, in_text, report_out_text, format = "csv";
  std::string baseline_text = "sobol", challenger_text = "fastest";
  int report_dim = -1, report_param = -1;
  CLI::App* report = app.add_subcommand("report", "render CSV/SVG summaries");
  report
      ->add_option("kind", kind_text,
                   "fastest-map|magnitude|speed-gain|trace|error-trace")
      ->required();
  report->add_option("--in", in_text, "cell-file directory")->required();
  report->add_option("--out", report_out_text, "output file")->required();
  report->add_option("--format", format, "csv|svg")
      ->check(CLI::IsMember({"csv", "svg"}));
  report->add_option("--baseline", baseline_text,
                     "speed-gain baseline: method, fastest, second-fastest");
  report->add_option("--challenger", challenger_text,
                     "speed-gain challenger: method, fastest, second-fastest");
  report->add_option("--dim", report_dim, "trace dimension");
  report->add_option("--param", report_param, "trace parameter index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      if (dimension <= 0)
        throw std::invalid_argument("--dim must be positive");
      gsa::Scenario scenario;
      scenario.dimension = dimension;
      scenario.nominal_eval_time_s = gsa::parse_duration(eval_time_text);
      scenario.seed = gsa::Seed{seed};
      const gsa::Method method = gsa::parse_method(method_text);
      gsa::RunOptions options = options_for(profile);
      options.record_trace = true;  // single cells feed the trace reports

      const gsa::MethodResult result =
          gsa::run_method(method, scenario, options);
      const std::filesystem::path out(out_text);
      if (out.has_parent_path())
        std::filesystem::create_directories(out.parent_path());
      gsa::write_cell_file(out, scenario, profile, result);
      return 0;
    }

    if (*grid) {
      const gsa::GridConfig config =
          gsa::GridConfig::from_json_file(config_text);
      const gsa::GridResult result = gsa::run_grid(config, grid_out_text);
      if (!result.errors.empty()) {
        for (const auto& [sc, methods] : result.errors)
          for (const auto& [m, what] : methods)
            std::cerr << "cell (" << gsa::method_name(m) << ", d="
                      << sc.dimension << ", t=" << sc.nominal_eval_time_s
                      << "s, seed " << sc.seed.value << ") failed: " << what
                      << "\n";
        return 2;
      }
      return 0;
    }

    gsa::ReportRequest request;
    request.kind = parse_kind(kind_text);
    request.input_dir = in_text;
    request.output = report_out_text;
    request.format = format == "svg" ? gsa::ReportRequest::Format::Svg
                                     : gsa::ReportRequest::Format::Csv;
    request.baseline = parse_side(baseline_text);
    request.challenger = parse_side(challenger_text);
    request.trace_dimension = report_dim;
    request.trace_param = report_param;
    gsa::render_report(request);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
