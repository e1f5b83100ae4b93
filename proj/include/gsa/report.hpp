#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "gsa/bench.hpp"

namespace gsa {

// Accepts the benchmark's duration tokens (1us, 10us, 0.1ms, ..., 1day) and
// raw second counts ("0.25"). Throws std::invalid_argument otherwise.
double parse_duration(const std::string& token);

// Canonical token for an axis value when one exists, else "%.3gs".
std::string duration_token(double seconds);

struct ReportRequest {
  enum class Kind { FastestMap, MagnitudeGrid, SpeedGain, Trace, ErrorTrace };
  enum class Format { Csv, Svg };

  Kind kind = Kind::FastestMap;
  std::filesystem::path input_dir;
  std::filesystem::path output;
  Format format = Format::Csv;

  // SpeedGain comparison sides.
  GainSide baseline = GainSide::fixed(Method::Sobol);
  GainSide challenger = GainSide::fastest();

  // MagnitudeGrid reference; defaults to (d=2, 1us, lowest seed present).
  std::optional<Scenario> reference;

  // Trace / ErrorTrace selection. trace_param filters ErrorTrace rows when
  // nonnegative and picks the traced index for Trace (where it is required).
  int trace_dimension = -1;
  int trace_param = -1;
};

// Renders the request from the cell files under input_dir into the output
// file. Pure reader: cell files are never touched. Missing inputs raise
// IncompleteCell; malformed requests raise std::invalid_argument.
void render_report(const ReportRequest& request);

}  // namespace gsa
