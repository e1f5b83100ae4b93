#include "gsa/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gsa/errors.hpp"

namespace gsa {
namespace {

// ---------------------------------------------------------------------------
// formatting

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_time(double s) { return fmt("%.9g", s); }
std::string fmt_value(double v) { return fmt("%.6g", v); }

struct DurationUnit {
  const char* suffix;
  double seconds;
};

// Longest suffixes first so "ms" is not read as "s" with a stray 'm'.
constexpr DurationUnit kDurationUnits[] = {
    {"min", 60.0}, {"day", 86400.0}, {"us", 1e-6},
    {"ms", 1e-3},  {"h", 3600.0},    {"s", 1.0},
};

struct AxisToken {
  double seconds;
  const char* token;
};

constexpr AxisToken kAxisTokens[] = {
    {1e-6, "1us"},  {1e-5, "10us"}, {1e-4, "0.1ms"}, {1e-3, "1ms"},
    {1e-2, "10ms"}, {0.1, "0.1s"},  {1.0, "1s"},     {10.0, "10s"},
    {60.0, "1min"}, {3600.0, "1h"}, {21600.0, "6h"}, {43200.0, "12h"},
    {86400.0, "1day"},
};

// ---------------------------------------------------------------------------
// cell selection

// Lowest-seed cell per (dimension, time); the SVG plane has no seed axis.
std::map<std::pair<int, double>, Scenario> plot_plane(
    const std::map<Scenario, FastestChoice>& cells) {
  std::map<std::pair<int, double>, Scenario> plane;
  for (const auto& [sc, unused] : cells)
    plane.emplace(std::pair{sc.dimension, sc.nominal_eval_time_s}, sc);
  return plane;
}

std::map<std::pair<int, double>, Scenario> plot_plane(
    const std::map<Scenario, int>& cells) {
  std::map<std::pair<int, double>, Scenario> plane;
  for (const auto& [sc, unused] : cells)
    plane.emplace(std::pair{sc.dimension, sc.nominal_eval_time_s}, sc);
  return plane;
}

template <typename Map>
void collect_axes(const Map& plane, std::vector<int>& dims,
                  std::vector<double>& times) {
  for (const auto& [key, unused] : plane) {
    if (dims.empty() || dims.back() != key.first) dims.push_back(key.first);
    if (std::find(times.begin(), times.end(), key.second) == times.end())
      times.push_back(key.second);
  }
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  std::sort(times.begin(), times.end());
}

// ---------------------------------------------------------------------------
// SVG scaffolding

const char* method_color(Method m) {
  switch (m) {
    case Method::Sobol: return "#4c78a8";
    case Method::Kriging: return "#f58518";
    case Method::Bass: return "#54a24b";
    case Method::Akmcs: return "#e45756";
  }
  return "#999999";
}

// Diverging ramp for signed integer grids: blue below zero, red above,
// near-white at zero. `scale` is the largest |value| in the grid.
std::string ramp_color(int value, int scale) {
  const double t = scale > 0 ? std::min(1.0, std::abs(value) / (double)scale)
                             : 0.0;
  const int base[3] = {247, 247, 247};
  const int target_neg[3] = {33, 102, 172};
  const int target_pos[3] = {178, 24, 43};
  const int* target = value < 0 ? target_neg : target_pos;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                (int)std::lround(base[0] + t * (target[0] - base[0])),
                (int)std::lround(base[1] + t * (target[1] - base[1])),
                (int)std::lround(base[2] + t * (target[2] - base[2])));
  return buf;
}

// Black text stays readable on the pale middle of the ramp; white wins on
// the saturated ends and on all four method colors.
const char* text_color_on(int value, int scale) {
  const double t = scale > 0 ? std::abs(value) / (double)scale : 0.0;
  return t > 0.55 ? "#ffffff" : "#202020";
}

struct SvgCell {
  std::string fill;
  std::string label;
  std::string label_color = "#ffffff";
};

std::string render_svg_grid(
    const std::string& title, const std::vector<int>& dims,
    const std::vector<double>& times,
    const std::function<std::optional<SvgCell>(int, double)>& cell,
    const std::vector<std::pair<std::string, std::string>>& legend) {
  constexpr int kCellW = 66, kCellH = 40, kLeft = 64, kTitleH = 26;
  const int legend_h = legend.empty() ? 0 : 24;
  const int top = kTitleH + legend_h + 8;
  const int width = kLeft + kCellW * (int)times.size() + 16;
  const int height = top + kCellH * (int)dims.size() + 30;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  out += "<style>text{font:11px sans-serif}</style>\n";
  out += "<rect width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"8\" y=\"17\" style=\"font:13px sans-serif\">" + title +
         "</text>\n";

  int lx = 8;
  for (const auto& [label, color] : legend) {
    out += "<rect x=\"" + std::to_string(lx) + "\" y=\"" +
           std::to_string(kTitleH + 2) + "\" width=\"12\" height=\"12\""
           " fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + std::to_string(lx + 16) + "\" y=\"" +
           std::to_string(kTitleH + 12) + "\">" + label + "</text>\n";
    lx += 16 + 8 * (int)label.size() + 16;
  }

  for (std::size_t r = 0; r < dims.size(); ++r) {
    const int cy = top + (int)r * kCellH + kCellH / 2 + 4;
    out += "<text x=\"" + std::to_string(kLeft - 8) + "\" y=\"" +
           std::to_string(cy) + "\" text-anchor=\"end\">d=" +
           std::to_string(dims[r]) + "</text>\n";
  }
  for (std::size_t c = 0; c < times.size(); ++c) {
    const int cx = kLeft + (int)c * kCellW + kCellW / 2;
    out += "<text x=\"" + std::to_string(cx) + "\" y=\"" +
           std::to_string(top + kCellH * (int)dims.size() + 18) +
           "\" text-anchor=\"middle\">" + duration_token(times[c]) +
           "</text>\n";
  }

  for (std::size_t r = 0; r < dims.size(); ++r) {
    for (std::size_t c = 0; c < times.size(); ++c) {
      const int x = kLeft + (int)c * kCellW;
      const int y = top + (int)r * kCellH;
      const auto filled = cell(dims[r], times[c]);
      const std::string fill = filled ? filled->fill : "#eeeeee";
      out += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(kCellW) + "\" height=\"" +
             std::to_string(kCellH) + "\" fill=\"" + fill +
             "\" stroke=\"#ffffff\"/>\n";
      if (filled && !filled->label.empty())
        out += "<text x=\"" + std::to_string(x + kCellW / 2) + "\" y=\"" +
               std::to_string(y + kCellH / 2 + 4) +
               "\" text-anchor=\"middle\" fill=\"" + filled->label_color +
               "\">" + filled->label + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string side_label(const GainSide& side) {
  switch (side.kind) {
    case GainSide::Kind::Fixed: return method_name(side.method);
    case GainSide::Kind::Fastest: return "fastest";
    case GainSide::Kind::SecondFastest: return "second-fastest";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// per-kind renderers (each returns the output file's full contents)

std::string fastest_csv(const std::map<Scenario, FastestChoice>& fm) {
  std::string out = "dimension,eval_time_s,seed,method,tie\n";
  for (const auto& [sc, choice] : fm)
    out += std::to_string(sc.dimension) + "," +
           fmt_time(sc.nominal_eval_time_s) + "," +
           std::to_string(sc.seed.value) + "," + method_name(choice.method) +
           "," + (choice.tie ? "1" : "0") + "\n";
  return out;
}

std::string fastest_svg(const std::map<Scenario, FastestChoice>& fm) {
  const auto plane = plot_plane(fm);
  std::vector<int> dims;
  std::vector<double> times;
  collect_axes(plane, dims, times);
  std::vector<std::pair<std::string, std::string>> legend;
  for (Method m : kAllMethods) legend.emplace_back(method_name(m),
                                                   method_color(m));
  return render_svg_grid(
      "fastest method by dimension and evaluation time", dims, times,
      [&](int d, double t) -> std::optional<SvgCell> {
        const auto it = plane.find({d, t});
        if (it == plane.end()) return std::nullopt;
        const FastestChoice& choice = fm.at(it->second);
        SvgCell cell;
        cell.fill = method_color(choice.method);
        cell.label = method_name(choice.method);
        if (choice.tie) cell.label += "*";
        return cell;
      },
      legend);
}

std::string int_grid_csv(const std::map<Scenario, int>& grid,
                         const std::string& value_header) {
  std::string out = "dimension,eval_time_s,seed," + value_header + "\n";
  for (const auto& [sc, v] : grid)
    out += std::to_string(sc.dimension) + "," +
           fmt_time(sc.nominal_eval_time_s) + "," +
           std::to_string(sc.seed.value) + "," + std::to_string(v) + "\n";
  return out;
}

std::string int_grid_svg(const std::map<Scenario, int>& grid,
                         const std::string& title) {
  const auto plane = plot_plane(grid);
  std::vector<int> dims;
  std::vector<double> times;
  collect_axes(plane, dims, times);
  int scale = 1;
  for (const auto& [sc, v] : grid) scale = std::max(scale, std::abs(v));
  const std::vector<std::pair<std::string, std::string>> legend = {
      {"-" + std::to_string(scale), ramp_color(-scale, scale)},
      {"0", ramp_color(0, scale)},
      {"+" + std::to_string(scale), ramp_color(scale, scale)},
  };
  return render_svg_grid(
      title, dims, times,
      [&](int d, double t) -> std::optional<SvgCell> {
        const auto it = plane.find({d, t});
        if (it == plane.end()) return std::nullopt;
        const int v = grid.at(it->second);
        return SvgCell{ramp_color(v, scale), std::to_string(v),
                       text_color_on(v, scale)};
      },
      legend);
}

// Traced cells for one dimension, deduplicated to the lowest nominal time
// per (method, seed): the trace does not depend on the nominal time.
std::map<std::pair<Method, std::uint64_t>, const MethodResult*> traced_cells(
    const GridResult& grid, int dimension) {
  std::map<std::pair<Method, std::uint64_t>, const MethodResult*> picks;
  for (const auto& [sc, methods] : grid.cells) {
    if (sc.dimension != dimension) continue;
    for (const auto& [m, res] : methods)
      if (!res.trace.empty()) picks.emplace(std::pair{m, sc.seed.value}, &res);
  }
  return picks;
}

std::string trace_csv(const GridResult& grid, int dimension, int param) {
  if (dimension <= 0 || param < 0)
    throw std::invalid_argument(
        "trace reports need a dimension and a parameter index");
  if (param >= dimension)
    throw std::invalid_argument("parameter index " + std::to_string(param) +
                                " out of range for dimension " +
                                std::to_string(dimension));
  const auto picks = traced_cells(grid, dimension);
  if (picks.empty())
    throw IncompleteCell("no traced cells for dimension " +
                         std::to_string(dimension));
  std::string out = "method,sample_size,seed,total_order\n";
  for (const auto& [key, res] : picks)
    for (const TracePoint& p : res->trace) {
      if (param >= (int)p.total_order.size()) continue;
      out += method_name(key.first) + "," + std::to_string(p.sample_size) +
             "," + std::to_string(key.second) + "," +
             fmt_value(p.total_order[param]) + "\n";
    }
  return out;
}

std::string error_trace_csv(const GridResult& grid, int dimension,
                            int param_filter) {
  if (dimension <= 0)
    throw std::invalid_argument("error-trace reports need a dimension");
  const auto picks = traced_cells(grid, dimension);
  if (picks.empty())
    throw IncompleteCell("no traced cells for dimension " +
                         std::to_string(dimension));

  // Converged reference per seed: the standard estimator's own final
  // total-order indices at the same dimension and seed.
  std::map<std::uint64_t, const std::vector<double>*> reference;
  for (const auto& [sc, methods] : grid.cells) {
    if (sc.dimension != dimension) continue;
    const auto it = methods.find(Method::Sobol);
    if (it != methods.end())
      reference.emplace(sc.seed.value, &it->second.indices.total_order);
  }

  std::string out = "method,sample_size,seed,param,abs_error\n";
  for (const auto& [key, res] : picks) {
    const auto ref = reference.find(key.second);
    if (ref == reference.end())
      throw IncompleteCell("no converged baseline cell for dimension " +
                           std::to_string(dimension) + ", seed " +
                           std::to_string(key.second));
    const std::vector<double>& target = *ref->second;
    for (const TracePoint& p : res->trace)
      for (int j = 0; j < (int)p.total_order.size(); ++j) {
        if (param_filter >= 0 && j != param_filter) continue;
        if (j >= (int)target.size()) continue;
        out += method_name(key.first) + "," + std::to_string(p.sample_size) +
               "," + std::to_string(key.second) + "," + std::to_string(j) +
               "," + fmt_value(std::abs(p.total_order[j] - target[j])) + "\n";
      }
  }
  return out;
}

Scenario default_reference(const GridResult& grid) {
  for (const auto& [sc, unused] : grid.cells)
    if (sc.dimension == 2 && sc.nominal_eval_time_s == 1e-6) return sc;
  throw IncompleteCell(
      "no (d=2, 1us) cell to anchor magnitudes; pass an explicit reference");
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

double parse_duration(const std::string& token) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad duration: '" + token + "'");
  }
  const std::string unit = token.substr(pos);
  double scale = unit.empty() ? 1.0 : 0.0;
  for (const DurationUnit& u : kDurationUnits)
    if (unit == u.suffix) scale = u.seconds;
  if (scale == 0.0)
    throw std::invalid_argument("unknown duration unit: '" + unit + "'");
  const double seconds = value * scale;
  if (!(seconds > 0.0))
    throw std::invalid_argument("duration must be positive: '" + token + "'");
  // Unit arithmetic can land an ulp off the canonical axis ("10us" evaluates
  // as 10 * 1e-6 != 1e-5). Scenario keys compare times exactly, so snap any
  // spelling of an axis value onto it.
  for (const AxisToken& t : kAxisTokens)
    if (std::abs(seconds - t.seconds) <= 1e-12 * t.seconds) return t.seconds;
  return seconds;
}

std::string duration_token(double seconds) {
  for (const AxisToken& t : kAxisTokens)
    if (seconds == t.seconds) return t.token;
  return fmt("%.3g", seconds) + "s";
}

void render_report(const ReportRequest& request) {
  using Kind = ReportRequest::Kind;
  const bool svg = request.format == ReportRequest::Format::Svg;
  if (svg && (request.kind == Kind::Trace || request.kind == Kind::ErrorTrace))
    throw std::invalid_argument("trace reports are CSV only");

  const GridResult grid = load_grid(request.input_dir);
  if (grid.cells.empty())
    throw IncompleteCell("no cell files under " + request.input_dir.string());

  std::string text;
  switch (request.kind) {
    case Kind::FastestMap: {
      const auto fm = fastest_map(grid);
      text = svg ? fastest_svg(fm) : fastest_csv(fm);
      break;
    }
    case Kind::MagnitudeGrid: {
      const Scenario ref =
          request.reference ? *request.reference : default_reference(grid);
      const auto mg = magnitude_grid(grid, ref);
      text = svg ? int_grid_svg(mg, "orders of magnitude slower than (d=2, " +
                                        duration_token(
                                            ref.nominal_eval_time_s) +
                                        ") at its fastest")
                 : int_grid_csv(mg, "magnitude");
      break;
    }
    case Kind::SpeedGain: {
      const auto sg =
          speed_gain_grid(grid, request.baseline, request.challenger);
      text = svg ? int_grid_svg(sg, "log10 speed gain: " +
                                        side_label(request.baseline) +
                                        " over " +
                                        side_label(request.challenger))
                 : int_grid_csv(sg, "gain");
      break;
    }
    case Kind::Trace:
      text = trace_csv(grid, request.trace_dimension, request.trace_param);
      break;
    case Kind::ErrorTrace:
      text = error_trace_csv(grid, request.trace_dimension,
                             request.trace_param);
      break;
  }
  write_text_file(request.output, text);
}

}  // namespace gsa
