#pragma once

#include <CLI11.hpp>
#include <string>
#include <utility>
#include <vector>

namespace airyproc::cli {

/// "start:stop:step" (endpoints inclusive within half a step), "a,b,c", or a
/// single number. Throws CLI::ValidationError on malformed input.
std::vector<double> parse_grid(const std::string& text);

/// "a:b" window; a <= b.
std::pair<double, double> parse_window(const std::string& text);

/// %.17g
std::string fmt(double v);

/// Fills options of `app` not given on the command line from a flat JSON
/// object keyed by long flag names ('_' and '-' both accepted). Arrays add one input per element; nested
/// arrays are joined with ':' (windows). Unknown keys are an error.
void apply_json_config(CLI::App& app, const std::string& path);

/// Provenance lines shared by every output file.
struct Header {
  std::string invocation;
  std::string seed;
  std::string version;

  /// "# key: value" lines.
  std::string comment(const std::string& prefix = "# ") const;
};

/// Writes `body` to `path` after the header in comment form. JSON files take
/// the header as a leading "header" object instead, since JSON has no comments.
void write_csv(const std::string& path, const Header& h, const std::string& body);
void write_json(const std::string& path, const Header& h, const std::string& json_body);
void write_svg(const std::string& path, const Header& h, const std::string& svg_body);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;
};

/// Self-contained SVG line plot with axes, ticks and a legend.
std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series);

}  // namespace airyproc::cli
