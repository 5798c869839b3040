#include "cli_support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

namespace airyproc::cli {

namespace {

double to_number(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (...) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw CLI::ValidationError("grid", "cannot read '" + s + "' in '" + whole + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string input_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_array()) {
    std::string joined;
    for (const auto& e : v) joined += (joined.empty() ? "" : ":") + input_text(e);
    return joined;
  }
  throw CLI::ValidationError("config", "unsupported value " + v.dump());
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Nice tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) out.push_back(std::fabs(t) < 1e-12 * span ? 0.0 : t);
  return out;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CLI::FileError("cannot write " + path);
  out << text;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw CLI::ValidationError("grid", "expected start:stop:step, got '" + text + "'");
    const double start = to_number(parts[0], text), stop = to_number(parts[1], text), step = to_number(parts[2], text);
    if (!(step > 0.0) || stop < start) throw CLI::ValidationError("grid", "need step > 0 and stop >= start in '" + text + "'");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 0.5));
    if (count > 1000000) throw CLI::ValidationError("grid", "more than 1e6 points in '" + text + "'");
    std::vector<double> out;
    for (long k = 0; k <= count; ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
  }
  std::vector<double> out;
  for (const auto& p : split(text, ',')) out.push_back(to_number(p, text));
  if (out.empty()) throw CLI::ValidationError("grid", "empty grid");
  return out;
}

std::pair<double, double> parse_window(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw CLI::ValidationError("window", "expected a:b, got '" + text + "'");
  const double a = to_number(parts[0], text), b = to_number(parts[1], text);
  if (a > b) throw CLI::ValidationError("window", "need a <= b in '" + text + "'");
  return {a, b};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_json_config(CLI::App& app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError("cannot read config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ValidationError("config", path + ": " + e.what());
  }
  if (!j.is_object()) throw CLI::ValidationError("config", path + ": top level must be an object");
  for (const auto& [key, value] : j.items()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = app.get_option_no_throw("--" + flag);
    if (opt == nullptr || flag == "config") throw CLI::ValidationError("config", "unknown key '" + key + "'");
    if (opt->count() > 0) continue;
    if (value.is_array() && (value.empty() || value.front().is_array() || opt->get_items_expected_max() > 1)) {
      for (const auto& e : value) opt->add_result(input_text(e));
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& e : value) joined += (joined.empty() ? "" : ",") + input_text(e);
      opt->add_result(joined);
    } else {
      opt->add_result(input_text(value));
    }
    opt->run_callback();
  }
}

std::string Header::comment(const std::string& prefix) const {
  return prefix + "invocation: " + invocation + "\n" + prefix + "seed: " + seed + "\n" + prefix + "version: " + version +
         "\n";
}

void write_csv(const std::string& path, const Header& h, const std::string& body) {
  write_file(path, h.comment() + body);
}

void write_json(const std::string& path, const Header& h, const std::string& json_body) {
  nlohmann::ordered_json out;
  out["header"] = {{"invocation", h.invocation}, {"seed", h.seed}, {"version", h.version}};
  const auto body = nlohmann::ordered_json::parse(json_body);
  for (const auto& [k, v] : body.items()) out[k] = v;
  write_file(path, out.dump(2) + "\n");
}

void write_svg(const std::string& path, const Header& h, const std::string& svg_body) {
  std::string comment = h.comment("  ");
  // "--" may not appear inside an XML comment.
  for (std::size_t p = comment.find("--"); p != std::string::npos; p = comment.find("--", p)) comment.replace(p, 2, "- -");
  write_file(path, "<!--\n" + comment + "-->\n" + svg_body);
}

std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series) {
  const double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 55;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (xhi - xlo < 1e-12) xlo -= 0.5, xhi += 0.5;
  if (yhi - ylo < 1e-12) ylo -= 0.5, yhi += 0.5;
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (y - ylo) / (yhi - ylo) * (H - top - bottom); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
  o << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right
    << "\" height=\"" << H - top - bottom << "\"/></g>\n";
  for (double t : ticks(xlo, xhi)) {
    o << "<line x1=\"" << px(t) << "\" y1=\"" << H - bottom << "\" x2=\"" << px(t) << "\" y2=\"" << H - bottom + 5
      << "\" stroke=\"black\"/><text x=\"" << px(t) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\">"
      << short_num(t) << "</text>\n";
  }
  for (double t : ticks(ylo, yhi)) {
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
      << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
      << short_num(t) << "</text>\n";
  }
  o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xml_escape(xlabel)
    << "</text>\n";
  o << "<text transform=\"translate(16," << (top + H - bottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(ylabel) << "</text>\n";
  int row = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    if (s.markers || s.x.size() < 2) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
          o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        }
      }
    }
    const double ly = top + 14 + 16 * row++;
    o << "<line x1=\"" << W - right - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - right - 130 << "\" y2=\"" << ly
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/><text x=\"" << W - right - 125 << "\" y=\"" << ly + 4
      << "\">" << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace airyproc::cli
