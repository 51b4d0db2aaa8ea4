#include "genbound/experiments/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace genbound::experiments {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

double x_scale(const SweepResult& r) { return r.x_is_rate() && r.unit == Unit::Bits ? 1.0 / std::numbers::ln2 : 1.0; }

std::string unit_name(const SweepResult& r) {
  if (!r.x_is_rate()) return "nats";
  return r.unit == Unit::Bits ? "bits" : "nats";
}

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
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

}  // namespace

std::string SweepResult::x_header() const { return x_name + "_" + unit_name(*this); }

bool SweepResult::converged() const {
  for (const auto& row : rows)
    for (const auto& f : row.flags)
      if (f.size() >= 13 && f.compare(f.size() - 13, 13, ":nonconverged") == 0) return false;
  return true;
}

bool SweepResult::drawable(std::size_t row, std::size_t column) const {
  const auto& r = rows.at(row);
  if (!std::isfinite(r.values.at(column))) return false;
  const auto& name = columns.at(column);
  for (const auto& f : r.flags)
    if (f == name + ":vacuous" || f == name + ":infeasible") return false;
  return true;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string csv_text(const SweepResult& result) {
  std::ostringstream out;
  out << result.x_header();
  for (const auto& c : result.columns) out << "," << c;
  out << ",flags,config_hash\n";
  const double scale = x_scale(result);
  for (const auto& row : result.rows) {
    if (row.values.size() != result.columns.size()) throw std::logic_error("sweep row width mismatch");
    out << format_number(row.x * scale);
    for (double v : row.values) out << "," << format_number(v);
    out << ",";
    if (row.flags.empty()) {
      out << "ok";
    } else {
      for (std::size_t i = 0; i < row.flags.size(); ++i) out << (i ? ";" : "") << row.flags[i];
    }
    out << "," << result.config_hash << "\n";
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_csv(const SweepResult& result, const std::filesystem::path& path) { write_text(path, csv_text(result)); }

std::string svg_text(const SweepResult& result, const std::string& title) {
  if (result.rows.empty() || result.columns.empty()) throw std::invalid_argument("cannot plot an empty result");
  constexpr double width = 760, height = 480, left = 80, right = 200, top = 50, bottom = 70;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  const double scale = x_scale(result);

  double x_lo = result.rows.front().x * scale, x_hi = x_lo;
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    x_lo = std::min(x_lo, result.rows[i].x * scale);
    x_hi = std::max(x_hi, result.rows[i].x * scale);
    for (std::size_t c = 0; c < result.columns.size(); ++c) {
      if (!result.drawable(i, c)) continue;
      y_lo = std::min(y_lo, result.rows[i].values[c]);
      y_hi = std::max(y_hi, result.rows[i].values[c]);
    }
  }
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  if (y_hi - y_lo < 1e-12) y_lo -= 0.5, y_hi += 0.5;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;
  if (x_hi - x_lo < 1e-12) x_lo -= 0.5, x_hi += 0.5;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return top + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fixed(left + plot_w / 2, 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int ticks = 6;
  for (int i = 0; i < ticks; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / (ticks - 1);
    const double yv = y_lo + (y_hi - y_lo) * i / (ticks - 1);
    char label[32];
    out << "<line x1=\"" << fixed(px(xv), 2) << "\" y1=\"" << top + plot_h << "\" x2=\"" << fixed(px(xv), 2)
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"black\"/>\n";
    std::snprintf(label, sizeof label, "%.3g", xv);
    out << "<text x=\"" << fixed(px(xv), 2) << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
    out << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(py(yv), 2) << "\" x2=\"" << left << "\" y2=\""
        << fixed(py(yv), 2) << "\" stroke=\"black\"/>\n";
    std::snprintf(label, sizeof label, "%.3g", std::abs(yv) < 1e-12 ? 0.0 : yv);
    out << "<text x=\"" << left - 8 << "\" y=\"" << fixed(py(yv) + 4, 2)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
  }
  out << "<text x=\"" << fixed(left + plot_w / 2, 2) << "\" y=\"" << height - 20
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(result.x_name) << " ("
      << unit_name(result) << ")</text>\n";
  out << "<text x=\"20\" y=\"" << fixed(top + plot_h / 2, 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
      << fixed(top + plot_h / 2, 2) << ")\">bound value (loss units)</text>\n";

  for (std::size_t c = 0; c < result.columns.size(); ++c) {
    const char* color = kPalette[c % std::size(kPalette)];
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      if (!result.drawable(i, c)) {
        pen_down = false;
        continue;
      }
      path += (pen_down ? " L " : (path.empty() ? "M " : " M ")) + fixed(px(result.rows[i].x * scale), 2) + " " +
              fixed(py(result.rows[i].values[c]), 2);
      pen_down = true;
    }
    out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" data-series=\"" << xml_escape(result.columns[c]) << "\"/>\n";
    const double ly = top + 20 + 22 * static_cast<double>(c);
    out << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << fixed(ly, 2) << "\" x2=\"" << left + plot_w + 45
        << "\" y2=\"" << fixed(ly, 2) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + plot_w + 52 << "\" y=\"" << fixed(ly + 4, 2)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(result.columns[c]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_plot(const SweepResult& result, const std::filesystem::path& path, const std::string& title) {
  write_text(path, svg_text(result, title));
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "command: " << m.command << "\n";
  out << "config_hash: " << m.config_hash << "\n";
  out << "genbound_version: 1.0.0\n";
  out << "compiler: " << __VERSION__ << "\n";
  out << "cxx_standard: " << __cplusplus << "\n";
  out << "wall_seconds: " << fixed(m.wall_seconds, 3) << "\n";
  for (const auto& f : m.files) out << "file: " << f.filename().string() << "\n";
  for (const auto& n : m.notes) out << "note: " << n << "\n";
  write_text(path, out.str());
}

}  // namespace genbound::experiments
