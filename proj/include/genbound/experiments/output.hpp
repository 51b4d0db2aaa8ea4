#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "genbound/experiments/config.hpp"

namespace genbound::experiments {

/// One grid point: the x value and one cell per bound column. Cell flags are
/// written "column:flag" with flag in {nonconverged, vacuous, infeasible}.
struct SweepRow {
  double x = 0.0;
  std::vector<double> values;
  std::vector<std::string> flags;
};

struct SweepResult {
  /// "r" (a rate, scaled by the unit) or any other name (left in nats).
  std::string x_name = "r";
  std::vector<std::string> columns;
  std::vector<SweepRow> rows;
  std::string config_hash;
  Unit unit = Unit::Nats;

  bool x_is_rate() const { return x_name == "r"; }
  std::string x_header() const;
  /// False when any cell carries the nonconverged flag.
  bool converged() const;
  /// Finite and neither vacuous nor infeasible.
  bool drawable(std::size_t row, std::size_t column) const;
};

/// 12 significant digits; non-finite values print as "nan" / "inf" / "-inf".
std::string format_number(double v);

/// Header row, then one row per grid point: x, bound columns, flags, config_hash.
std::string csv_text(const SweepResult& result);
void write_csv(const SweepResult& result, const std::filesystem::path& path);

/// Standalone SVG line chart, one series per column; undrawable cells break the line.
std::string svg_text(const SweepResult& result, const std::string& title);
void emit_plot(const SweepResult& result, const std::filesystem::path& path, const std::string& title);

struct Manifest {
  std::string command;
  std::string config_hash;
  double wall_seconds = 0.0;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notes;
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Writes text to a file, creating parent directories. Throws std::runtime_error when unwritable.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace genbound::experiments
