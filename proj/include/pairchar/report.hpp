#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pairchar/correlate.hpp"
#include "pairchar/projection.hpp"
#include "pairchar/sweepfit.hpp"

namespace pairchar {

using json = nlohmann::json;

/// Writes through a sibling temporary file and renames it into place, so a
/// failed writer never leaves a partial file behind.
void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

/// Parameter document: the SourceParams and SimConfig fields in snake_case
/// (alpha, beta_a, beta_b, eta_sa, eta_sb, eta_x, density, pulse_count,
/// pulse_clock{period, origin}, jitter_sigma, resolution, dead_time,
/// rng_seed). Missing fields keep the given defaults; unknown fields are a
/// FormatError.
void apply_params_json(const json& doc, SourceParams& params, SimConfig& config);
json params_to_json(const SourceParams& params, const SimConfig& config);

/// "0.1,1.6,16", "0.05..16(log,8)" or "1..4(lin,4)".
std::vector<double> parse_density_spec(const std::string& spec);

struct StreamSummary {
  std::string source;
  std::optional<double> density;
  std::uint64_t singles_a = 0;
  std::uint64_t singles_b = 0;
  std::int64_t guard = 0;
  CoincidenceHistogram histogram;
};

json rates_to_json(const StreamSummary& summary);
/// Inverse of rates_to_json for the fields the sweep needs.
SweepRow sweep_row_from_rates_json(const json& doc);

json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const json& doc);

struct ReportInputs {
  FitResult fit;
  std::vector<SweepRow> sweep;  // may be empty
  CwProjectionInput cw;
  double repetition_rate_hz = 80e6;
};

json build_report(const ReportInputs& in);

/// Names of fields in `doc` that are not part of the published report
/// layout, plus required fields that are missing.
std::vector<std::string> report_schema_violations(const json& doc);

/// Measured points and model curves; the model grid spans the data range.
void write_singles_plot_tsv(std::ostream& out, const ReportInputs& in);
void write_coincidence_plot_tsv(std::ostream& out, const ReportInputs& in);

/// Key/value TSV rendering of a flat or nested JSON object.
void write_json_as_tsv(std::ostream& out, const json& doc);

/// Deterministic number formatting shared by every TSV writer.
std::string format_number(double value);

}  // namespace pairchar
