#include "pairchar/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pairchar/correlate.hpp"
#include "pairchar/projection.hpp"
#include "pairchar/ptag.hpp"
#include "pairchar/report.hpp"
#include "pairchar/source_sim.hpp"
#include "pairchar/sweepfit.hpp"

namespace pairchar::cli {
namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestName = "manifest.json";

struct SimOptions {
  std::string densities;
  std::string pulses;
  std::uint64_t seed = 1;
  std::string params_path;
  double eta_s = 0, eta_sa = 0, eta_sb = 0, eta_x = 0;
  double jitter_ps = 0;
  std::uint64_t dead_time_ps = 0, resolution_ps = 0, period_ps = 0;
  unsigned threads = 1;
  CLI::Option* eta_s_opt = nullptr;
  CLI::Option* eta_sa_opt = nullptr;
  CLI::Option* eta_sb_opt = nullptr;
  CLI::Option* eta_x_opt = nullptr;
  CLI::Option* jitter_opt = nullptr;
  CLI::Option* dead_opt = nullptr;
  CLI::Option* resolution_opt = nullptr;
  CLI::Option* period_opt = nullptr;
  CLI::Option* pulses_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

struct CorrOptions {
  std::int64_t window = 50;
  std::int64_t guard = 0;
  std::uint64_t slot_window_ps = 0;
  CLI::Option* slot_window_opt = nullptr;
};

struct EtaOptions {
  double eta_s = 0.025;
  double eta_sa = 0, eta_sb = 0;
  CLI::Option* eta_sa_opt = nullptr;
  CLI::Option* eta_sb_opt = nullptr;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open input '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON at byte " + std::to_string(e.byte), e.byte);
  }
}

void write_json_file(const fs::path& path, const json& doc) {
  write_atomic(path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string stream_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "stream_%03zu", index);
  return buf;
}

void add_sim_options(CLI::App* cmd, SimOptions& o) {
  cmd->add_option("--densities", o.densities, "Density list or range, e.g. 0.05..16(log,8) [nJ/cm^2]");
  o.pulses_opt = cmd->add_option("--pulses", o.pulses, "Pulses per density (1e9 accepted)");
  o.seed_opt = cmd->add_option("--seed", o.seed, "Base RNG seed");
  cmd->add_option("--params", o.params_path, "Parameter JSON file")->check(CLI::ExistingFile);
  o.eta_s_opt = cmd->add_option("--eta-s", o.eta_s, "Singles efficiency for both paths");
  o.eta_sa_opt = cmd->add_option("--eta-sa", o.eta_sa, "Singles efficiency, path A");
  o.eta_sb_opt = cmd->add_option("--eta-sb", o.eta_sb, "Singles efficiency, path B");
  o.eta_x_opt = cmd->add_option("--eta-x", o.eta_x, "Joint pair-detection factor");
  o.jitter_opt = cmd->add_option("--jitter-ps", o.jitter_ps, "Gaussian timing jitter sigma [ps]");
  o.dead_opt = cmd->add_option("--dead-time-ps", o.dead_time_ps, "Detector dead time [ps]");
  o.resolution_opt = cmd->add_option("--resolution-ps", o.resolution_ps, "Timestamp resolution [ps]");
  o.period_opt = cmd->add_option("--period-ps", o.period_ps, "Pulse period [ps]");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
}

void add_corr_options(CLI::App* cmd, CorrOptions& o) {
  cmd->add_option("--window", o.window, "Histogram half width W [slots]")->check(CLI::Range(1, 1 << 20));
  cmd->add_option("--guard", o.guard, "Off-zero slots excluded next to slot 0")->check(CLI::NonNegativeNumber);
  o.slot_window_opt = cmd->add_option("--slot-window-ps", o.slot_window_ps, "Intra-slot acceptance width [ps]");
}

void add_eta_options(CLI::App* cmd, EtaOptions& o) {
  cmd->add_option("--eta-s", o.eta_s, "Singles efficiency for both paths")->capture_default_str();
  o.eta_sa_opt = cmd->add_option("--eta-sa", o.eta_sa, "Singles efficiency, path A");
  o.eta_sb_opt = cmd->add_option("--eta-sb", o.eta_sb, "Singles efficiency, path B");
}

CorrelateOptions correlate_options(const CorrOptions& o) {
  CorrelateOptions out;
  out.max_slot = o.window;
  if (o.slot_window_opt->count()) out.slot_window_ps = o.slot_window_ps;
  if (o.guard >= o.window) throw UsageError("--guard must be smaller than --window");
  return out;
}

/// Defaults, then the parameter file, then explicit flags.
void resolve_sim(const SimOptions& o, SourceParams& params, SimConfig& config, std::vector<double>& densities) {
  params = SourceParams::reference();
  config = SimConfig{};
  config.pulse_count = 1000000;
  std::optional<double> file_density;
  if (!o.params_path.empty()) {
    const json doc = read_json_file(o.params_path);
    apply_params_json(doc, params, config);
    if (doc.contains("density")) file_density = config.density;
  }
  if (o.pulses_opt->count()) config.pulse_count = parse_count(o.pulses);
  if (o.seed_opt->count()) config.seed = o.seed;
  if (o.eta_s_opt->count()) params.eta_sa = params.eta_sb = o.eta_s;
  if (o.eta_sa_opt->count()) params.eta_sa = o.eta_sa;
  if (o.eta_sb_opt->count()) params.eta_sb = o.eta_sb;
  if (o.eta_x_opt->count()) params.eta_x = o.eta_x;
  if (o.jitter_opt->count()) config.jitter_sigma_ps = o.jitter_ps;
  if (o.dead_opt->count()) config.dead_time_ps = o.dead_time_ps;
  if (o.resolution_opt->count()) config.resolution_ps = o.resolution_ps;
  if (o.period_opt->count()) config.clock.period_ps = o.period_ps;
  params.validate();

  if (!o.densities.empty()) {
    densities = parse_density_spec(o.densities);
  } else if (file_density) {
    densities = {*file_density};
  } else {
    throw UsageError("no densities: pass --densities or a parameter file with 'density'");
  }
  for (double d : densities) {
    SimConfig probe = config;
    probe.density = d;
    probe.validate();
  }
}

std::pair<double, double> resolve_eta(const EtaOptions& o) {
  double a = o.eta_s, b = o.eta_s;
  if (o.eta_sa_opt->count()) a = o.eta_sa;
  if (o.eta_sb_opt->count()) b = o.eta_sb;
  if (!(a > 0 && a <= 1 && b > 0 && b <= 1)) throw ParameterError("singles efficiencies must lie in (0, 1]");
  return {a, b};
}

void write_rates(const fs::path& dir, const std::string& stem, const StreamSummary& summary,
                 const std::string& format) {
  write_atomic(dir / (stem + ".hist.tsv"),
               [&](std::ostream& out) { write_histogram_tsv(out, summary.histogram); });
  const json rates = rates_to_json(summary);
  if (format == "tsv") {
    write_atomic(dir / (stem + ".rates.tsv"), [&](std::ostream& out) { write_json_as_tsv(out, rates); });
  } else {
    write_json_file(dir / (stem + ".rates.json"), rates);
  }
}

void write_sweep(const fs::path& dir, const std::vector<SweepRow>& rows) {
  write_atomic(dir / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, rows); });
}

/// Runs job(i) for i in [0, n) on up to `threads` workers and rethrows the
/// failure with the lowest index.
template <class Job>
void parallel_for(std::size_t n, unsigned threads, Job job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const SimOptions& o, const std::string& out_dir, std::ostream& out) {
  SourceParams params;
  SimConfig base;
  std::vector<double> densities;
  resolve_sim(o, params, base, densities);
  ensure_dir(out_dir);

  json streams = json::array();
  for (std::size_t i = 0; i < densities.size(); ++i) {
    SimConfig cfg = base;
    cfg.density = densities[i];
    cfg.seed = stream_seed(base.seed, i);
    const std::string file = stream_stem(i) + ".ptag";
    std::uint64_t records = 0;
    write_atomic(fs::path(out_dir) / file, [&](std::ostream& sink) {
      ptag::TagWriter writer(sink, make_header(cfg));
      simulate_to(params, cfg, [&](std::span<const TimeTag> batch) { writer.append(batch); }, o.threads);
      writer.flush();
      records = writer.records_written();
    });
    streams.push_back({{"file", file},
                       {"density_nj_per_cm2", cfg.density},
                       {"pulses_count", cfg.pulse_count},
                       {"rng_seed", cfg.seed},
                       {"tags_count", records}});
    out << file << "\tdensity=" << format_number(cfg.density) << "\ttags=" << records << '\n';
  }
  write_json_file(fs::path(out_dir) / kManifestName,
                  json{{"params", params_to_json(params, base)}, {"streams", streams}});
  return 0;
}

// --- sweep (simulate and correlate in memory) --------------------------------

int cmd_sweep(const SimOptions& o, const CorrOptions& c, const std::string& out_dir, const std::string& format,
              std::ostream& out) {
  SourceParams params;
  SimConfig base;
  std::vector<double> densities;
  resolve_sim(o, params, base, densities);
  const CorrelateOptions copts = correlate_options(c);
  ensure_dir(out_dir);

  std::vector<SweepRow> rows;
  json points = json::array();
  for (std::size_t i = 0; i < densities.size(); ++i) {
    SimConfig cfg = base;
    cfg.density = densities[i];
    cfg.seed = stream_seed(base.seed, i);
    CoincidenceCounter counter(cfg.clock, copts);
    simulate_to(params, cfg, [&](std::span<const TimeTag> batch) { counter.push(batch); }, o.threads);
    StreamSummary summary{stream_stem(i), cfg.density, counter.singles_a(), counter.singles_b(), c.guard,
                          counter.histogram(cfg.pulse_count)};
    write_rates(out_dir, stream_stem(i), summary, format);
    rows.push_back(make_sweep_row(cfg.density, summary.singles_a, summary.singles_b, summary.histogram, c.guard));
    points.push_back({{"stem", stream_stem(i)}, {"density_nj_per_cm2", cfg.density}, {"rng_seed", cfg.seed}});
    out << stream_stem(i) << "\tdensity=" << format_number(cfg.density) << "\tsingles_a=" << summary.singles_a
        << "\tsingles_b=" << summary.singles_b << "\tcoinc_zero=" << rows.back().coinc_zero << '\n';
  }
  write_sweep(out_dir, rows);
  write_json_file(fs::path(out_dir) / kManifestName,
                  json{{"params", params_to_json(params, base)}, {"points", points}});
  return 0;
}

// --- correlate --------------------------------------------------------------

std::optional<double> manifest_density(const fs::path& input) {
  const fs::path manifest = input.parent_path() / kManifestName;
  if (!fs::exists(manifest)) return std::nullopt;
  const json doc = read_json_file(manifest);
  if (!doc.contains("streams") || !doc.at("streams").is_array()) return std::nullopt;
  for (const auto& s : doc.at("streams")) {
    if (s.value("file", std::string()) == input.filename().string() && s.contains("density_nj_per_cm2") &&
        s.at("density_nj_per_cm2").is_number()) {
      return s.at("density_nj_per_cm2").get<double>();
    }
  }
  return std::nullopt;
}

int cmd_correlate(std::vector<std::string> inputs, const std::string& manifest, const std::string& densities_spec,
                  const CorrOptions& c, const std::string& out_dir, const std::string& format, unsigned threads,
                  std::ostream& out) {
  if (!manifest.empty()) {
    const json doc = read_json_file(manifest);
    if (!doc.contains("streams") || !doc.at("streams").is_array()) {
      throw FormatError(manifest + ": manifest has no 'streams' array");
    }
    for (const auto& s : doc.at("streams")) {
      inputs.push_back((fs::path(manifest).parent_path() / s.value("file", std::string())).string());
    }
  }
  if (inputs.empty()) throw UsageError("no input streams");
  std::vector<std::optional<double>> densities(inputs.size());
  if (!densities_spec.empty()) {
    const auto list = parse_density_spec(densities_spec);
    if (list.size() != inputs.size()) {
      throw UsageError("--densities lists " + std::to_string(list.size()) + " values for " +
                       std::to_string(inputs.size()) + " inputs");
    }
    for (std::size_t i = 0; i < list.size(); ++i) densities[i] = list[i];
  } else {
    for (std::size_t i = 0; i < inputs.size(); ++i) densities[i] = manifest_density(inputs[i]);
  }
  const CorrelateOptions copts = correlate_options(c);

  std::vector<StreamSummary> summaries(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t i) {
    std::ifstream in(inputs[i], std::ios::binary);
    if (!in) throw UsageError("cannot open input '" + inputs[i] + "'");
    try {
      ptag::TagReader reader(in);
      CoincidenceCounter counter(reader.header().clock, copts);
      while (auto tag = reader.next()) counter.push(*tag);
      summaries[i] = StreamSummary{inputs[i], densities[i], counter.singles_a(), counter.singles_b(), c.guard,
                                   counter.histogram(reader.header().pulse_count)};
    } catch (const Error& e) {
      throw Error(e.kind(), inputs[i] + ": " + e.what(), e.byte_offset());
    }
  });

  ensure_dir(out_dir);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string stem = fs::path(inputs[i]).stem().string();
    write_rates(out_dir, stem, summaries[i], format);
    if (densities[i]) {
      rows.push_back(make_sweep_row(*densities[i], summaries[i].singles_a, summaries[i].singles_b,
                                    summaries[i].histogram, c.guard));
    }
    const auto rates = extract_rates(summaries[i].histogram, c.guard);
    out << stem << "\tsingles_a=" << summaries[i].singles_a << "\tsingles_b=" << summaries[i].singles_b
        << "\tcoinc_zero=" << rates.coinc_zero << "\tcar=" << (rates.car ? format_number(*rates.car) : "NA")
        << '\n';
  }
  if (rows.size() == inputs.size()) write_sweep(out_dir, rows);
  return 0;
}

// --- fit --------------------------------------------------------------------

int cmd_fit(const std::string& sweep_path, const std::vector<std::string>& rates_inputs, const EtaOptions& e,
            bool joint, const std::string& out_dir, const std::string& format, std::ostream& out) {
  if (sweep_path.empty() == rates_inputs.empty()) {
    throw UsageError("pass either --sweep <csv> or rates JSON files");
  }
  std::vector<SweepRow> rows;
  if (!sweep_path.empty()) {
    std::ifstream in(sweep_path, std::ios::binary);
    if (!in) throw UsageError("cannot open input '" + sweep_path + "'");
    rows = read_sweep_csv(in);
  } else {
    for (const auto& path : rates_inputs) rows.push_back(sweep_row_from_rates_json(read_json_file(path)));
  }
  const auto [eta_sa, eta_sb] = resolve_eta(e);
  const auto points = to_sweep_points(rows);
  const FitResult fit = joint ? fit_joint(points, eta_sa, eta_sb) : fit_sweep(points, eta_sa, eta_sb);

  ensure_dir(out_dir);
  const json doc = fit_to_json(fit);
  if (format == "tsv") {
    write_atomic(fs::path(out_dir) / "fit.tsv", [&](std::ostream& o) { write_json_as_tsv(o, doc); });
  } else {
    write_json_file(fs::path(out_dir) / "fit.json", doc);
  }
  out << "alpha=" << format_number(fit.alpha) << " +- " << format_number(fit.alpha_err)
      << "\tbeta_a=" << format_number(fit.beta_a) << " +- " << format_number(fit.beta_a_err)
      << "\tbeta_b=" << format_number(fit.beta_b) << " +- " << format_number(fit.beta_b_err)
      << "\teta_x=" << format_number(fit.eta_x) << " +- " << format_number(fit.eta_x_err) << '\n';
  return 0;
}

// --- report -----------------------------------------------------------------

int cmd_report(const std::string& fit_path, const std::string& sweep_path, const CwProjectionInput& cw,
               double rep_rate_hz, const std::string& out_dir, const std::string& format, std::ostream& out) {
  ReportInputs in;
  in.fit = fit_from_json(read_json_file(fit_path));
  if (!sweep_path.empty()) {
    std::ifstream s(sweep_path, std::ios::binary);
    if (!s) throw UsageError("cannot open input '" + sweep_path + "'");
    in.sweep = read_sweep_csv(s);
  }
  in.cw = cw;
  in.repetition_rate_hz = rep_rate_hz;
  const json report = build_report(in);
  const auto violations = report_schema_violations(report);
  if (!violations.empty()) throw FormatError("report layout violation: " + violations.front());

  ensure_dir(out_dir);
  const fs::path dir(out_dir);
  if (format == "tsv") {
    write_atomic(dir / "report.tsv", [&](std::ostream& o) { write_json_as_tsv(o, report); });
  } else {
    write_json_file(dir / "report.json", report);
  }
  write_atomic(dir / "singles_plot.tsv", [&](std::ostream& o) { write_singles_plot_tsv(o, in); });
  write_atomic(dir / "coincidence_plot.tsv", [&](std::ostream& o) { write_coincidence_plot_tsv(o, in); });
  write_atomic(dir / "comparison.tsv",
               [&](std::ostream& o) { write_comparison_tsv(o, figures_of_merit(in.fit)); });
  const auto& fom = report.at("figures_of_merit");
  out << "car_max=" << (fom.at("car_max_ratio").is_number() ? format_number(fom.at("car_max_ratio")) : "NA")
      << "\tcar_prime_max="
      << (fom.at("car_prime_max_ratio").is_number() ? format_number(fom.at("car_prime_max_ratio")) : "NA")
      << "\tcw_coincidence_hz=" << format_number(report.at("cw_projection").at("coincidence_rate_hz")) << '\n';
  return 0;
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::fit:
    case ErrorKind::io:
      return 1;
    default:
      return 2;
  }
}

std::uint64_t parse_count(const std::string& text) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("bad count '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v) || v < 0 || v != std::floor(v) || v >= 1.8446744073709552e19) {
    throw UsageError("bad count '" + text + "'");
  }
  // Plain integers beyond 2^53 keep their exact value.
  if (text.find_first_not_of("0123456789") == std::string::npos) return std::stoull(text);
  return static_cast<std::uint64_t>(v);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photon-pair source characterization: simulate, correlate, fit, report", "pairchar"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pairchar 1.0");

  SimOptions sim_o, sweep_o;
  CorrOptions sweep_c, corr_c;
  EtaOptions fit_e;
  std::string sim_out, sweep_out, corr_out, fit_out, report_out;
  std::string sweep_format = "json", corr_format = "json", fit_format = "json", report_format = "json";
  const auto formats = CLI::IsMember({"json", "tsv"});

  auto* simulate = app.add_subcommand("simulate", "Simulate PTAG streams for a density list");
  add_sim_options(simulate, sim_o);
  simulate->add_option("--out", sim_out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Simulate and correlate in memory; writes sweep.csv");
  add_sim_options(sweep, sweep_o);
  add_corr_options(sweep, sweep_c);
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_option("--format", sweep_format, "Rates format")->check(formats);

  std::vector<std::string> corr_inputs;
  std::string corr_manifest, corr_densities;
  unsigned corr_threads = 1;
  auto* correlate = app.add_subcommand("correlate", "Histogram and rates for PTAG streams");
  correlate->add_option("inputs", corr_inputs, "PTAG files");
  correlate->add_option("--manifest", corr_manifest, "Manifest written by simulate")->check(CLI::ExistingFile);
  correlate->add_option("--densities", corr_densities, "Density per input, in input order");
  add_corr_options(correlate, corr_c);
  correlate->add_option("--threads", corr_threads, "Streams correlated in parallel")->check(CLI::Range(1u, 256u));
  correlate->add_option("--out", corr_out, "Output directory")->required();
  correlate->add_option("--format", corr_format, "Rates format")->check(formats);

  std::string fit_sweep_path;
  std::vector<std::string> fit_inputs;
  bool fit_joint_flag = false;
  auto* fit = app.add_subcommand("fit", "Fit the source model to a sweep");
  fit->add_option("--sweep", fit_sweep_path, "Sweep CSV");
  fit->add_option("rates", fit_inputs, "Rates JSON files (instead of --sweep)");
  add_eta_options(fit, fit_e);
  fit->add_flag("--joint", fit_joint_flag, "Refit all parameters against singles and coincidences together");
  fit->add_option("--out", fit_out, "Output directory")->required();
  fit->add_option("--format", fit_format, "Output format")->check(formats);

  std::string report_fit, report_sweep;
  CwProjectionInput cw;
  double rep_rate_hz = 80e6;
  auto* report = app.add_subcommand("report", "Figures of merit, projections and plot data");
  report->add_option("--fit", report_fit, "fit.json from the fit command")->required();
  report->add_option("--sweep", report_sweep, "Sweep CSV for measured points");
  report->add_option("--power-w", cw.power_w, "CW pump power [W]")->capture_default_str();
  report->add_option("--spot-diameter-m", cw.spot_diameter_m, "Top-hat spot diameter [m]")->capture_default_str();
  report->add_option("--photon-energy-ev", cw.photon_energy_ev, "Pump photon energy [eV]")->capture_default_str();
  report->add_option("--tau-eff-s", cw.tau_eff_s, "Pulse duration behind alpha [s]")->capture_default_str();
  report->add_option("--rep-rate-hz", rep_rate_hz, "Pulse repetition rate for Hz columns")->capture_default_str();
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_option("--format", report_format, "Report format")->check(formats);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::CallForVersion&) {
      out << "pairchar 1.0\n";
      return 0;
    } catch (const CLI::ParseError& e) {
      std::string msg = e.what();
      for (auto& ch : msg) {
        if (ch == '\n') ch = ' ';
      }
      err << "error: usage: " << msg << '\n';
      return 2;
    }

    if (*simulate) return cmd_simulate(sim_o, sim_out, out);
    if (*sweep) return cmd_sweep(sweep_o, sweep_c, sweep_out, sweep_format, out);
    if (*correlate) {
      return cmd_correlate(corr_inputs, corr_manifest, corr_densities, corr_c, corr_out, corr_format, corr_threads,
                           out);
    }
    if (*fit) return cmd_fit(fit_sweep_path, fit_inputs, fit_e, fit_joint_flag, fit_out, fit_format, out);
    if (*report) return cmd_report(report_fit, report_sweep, cw, rep_rate_hz, report_out, report_format, out);
    err << "error: usage: no command\n";
    return 2;
  } catch (const Error& e) {
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    err << "error: " << to_string(e.kind()) << ": " << msg;
    if (e.byte_offset()) err << " [byte " << *e.byte_offset() << "]";
    err << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pairchar::cli
