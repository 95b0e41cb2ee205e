#include "pairchar/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <system_error>

#include "pairchar/errors.hpp"

namespace pairchar {
namespace fs = std::filesystem;

namespace {

json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double require_number(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number()) {
    throw FormatError(std::string("missing numeric field '") + key + "'");
  }
  return doc.at(key).get<double>();
}

std::uint64_t require_count(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number_unsigned()) {
    throw FormatError(std::string("missing count field '") + key + "'");
  }
  return doc.at(key).get<std::uint64_t>();
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(n - 1)));
  }
  return out;
}

std::pair<double, double> model_range(const ReportInputs& in) {
  double lo = 0.0, hi = 0.0;
  for (const auto& r : in.sweep) {
    if (r.density <= 0) continue;
    lo = lo == 0.0 ? r.density : std::min(lo, r.density);
    hi = std::max(hi, r.density);
  }
  if (lo == 0.0) return {0.05, 16.0};
  return {lo / 2.0, hi * 2.0};
}

// Layout of the report document. Leaves are type tags.
const json& report_layout() {
  static const json layout = [] {
    const json cmp_row = {{"method", "string"},
                          {"car_prime_max_ratio", "number?"},
                          {"alpha_pairs_per_pulse_per_nj_cm2_sq", "number"},
                          {"alpha_fitted_over_method_ratio", "number"}};
    const json fit = {{"method", "string"},
                      {"points_count", "number"},
                      {"alpha_pairs_per_pulse_per_nj_cm2_sq", "number"},
                      {"alpha_err_pairs_per_pulse_per_nj_cm2_sq", "number?"},
                      {"beta_a_photons_per_pulse_per_nj_cm2", "number"},
                      {"beta_a_err_photons_per_pulse_per_nj_cm2", "number?"},
                      {"beta_b_photons_per_pulse_per_nj_cm2", "number"},
                      {"beta_b_err_photons_per_pulse_per_nj_cm2", "number?"},
                      {"eta_x_fraction", "number"},
                      {"eta_x_err_fraction", "number?"},
                      {"eta_sa_fraction", "number"},
                      {"eta_sb_fraction", "number"},
                      {"singles_chi2_per_dof_ratio", "number"},
                      {"coincidence_chi2_per_dof_ratio", "number"},
                      {"clamped_parameters", "strings"},
                      {"eta_x_degenerate", "bool"},
                      {"car_max_ratio", "number?"},
                      {"car_prime_max_ratio", "number?"}};
    const json point = {{"density_nj_per_cm2", "number"},
                        {"pulses_count", "number"},
                        {"c_a_hz", "number"},
                        {"c_a_err_hz", "number"},
                        {"model_c_a_hz", "number"},
                        {"c_b_hz", "number"},
                        {"c_b_err_hz", "number"},
                        {"model_c_b_hz", "number"},
                        {"c_s_hz", "number"},
                        {"c_s_err_hz", "number"},
                        {"model_c_s_hz", "number"},
                        {"c_r_hz", "number"},
                        {"c_r_err_hz", "number"},
                        {"model_c_r_hz", "number"},
                        {"car_ratio", "number?"},
                        {"model_car_ratio", "number?"}};
    return json{
        {"repetition_rate_hz", "number"},
        {"fit", fit},
        {"figures_of_merit",
         {{"car_max_ratio", "number?"}, {"car_prime_max_ratio", "number?"}, {"comparison", json::array({cmp_row})}}},
        {"crossover",
         {{"singles_a_slope_1p5_density_nj_per_cm2", "number?"},
          {"singles_b_slope_1p5_density_nj_per_cm2", "number?"},
          {"cr_slope_3_density_nj_per_cm2", "number?"}}},
        {"cw_projection",
         {{"power_w", "number"},
          {"spot_diameter_m", "number"},
          {"spot_area_cm2", "number"},
          {"photon_energy_ev", "number"},
          {"tau_eff_s", "number"},
          {"intensity_nj_per_s_cm2", "number"},
          {"pair_rate_hz", "number"},
          {"coincidence_rate_hz", "number"},
          {"assumptions", "strings"}}},
        {"photons_per_pair",
         {{"spot_diameter_m", "number?"},
          {"photon_energy_ev", "number?"},
          {"fluence_nj_per_cm2", "number?"},
          {"photons_count", "number?"},
          {"assumptions", "strings"}}},
        {"points", json::array({point})},
    };
  }();
  return layout;
}

void check_layout(const json& doc, const json& layout, const std::string& path,
                  std::vector<std::string>& out) {
  if (layout.is_string()) {
    const auto tag = layout.get<std::string>();
    bool ok = false;
    if (tag == "number") ok = doc.is_number();
    if (tag == "number?") ok = doc.is_number() || doc.is_null();
    if (tag == "string") ok = doc.is_string();
    if (tag == "bool") ok = doc.is_boolean();
    if (tag == "strings") {
      ok = doc.is_array() && std::all_of(doc.begin(), doc.end(), [](const json& e) { return e.is_string(); });
    }
    if (!ok) out.push_back(path + ": expected " + tag);
    return;
  }
  if (layout.is_array()) {
    if (!doc.is_array()) {
      out.push_back(path + ": expected array");
      return;
    }
    for (std::size_t i = 0; i < doc.size(); ++i) {
      check_layout(doc[i], layout[0], path + "[" + std::to_string(i) + "]", out);
    }
    return;
  }
  if (!doc.is_object()) {
    out.push_back(path + ": expected object");
    return;
  }
  for (const auto& [key, value] : doc.items()) {
    if (!layout.contains(key)) out.push_back(path + "." + key + ": unexpected field");
  }
  for (const auto& [key, sub] : layout.items()) {
    if (!doc.contains(key)) {
      out.push_back(path + "." + key + ": missing field");
    } else {
      check_layout(doc.at(key), sub, path + "." + key, out);
    }
  }
}

}  // namespace

std::string format_number(double value) {
  if (!std::isfinite(value)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  fs::path tmp = path;
  tmp += ".partial";
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
      writer(out);
      out.flush();
      if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

void apply_params_json(const json& doc, SourceParams& params, SimConfig& config) {
  if (!doc.is_object()) throw FormatError("parameter document must be a JSON object");
  static const std::set<std::string> kKnown = {
      "alpha",   "beta_a",      "beta_b",       "eta_sa",     "eta_sb",    "eta_x",   "density",
      "pulse_count", "pulse_clock", "jitter_sigma", "resolution", "dead_time", "rng_seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKnown.count(key)) throw FormatError("unknown parameter field '" + key + "'");
  }
  auto number = [&](const json& d, const char* key, double& dst) {
    if (!d.contains(key)) return;
    if (!d.at(key).is_number()) throw FormatError(std::string("field '") + key + "' must be a number");
    dst = d.at(key).get<double>();
  };
  auto count = [&](const json& d, const char* key, std::uint64_t& dst) {
    if (!d.contains(key)) return;
    const auto& v = d.at(key);
    if (v.is_number_unsigned()) {
      dst = v.get<std::uint64_t>();
    } else if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() == std::floor(v.get<double>()) &&
               v.get<double>() < 1.8e19) {
      dst = static_cast<std::uint64_t>(v.get<double>());
    } else {
      throw FormatError(std::string("field '") + key + "' must be a nonnegative integer");
    }
  };
  number(doc, "alpha", params.alpha);
  number(doc, "beta_a", params.beta_a);
  number(doc, "beta_b", params.beta_b);
  number(doc, "eta_sa", params.eta_sa);
  number(doc, "eta_sb", params.eta_sb);
  number(doc, "eta_x", params.eta_x);
  number(doc, "density", config.density);
  count(doc, "pulse_count", config.pulse_count);
  if (doc.contains("pulse_clock")) {
    const auto& clock = doc.at("pulse_clock");
    if (!clock.is_object()) throw FormatError("field 'pulse_clock' must be an object");
    for (const auto& [key, value] : clock.items()) {
      if (key != "period" && key != "origin") throw FormatError("unknown pulse_clock field '" + key + "'");
    }
    count(clock, "period", config.clock.period_ps);
    count(clock, "origin", config.clock.origin_ps);
  }
  number(doc, "jitter_sigma", config.jitter_sigma_ps);
  count(doc, "resolution", config.resolution_ps);
  count(doc, "dead_time", config.dead_time_ps);
  count(doc, "rng_seed", config.seed);
}

json params_to_json(const SourceParams& p, const SimConfig& c) {
  return json{{"alpha", p.alpha},
              {"beta_a", p.beta_a},
              {"beta_b", p.beta_b},
              {"eta_sa", p.eta_sa},
              {"eta_sb", p.eta_sb},
              {"eta_x", p.eta_x},
              {"density", c.density},
              {"pulse_count", c.pulse_count},
              {"pulse_clock", {{"period", c.clock.period_ps}, {"origin", c.clock.origin_ps}}},
              {"jitter_sigma", c.jitter_sigma_ps},
              {"resolution", c.resolution_ps},
              {"dead_time", c.dead_time_ps},
              {"rng_seed", c.seed}};
}

std::vector<double> parse_density_spec(const std::string& spec) {
  static const std::regex range(
      R"(^\s*([0-9.eE+-]+)\s*\.\.\s*([0-9.eE+-]+)\s*\(\s*(log|lin)\s*,\s*([0-9]+)\s*\)\s*$)");
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw UsageError("bad density '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v) || v < 0) throw UsageError("bad density '" + s + "'");
    return v;
  };

  std::smatch m;
  std::vector<double> out;
  if (std::regex_match(spec, m, range)) {
    const double lo = to_double(m[1].str());
    const double hi = to_double(m[2].str());
    const int n = std::stoi(m[4].str());
    if (n < 1) throw UsageError("density range needs at least one point");
    const bool log = m[3].str() == "log";
    if (log && (lo <= 0 || hi <= 0)) throw UsageError("log density range needs positive bounds");
    for (int k = 0; k < n; ++k) {
      const double f = n == 1 ? 0.0 : static_cast<double>(k) / (n - 1);
      out.push_back(log ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    if (n > 1) out.back() = hi;
    return out;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    std::string item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(to_double(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw UsageError("empty density list");
  return out;
}

json rates_to_json(const StreamSummary& s) {
  const auto rates = extract_rates(s.histogram, s.guard);
  const double pulses = static_cast<double>(s.histogram.pulse_count);
  const double hz = 1e12 / static_cast<double>(s.histogram.period_ps);
  return json{
      {"source", s.source},
      {"density_nj_per_cm2", number_or_null(s.density)},
      {"pulses_count", s.histogram.pulse_count},
      {"period_ps", s.histogram.period_ps},
      {"window_slots", s.histogram.max_slot},
      {"guard_slots", s.guard},
      {"singles_a_count", s.singles_a},
      {"singles_b_count", s.singles_b},
      {"coinc_zero_count", rates.coinc_zero},
      {"coinc_off_sum_count", rates.coinc_off_sum},
      {"off_slots_count", rates.off_slots},
      {"c_a_per_pulse", static_cast<double>(s.singles_a) / pulses},
      {"c_a_hz", static_cast<double>(s.singles_a) / pulses * hz},
      {"c_b_per_pulse", static_cast<double>(s.singles_b) / pulses},
      {"c_b_hz", static_cast<double>(s.singles_b) / pulses * hz},
      {"c_s_per_pulse", rates.c_s},
      {"c_s_err_per_pulse", rates.c_s_err},
      {"c_s_hz", rates.c_s * hz},
      {"c_s_err_hz", rates.c_s_err * hz},
      {"c_r_per_pulse", rates.c_r},
      {"c_r_err_per_pulse", rates.c_r_err},
      {"c_r_hz", rates.c_r * hz},
      {"c_r_err_hz", rates.c_r_err * hz},
      {"car_ratio", number_or_null(rates.car)},
      {"car_err_ratio", number_or_null(rates.car_err)},
  };
}

SweepRow sweep_row_from_rates_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("rates document must be a JSON object");
  if (!doc.contains("density_nj_per_cm2") || !doc.at("density_nj_per_cm2").is_number()) {
    throw FormatError("rates document has no density; correlate with --densities or a manifest");
  }
  SweepRow r;
  r.density = doc.at("density_nj_per_cm2").get<double>();
  r.pulses = require_count(doc, "pulses_count");
  r.count_a = require_count(doc, "singles_a_count");
  r.count_b = require_count(doc, "singles_b_count");
  r.coinc_zero = require_count(doc, "coinc_zero_count");
  r.coinc_off_sum = require_count(doc, "coinc_off_sum_count");
  r.off_slots = require_count(doc, "off_slots_count");
  return r;
}

json fit_to_json(const FitResult& f) {
  return json{
      {"method", f.method},
      {"points_count", f.points},
      {"alpha_pairs_per_pulse_per_nj_cm2_sq", f.alpha},
      {"alpha_err_pairs_per_pulse_per_nj_cm2_sq", finite_or_null(f.alpha_err)},
      {"beta_a_photons_per_pulse_per_nj_cm2", f.beta_a},
      {"beta_a_err_photons_per_pulse_per_nj_cm2", finite_or_null(f.beta_a_err)},
      {"beta_b_photons_per_pulse_per_nj_cm2", f.beta_b},
      {"beta_b_err_photons_per_pulse_per_nj_cm2", finite_or_null(f.beta_b_err)},
      {"eta_x_fraction", f.eta_x},
      {"eta_x_err_fraction", finite_or_null(f.eta_x_err)},
      {"eta_sa_fraction", f.eta_sa},
      {"eta_sb_fraction", f.eta_sb},
      {"singles_chi2_per_dof_ratio", f.singles_chi2_per_dof},
      {"coincidence_chi2_per_dof_ratio", f.coincidence_chi2_per_dof},
      {"clamped_parameters", f.clamped},
      {"eta_x_degenerate", f.eta_x_degenerate},
      {"car_max_ratio", number_or_null(f.car_max)},
      {"car_prime_max_ratio", number_or_null(f.car_prime_max)},
  };
}

FitResult fit_from_json(const json& doc) {
  if (!doc.is_object()) throw FormatError("fit document must be a JSON object");
  auto optional_number = [&](const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::numeric_limits<double>::infinity();
    return require_number(doc, key);
  };
  FitResult f;
  f.method = doc.value("method", std::string("linear"));
  f.points = doc.value("points_count", std::size_t{0});
  f.alpha = require_number(doc, "alpha_pairs_per_pulse_per_nj_cm2_sq");
  f.alpha_err = optional_number("alpha_err_pairs_per_pulse_per_nj_cm2_sq");
  f.beta_a = require_number(doc, "beta_a_photons_per_pulse_per_nj_cm2");
  f.beta_a_err = optional_number("beta_a_err_photons_per_pulse_per_nj_cm2");
  f.beta_b = require_number(doc, "beta_b_photons_per_pulse_per_nj_cm2");
  f.beta_b_err = optional_number("beta_b_err_photons_per_pulse_per_nj_cm2");
  f.eta_x = require_number(doc, "eta_x_fraction");
  f.eta_x_err = optional_number("eta_x_err_fraction");
  f.eta_sa = require_number(doc, "eta_sa_fraction");
  f.eta_sb = require_number(doc, "eta_sb_fraction");
  f.singles_chi2_per_dof = doc.value("singles_chi2_per_dof_ratio", 0.0);
  f.coincidence_chi2_per_dof = doc.value("coincidence_chi2_per_dof_ratio", 0.0);
  f.clamped = doc.value("clamped_parameters", std::vector<std::string>{});
  f.eta_x_degenerate = doc.value("eta_x_degenerate", false);
  const auto fom = figures_of_merit(f);
  f.car_max = fom.car_max;
  f.car_prime_max = fom.car_prime_max;
  return f;
}

json build_report(const ReportInputs& in) {
  const auto params = in.fit.params();
  const auto fom = figures_of_merit(in.fit);
  const double hz = in.repetition_rate_hz;

  json comparison = json::array();
  for (const auto& row : fom.comparison) {
    comparison.push_back({{"method", row.method},
                          {"car_prime_max_ratio", number_or_null(row.car_prime_max)},
                          {"alpha_pairs_per_pulse_per_nj_cm2_sq", row.alpha},
                          {"alpha_fitted_over_method_ratio", row.alpha_ratio}});
  }

  auto crossover = [&](double beta) -> std::optional<double> {
    if (params.alpha > 0 && beta > 0) return beta / params.alpha;
    return std::nullopt;
  };
  std::optional<double> cr_cross;
  if (params.alpha > 0 && params.beta_a * params.beta_b > 0) {
    cr_cross = std::sqrt(params.beta_a * params.beta_b) / params.alpha;
  }

  CwProjectionInput cw_in = in.cw;
  cw_in.params = params;
  const auto cw = project_cw(cw_in);
  json ppp = {{"spot_diameter_m", cw_in.spot_diameter_m},
              {"photon_energy_ev", cw_in.photon_energy_ev},
              {"fluence_nj_per_cm2", nullptr},
              {"photons_count", nullptr},
              {"assumptions", json::array()}};
  if (params.alpha > 0) {
    const auto n = photons_per_pair(params, cw_in.spot_diameter_m, cw_in.photon_energy_ev);
    ppp["fluence_nj_per_cm2"] = n.fluence_nj_per_cm2;
    ppp["photons_count"] = n.photons;
    ppp["assumptions"] = n.assumptions;
  }

  json points = json::array();
  for (const auto& row : in.sweep) {
    const auto pt = to_sweep_point(row);
    std::optional<double> car;
    if (pt.c_r > 0) car = pt.c_s / pt.c_r;
    points.push_back({
        {"density_nj_per_cm2", pt.density},
        {"pulses_count", pt.pulses},
        {"c_a_hz", pt.c_a * hz},
        {"c_a_err_hz", pt.c_a_err * hz},
        {"model_c_a_hz", expected_singles_a(params, pt.density) * hz},
        {"c_b_hz", pt.c_b * hz},
        {"c_b_err_hz", pt.c_b_err * hz},
        {"model_c_b_hz", expected_singles_b(params, pt.density) * hz},
        {"c_s_hz", pt.c_s * hz},
        {"c_s_err_hz", pt.c_s_err * hz},
        {"model_c_s_hz", predict_cs(pt.density, params) * hz},
        {"c_r_hz", pt.c_r * hz},
        {"c_r_err_hz", pt.c_r_err * hz},
        {"model_c_r_hz", predict_cr(pt.density, params) * hz},
        {"car_ratio", number_or_null(car)},
        {"model_car_ratio", number_or_null(predict_car(pt.density, params))},
    });
  }

  return json{
      {"repetition_rate_hz", hz},
      {"fit", fit_to_json(in.fit)},
      {"figures_of_merit",
       {{"car_max_ratio", number_or_null(fom.car_max)},
        {"car_prime_max_ratio", number_or_null(fom.car_prime_max)},
        {"comparison", comparison}}},
      {"crossover",
       {{"singles_a_slope_1p5_density_nj_per_cm2", number_or_null(crossover(params.beta_a))},
        {"singles_b_slope_1p5_density_nj_per_cm2", number_or_null(crossover(params.beta_b))},
        {"cr_slope_3_density_nj_per_cm2", number_or_null(cr_cross)}}},
      {"cw_projection",
       {{"power_w", cw_in.power_w},
        {"spot_diameter_m", cw_in.spot_diameter_m},
        {"spot_area_cm2", cw.spot_area_cm2},
        {"photon_energy_ev", cw_in.photon_energy_ev},
        {"tau_eff_s", cw_in.tau_eff_s},
        {"intensity_nj_per_s_cm2", cw.intensity_nj_per_s_cm2},
        {"pair_rate_hz", cw.pair_rate_hz},
        {"coincidence_rate_hz", cw.coincidence_rate_hz},
        {"assumptions", cw.assumptions}}},
      {"photons_per_pair", ppp},
      {"points", points},
  };
}

std::vector<std::string> report_schema_violations(const json& doc) {
  std::vector<std::string> out;
  check_layout(doc, report_layout(), "$", out);
  return out;
}

void write_singles_plot_tsv(std::ostream& out, const ReportInputs& in) {
  const auto p = in.fit.params();
  const double hz = in.repetition_rate_hz;
  out << "series\tdensity_nj_per_cm2\tc_a_hz\tc_a_err_hz\tc_b_hz\tc_b_err_hz\t"
         "linear_a_hz\tquadratic_a_hz\tlinear_b_hz\tquadratic_b_hz\n";
  for (const auto& row : in.sweep) {
    const auto pt = to_sweep_point(row);
    out << "measured\t" << format_number(pt.density) << '\t' << format_number(pt.c_a * hz) << '\t'
        << format_number(pt.c_a_err * hz) << '\t' << format_number(pt.c_b * hz) << '\t'
        << format_number(pt.c_b_err * hz) << "\tNA\tNA\tNA\tNA\n";
  }
  const auto [lo, hi] = model_range(in);
  for (double d : log_grid(lo, hi, 64)) {
    const double quad = p.alpha * d * d;
    out << "model\t" << format_number(d) << '\t' << format_number(expected_singles_a(p, d) * hz) << "\tNA\t"
        << format_number(expected_singles_b(p, d) * hz) << "\tNA\t"
        << format_number(p.eta_sa * p.beta_a * d * hz) << '\t' << format_number(p.eta_sa * quad * hz) << '\t'
        << format_number(p.eta_sb * p.beta_b * d * hz) << '\t' << format_number(p.eta_sb * quad * hz) << '\n';
  }
}

void write_coincidence_plot_tsv(std::ostream& out, const ReportInputs& in) {
  const auto p = in.fit.params();
  const double hz = in.repetition_rate_hz;
  out << "series\tdensity_nj_per_cm2\tc_s_hz\tc_s_err_hz\tc_r_hz\tc_r_err_hz\tcar_ratio\tcar_err_ratio\n";
  for (const auto& row : in.sweep) {
    const auto pt = to_sweep_point(row);
    std::string car = "NA", car_err = "NA";
    if (pt.c_r > 0) {
      const double zero = static_cast<double>(row.coinc_zero);
      const double off = static_cast<double>(row.coinc_off_sum);
      const double slots = static_cast<double>(row.off_slots);
      car = format_number(pt.c_s / pt.c_r);
      car_err = format_number(std::hypot(std::sqrt(std::max(zero, 1.0)) * slots / off,
                                         zero * slots * std::sqrt(off) / (off * off)));
    }
    out << "measured\t" << format_number(pt.density) << '\t' << format_number(pt.c_s * hz) << '\t'
        << format_number(pt.c_s_err * hz) << '\t' << format_number(pt.c_r * hz) << '\t'
        << format_number(pt.c_r_err * hz) << '\t' << car << '\t' << car_err << '\n';
  }
  const auto [lo, hi] = model_range(in);
  for (double d : log_grid(lo, hi, 64)) {
    const auto car = predict_car(d, p);
    out << "model\t" << format_number(d) << '\t' << format_number(predict_cs(d, p) * hz) << "\tNA\t"
        << format_number(predict_cr(d, p) * hz) << "\tNA\t" << (car ? format_number(*car) : "NA") << "\tNA\n";
  }
}

void write_json_as_tsv(std::ostream& out, const json& doc) {
  out << "field\tvalue\n";
  const json flat = doc.flatten();
  for (const auto& [key, value] : flat.items()) {
    out << key << '\t';
    if (value.is_number_float()) {
      out << format_number(value.get<double>());
    } else if (value.is_string()) {
      out << value.get<std::string>();
    } else if (value.is_null()) {
      out << "NA";
    } else {
      out << value.dump();
    }
    out << '\n';
  }
}

}  // namespace pairchar
