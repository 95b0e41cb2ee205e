// Acceptance suite. Prints one "ACn PASS|FAIL" line per criterion, with
// indented detail lines under it, and exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pairchar/correlate.hpp"
#include "pairchar/errors.hpp"
#include "pairchar/projection.hpp"
#include "pairchar/ptag.hpp"
#include "pairchar/source_sim.hpp"
#include "pairchar/sweepfit.hpp"
#include "test_support.hpp"

using namespace pairchar;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void note(const std::string& what) { lines.push_back("     " + what); }
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::vector<double> log_densities(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return out;
}

struct Measured {
  std::uint64_t count_a = 0, count_b = 0;
  CoincidenceHistogram histogram;
};

Measured measure(const SourceParams& params, const SimConfig& config, std::int64_t max_slot) {
  CoincidenceCounter counter(config.clock, {max_slot, std::nullopt});
  simulate_to(params, config, [&](std::span<const TimeTag> batch) { counter.push(batch); });
  return {counter.singles_a(), counter.singles_b(), counter.histogram(config.pulse_count)};
}

CoincidenceHistogram narrow(const CoincidenceHistogram& h, std::int64_t max_slot) {
  auto out = CoincidenceHistogram::zeros(max_slot, h.period_ps, h.pulse_count);
  for (std::int64_t n = -max_slot; n <= max_slot; ++n) out.at(n) = h.at(n);
  return out;
}

bool within_rel(double got, double want, double tol) { return std::abs(got / want - 1.0) <= tol; }

// AC1 and AC4 share the fitted parameters.
FitResult g_fit;
bool g_fit_ok = false;

Outcome parameter_recovery() {
  Outcome o;
  const auto ref = SourceParams::reference();
  std::vector<SweepPoint> points;
  std::uint64_t index = 0;
  for (double d : log_densities(0.05, 16.0, 8)) {
    SimConfig c;
    c.density = d;
    c.pulse_count = 1000000000;
    c.seed = stream_seed(101, index++);
    const auto m = measure(ref, c, 50);
    points.push_back(to_sweep_point(make_sweep_row(d, m.count_a, m.count_b, m.histogram)));
    o.note(fmt("density %.4g: singles a %llu b %llu, slot-0 %llu", d,
               static_cast<unsigned long long>(m.count_a), static_cast<unsigned long long>(m.count_b),
               static_cast<unsigned long long>(m.histogram.at(0))));
  }
  g_fit = fit_sweep(points, ref.eta_sa, ref.eta_sb);
  g_fit_ok = true;
  const auto row = [&](const char* name, double got, double err, double want, double tol) {
    o.check(within_rel(got, want, tol), fmt("%s = %.5g +- %.3g (3 sigma), true %.5g, tolerance %.0f%%", name, got,
                                            3 * err, want, 100 * tol));
  };
  row("alpha", g_fit.alpha, g_fit.alpha_err, ref.alpha, 0.10);
  row("beta_a", g_fit.beta_a, g_fit.beta_a_err, ref.beta_a, 0.15);
  row("beta_b", g_fit.beta_b, g_fit.beta_b_err, ref.beta_b, 0.15);
  row("eta_x", g_fit.eta_x, g_fit.eta_x_err, ref.eta_x, 0.15);
  o.note(fmt("chi2/dof singles %.3g, coincidences %.3g", g_fit.singles_chi2_per_dof,
             g_fit.coincidence_chi2_per_dof));
  return o;
}

Outcome figures() {
  Outcome o;
  const auto ref = SourceParams::reference();
  FitResult f;
  f.alpha = ref.alpha;
  f.beta_a = ref.beta_a;
  f.beta_b = ref.beta_b;
  f.eta_x = ref.eta_x;
  const auto fom = figures_of_merit(f);
  o.check(fom.car_prime_max && within_rel(*fom.car_prime_max, 550.0, 0.02),
          fmt("CAR'_max = %.6g vs 550, tolerance 2%%", fom.car_prime_max.value_or(NAN)));
  o.check(fom.car_max && within_rel(*fom.car_max, 100.0, 0.15),
          fmt("CAR_max = %.6g vs 100, tolerance 15%%", fom.car_max.value_or(NAN)));
  return o;
}

Outcome car_trend() {
  Outcome o;
  const auto ref = SourceParams::reference();
  const double car_max = ref.eta_x * ref.alpha / (ref.beta_a * ref.beta_b);
  const auto densities = log_densities(0.05, 16.0, 8);

  struct Row {
    double density;
    CoincidenceRates w10, w50, w200;
  };
  std::vector<Row> rows;
  std::uint64_t index = 0;
  for (double d : densities) {
    // Enough pulses for about 100 accidentals over the 100 off-zero slots of W = 50.
    const double need = 100.0 / (100.0 * predict_cr(d, ref));
    SimConfig c;
    c.density = d;
    c.pulse_count = std::max<std::uint64_t>(1000000000, static_cast<std::uint64_t>(std::ceil(need)));
    c.seed = stream_seed(303, index++);
    const auto m = measure(ref, c, 200);
    rows.push_back({d, extract_rates(narrow(m.histogram, 10)), extract_rates(narrow(m.histogram, 50)),
                    extract_rates(m.histogram)});
    const auto& r = rows.back().w50;
    o.note(fmt("density %.4g, %.3g pulses: CAR %.4g +- %.3g, model %.4g, accidentals %llu", d,
               static_cast<double>(c.pulse_count), r.car.value_or(NAN), r.car_err.value_or(NAN),
               predict_car(d, ref).value_or(NAN), static_cast<unsigned long long>(r.coinc_off_sum)));
  }

  bool monotone = true;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto& x = rows[i].w50;
    const auto& y = rows[i + 1].w50;
    if (!x.car || !y.car) {
      monotone = false;
      continue;
    }
    if (*y.car - *x.car > 3.0 * std::hypot(*x.car_err, *y.car_err)) monotone = false;
  }
  o.check(monotone, "measured CAR nonincreasing with density within combined 3 sigma");

  const auto& low = rows.front().w50;
  o.check(low.car && std::abs(*low.car - car_max) <= 3.0 * *low.car_err,
          fmt("CAR at %.3g = %.4g +- %.3g vs CAR_max %.4g within 3 sigma (model CAR there %.4g)", rows.front().density,
              low.car.value_or(NAN), low.car_err.value_or(NAN), car_max, predict_car(rows.front().density, ref).value_or(NAN)));

  const double car16 = predict_car(1.6, ref).value_or(NAN);
  o.check(within_rel(car16, 80.0, 0.15), fmt("predicted CAR at 1.6 = %.4g vs observed ~80, tolerance 15%%", car16));

  bool w_ok = true;
  for (const auto& r : rows) {
    for (const auto* other : {&r.w10, &r.w200}) {
      if (std::abs(other->c_r - r.w50.c_r) > 3.0 * std::hypot(other->c_r_err, r.w50.c_r_err)) w_ok = false;
    }
    o.note(fmt("density %.4g: C_R per pulse W=10 %.4g, W=50 %.4g, W=200 %.4g (+- %.2g at W=50)", r.density,
               r.w10.c_r, r.w50.c_r, r.w200.c_r, r.w50.c_r_err));
  }
  o.check(w_ok, "C_R agrees across W = 10, 50, 200 within 3 sigma");
  return o;
}

Outcome crossovers() {
  Outcome o;
  std::vector<std::pair<const char*, SourceParams>> sets = {{"reference", SourceParams::reference()}};
  if (g_fit_ok) sets.push_back({"fitted", g_fit.params()});
  for (const auto& [name, p] : sets) {
    for (const auto& [ch, beta] : {std::pair{"a", p.beta_a}, std::pair{"b", p.beta_b}}) {
      const double x = beta / p.alpha;
      const double s = singles_log_slope(x, p.alpha, beta);
      const bool ok = std::abs(s - 1.5) < 1e-9 && singles_log_slope(x * 0.9, p.alpha, beta) < 1.5 &&
                      singles_log_slope(x * 1.1, p.alpha, beta) > 1.5;
      o.check(ok, fmt("%s singles %s: slope %.12g at beta/alpha = %.5g", name, ch, s, x));
    }
    const double x = std::sqrt(p.beta_a * p.beta_b) / p.alpha;
    const double s = cr_log_slope(x, p);
    const bool ok = std::abs(s - 3.0) < 1e-9 && cr_log_slope(x * 0.9, p) < 3.0 && cr_log_slope(x * 1.1, p) > 3.0 &&
                    std::abs(cr_log_slope(x * 1e-4, p) - 2.0) < 1e-2 && std::abs(cr_log_slope(x * 1e4, p) - 4.0) < 1e-2;
    o.check(ok, fmt("%s C_R: slope %.12g at sqrt(beta_a beta_b)/alpha = %.5g, 2 -> 4 at the ends", name, s, x));
  }
  return o;
}

Outcome cw_projection() {
  Outcome o;
  CwProjectionInput in;
  in.params = SourceParams::reference();
  const auto cw = project_cw(in);
  o.check(cw.coincidence_rate_hz >= 290.0 / 1.5 && cw.coincidence_rate_hz <= 290.0 * 1.5,
          fmt("detected coincidence rate %.4g Hz vs 290 Hz, factor 1.5", cw.coincidence_rate_hz));
  const auto ppp = photons_per_pair(in.params, in.spot_diameter_m, in.photon_energy_ev);
  o.check(ppp.photons >= 2e6 && ppp.photons <= 4e6, fmt("photons per pair %.4g in [2e6, 4e6]", ppp.photons));
  for (const auto& a : cw.assumptions) o.note("assumption: " + a);
  return o;
}

std::vector<TimeTag> random_channel(std::mt19937_64& rng, std::size_t n, std::uint64_t span, std::uint8_t ch) {
  std::vector<TimeTag> out(n);
  for (auto& t : out) t = {rng() % span, ch};
  std::sort(out.begin(), out.end());
  return out;
}

Outcome correlator_oracle() {
  Outcome o;
  std::mt19937_64 rng(606);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    PulseClock clock{1 + rng() % 20000, rng() % 10000};
    const std::uint64_t pulses = 1 + rng() % 2000;
    const std::uint64_t span = clock.origin_ps + clock.period_ps * (pulses + 1);
    const auto a = random_channel(rng, rng() % 1001, span, 0);
    const auto b = random_channel(rng, rng() % 1001, span, 1);
    CorrelateOptions opts{static_cast<std::int64_t>(1 + rng() % 64), std::nullopt};
    if (rng() % 4 == 0) opts.slot_window_ps = rng() % (clock.period_ps + 1);
    if (cross_correlate(a, b, clock, opts, pulses) != testing_support::brute_force_histogram(a, b, clock, opts, pulses)) {
      ++mismatches;
    }
  }
  o.check(mismatches == 0, fmt("cross_correlate vs all-pairs: %d mismatches in 500 instances", mismatches));

  int split_mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PulseClock clock{1 + rng() % 20000, 0};
    const std::uint64_t pulses = 1 + rng() % 2000;
    const std::uint64_t span = clock.period_ps * (pulses + 1);
    const auto a = random_channel(rng, rng() % 1001, span, 0);
    const auto b = random_channel(rng, rng() % 1001, span, 1);
    const CorrelateOptions opts{static_cast<std::int64_t>(1 + rng() % 64), std::nullopt};
    const std::int64_t split = static_cast<std::int64_t>(rng() % (pulses + 1));
    const auto whole = cross_correlate(a, b, clock, opts, pulses);
    const std::vector<std::int64_t> splits = {split};
    if (correlate_partitioned(a, b, clock, opts, pulses, splits) != whole) ++split_mismatches;
  }
  o.check(split_mismatches == 0, fmt("partition at a random split and merge: %d mismatches in 100", split_mismatches));
  return o;
}

std::string encode(const TagStreamHeader& h, const std::vector<TimeTag>& tags) {
  std::ostringstream out;
  ptag::encode_stream(h, tags, out);
  return out.str();
}

TagStream decode(const std::string& bytes) {
  std::istringstream in(bytes);
  return ptag::decode_stream(in);
}

template <class E>
std::optional<std::uint64_t> offset_of(const std::string& bytes) {
  try {
    decode(bytes);
  } catch (const E& e) {
    return e.byte_offset();
  } catch (const Error&) {
  }
  return std::nullopt;
}

Outcome codec() {
  Outcome o;
  std::mt19937_64 rng(707);
  int failures = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    TagStreamHeader h;
    h.clock = {1 + rng() % 100000, rng() % 1000000};
    h.pulse_count = rng() % 10000;
    h.resolution_ps = 1 + rng() % 1000;
    const std::uint64_t bound = *h.timestamp_bound();
    std::vector<TimeTag> tags(rng() % 64);
    for (auto& t : tags) t = {rng() % bound, static_cast<std::uint8_t>(rng() & 1)};
    std::sort(tags.begin(), tags.end());
    const auto s = decode(encode(h, tags));
    if (s.header != h || s.tags != tags) ++failures;
  }
  o.check(failures == 0, fmt("round trip: %d failures in 10000 random streams", failures));

  const auto golden = testing_support::golden_tags(1000000, 0x5EED);
  TagStreamHeader gh;
  gh.pulse_count = golden.back().timestamp_ps / 12500 + 1;
  const auto bytes = encode(gh, golden);
  const auto hash = testing_support::fnv1a64(bytes);
  o.check(bytes.size() == 16000040 && hash == 0x999c2039e17be4f5ULL,
          fmt("golden 1e6-tag stream: %zu bytes, FNV-1a %016llx", bytes.size(), static_cast<unsigned long long>(hash)));

  const auto small = encode(gh, std::vector<TimeTag>(golden.begin(), golden.begin() + 100));
  bool trunc_ok = true;
  for (std::size_t cut : {std::size_t{0}, std::size_t{17}, std::size_t{39}, std::size_t{40 + 16 * 7 + 5}, small.size() - 1}) {
    const auto got = offset_of<TruncationError>(small.substr(0, cut));
    const std::uint64_t want = cut < 40 ? cut : 40 + (cut - 40) / 16 * 16;
    if (!got || *got != want) trunc_ok = false;
  }
  o.check(trunc_ok, "truncated streams raise truncation errors at the partial header or record");

  const auto corrupt = [&](const char* what, std::size_t at, char value, std::uint64_t want, auto error) {
    auto bad = small;
    bad[at] = value;
    const auto got = offset_of<decltype(error)>(bad);
    o.check(got == want, fmt("%s reported at byte %lld, expected %llu", what, got ? static_cast<long long>(*got) : -1LL,
                             static_cast<unsigned long long>(want)));
  };
  corrupt("bad magic", 0, 'X', 0, FormatError(""));
  corrupt("channel out of range", 40 + 16 * 3 + 8, 2, 40 + 16 * 3 + 8, FormatError(""));
  corrupt("nonzero padding", 40 + 16 * 5 + 12, 1, 40 + 16 * 5 + 12, FormatError(""));
  // Clearing byte 2 of record 10 (timestamp ~1e5 ps) drops it behind record 9.
  corrupt("decreasing timestamp", 40 + 16 * 10 + 2, 0, 40 + 16 * 10, OrderingError(""));
  return o;
}

Outcome moments() {
  Outcome o;
  const auto ref = SourceParams::reference();
  const std::vector<std::pair<double, std::uint64_t>> plan = {{0.1, 10000000000ULL}, {1.6, 1000000000}, {16.0, 1000000000}};
  std::uint64_t index = 0;
  for (const auto& [d, pulses] : plan) {
    SimConfig c;
    c.density = d;
    c.pulse_count = pulses;
    c.jitter_sigma_ps = 0;
    c.dead_time_ps = 0;
    c.seed = stream_seed(808, index++);
    const auto m = measure(ref, c, 50);
    const auto r = extract_rates(m.histogram);
    const double p = static_cast<double>(pulses);
    const auto check = [&](const char* name, double got, double err, double want) {
      const double z = (got - want) / err;
      o.check(std::abs(z) <= 3.0, fmt("density %.3g %s = %.6g vs model %.6g (%.2f sigma)", d, name, got, want, z));
    };
    check("C_A", m.count_a / p, std::sqrt(static_cast<double>(std::max<std::uint64_t>(m.count_a, 1))) / p,
          expected_singles_a(ref, d));
    check("C_B", m.count_b / p, std::sqrt(static_cast<double>(std::max<std::uint64_t>(m.count_b, 1))) / p,
          expected_singles_b(ref, d));
    check("slot-0 excess", r.c_s, r.c_s_err, predict_cs(d, ref));
    check("off-slot mean", r.c_r, r.c_r_err, predict_cr(d, ref));
  }
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "parameter recovery from a simulated sweep", parameter_recovery},
      {"AC2", "figures of merit", figures},
      {"AC3", "CAR trend", car_trend},
      {"AC4", "log-log slope crossovers", crossovers},
      {"AC5", "CW projection", cw_projection},
      {"AC6", "correlator against brute force", correlator_oracle},
      {"AC7", "PTAG codec", codec},
      {"AC8", "moments without jitter or dead time", moments},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s %s %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title);
    for (const auto& l : o.lines) std::printf("    %s\n", l.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
