#include "pairchar/sweepfit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "pairchar/errors.hpp"

namespace pairchar {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Published reference sources for the comparison table.
struct ReferenceSource {
  const char* method;
  double car_prime_max;
  double alpha;
};
constexpr std::array<ReferenceSource, 2> kReferenceSources = {{
    {"DS-fiber FPS", 6.5e1, 1.6e-10},
    {"Si-WG SFWM", 9.3e1, 2.2e-17},
}};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw FormatError("sweep CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && ptr == s.data() + s.size()) return v;
  // Accept integral values written in exponent form, e.g. 1e9.
  const double d = parse_double(s, line);
  if (d < 0 || d != std::floor(d) || d >= 1.8e19) {
    throw FormatError("sweep CSV line " + std::to_string(line) + ": bad count '" + s + "'");
  }
  return static_cast<std::uint64_t>(d);
}

double floored_sigma(std::uint64_t count) { return std::sqrt(std::max(static_cast<double>(count), 1.0)); }

/// Weighted least squares on the free columns of `design`; returns the full
/// parameter vector (clamped entries zero) and covariance.
struct LinearSolution {
  Eigen::VectorXd theta;
  Eigen::MatrixXd covariance;
};

LinearSolution solve_weighted(const Eigen::MatrixXd& design, const Eigen::VectorXd& target,
                              const std::vector<int>& free) {
  const Eigen::Index n = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd a(design.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) a.col(k) = design.col(free[static_cast<std::size_t>(k)]);
  // Column equilibration keeps I^2 and I columns comparable.
  Eigen::VectorXd scale = a.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (scale(k) == 0.0) throw DegenerateError("rank-deficient design: a parameter has no support");
  }
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
  qr.setThreshold(1e-12);
  if (qr.rank() < n) throw DegenerateError("rank-deficient design (need at least two distinct densities)");
  const Eigen::VectorXd ys = qr.solve(target);
  const Eigen::MatrixXd normal = as.transpose() * as;
  const Eigen::MatrixXd cov_s = normal.inverse();

  LinearSolution out;
  out.theta = Eigen::VectorXd::Zero(design.cols());
  out.covariance = Eigen::MatrixXd::Zero(design.cols(), design.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.theta(free[static_cast<std::size_t>(i)]) = ys(i) / scale(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      out.covariance(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]) =
          cov_s(i, j) / (scale(i) * scale(j));
    }
  }
  return out;
}

void require_points(std::span<const SweepPoint> points) {
  if (points.empty()) throw DegenerateError("no sweep points");
}

}  // namespace

SweepRow make_sweep_row(double density, std::uint64_t count_a, std::uint64_t count_b,
                        const CoincidenceHistogram& histogram, std::int64_t guard) {
  const auto rates = extract_rates(histogram, guard);
  return SweepRow{density,          histogram.pulse_count, count_a,        count_b,
                  rates.coinc_zero, rates.coinc_off_sum,   rates.off_slots};
}

SweepPoint to_sweep_point(const SweepRow& row) {
  if (row.pulses == 0) throw DegenerateError("sweep point with zero pulses");
  if (row.off_slots == 0) throw DegenerateError("sweep point with no off-zero slots");
  if (!std::isfinite(row.density) || row.density < 0) throw ParameterError("density must be >= 0");
  const double p = static_cast<double>(row.pulses);
  const double slots = static_cast<double>(row.off_slots);
  SweepPoint pt;
  pt.density = row.density;
  pt.pulses = row.pulses;
  pt.c_a = static_cast<double>(row.count_a) / p;
  pt.c_a_err = floored_sigma(row.count_a) / p;
  pt.c_b = static_cast<double>(row.count_b) / p;
  pt.c_b_err = floored_sigma(row.count_b) / p;
  pt.c_r = static_cast<double>(row.coinc_off_sum) / (slots * p);
  pt.c_r_err = floored_sigma(row.coinc_off_sum) / (slots * p);
  pt.c_s = static_cast<double>(row.coinc_zero) / p - pt.c_r;
  pt.c_s_err = std::hypot(floored_sigma(row.coinc_zero) / p, pt.c_r_err);
  return pt;
}

std::vector<SweepPoint> to_sweep_points(std::span<const SweepRow> rows) {
  std::vector<SweepPoint> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(to_sweep_point(r));
  return out;
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cells = split_csv(t);
    if (!have_header) {
      if (cells.size() != kSweepCsvColumns.size() ||
          !std::equal(cells.begin(), cells.end(), kSweepCsvColumns.begin())) {
        throw FormatError("sweep CSV line " + std::to_string(number) +
                          ": expected header density_nj_cm2,pulses,count_a,count_b,coinc_zero,"
                          "coinc_off_sum,off_slots");
      }
      have_header = true;
      continue;
    }
    if (cells.size() != kSweepCsvColumns.size()) {
      throw FormatError("sweep CSV line " + std::to_string(number) + ": expected 7 fields, got " +
                        std::to_string(cells.size()));
    }
    SweepRow r;
    r.density = parse_double(cells[0], number);
    r.pulses = parse_count(cells[1], number);
    r.count_a = parse_count(cells[2], number);
    r.count_b = parse_count(cells[3], number);
    r.coinc_zero = parse_count(cells[4], number);
    r.coinc_off_sum = parse_count(cells[5], number);
    r.off_slots = parse_count(cells[6], number);
    if (r.density < 0) throw FormatError("sweep CSV line " + std::to_string(number) + ": negative density");
    rows.push_back(r);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  for (std::size_t i = 0; i < kSweepCsvColumns.size(); ++i) {
    out << (i ? "," : "") << kSweepCsvColumns[i];
  }
  out << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& r : rows) {
    out << r.density << ',' << r.pulses << ',' << r.count_a << ',' << r.count_b << ',' << r.coinc_zero
        << ',' << r.coinc_off_sum << ',' << r.off_slots << '\n';
  }
  out.precision(old_precision);
}

SinglesFit fit_singles(std::span<const SweepPoint> points, double eta_sa, double eta_sb) {
  require_points(points);
  if (!(eta_sa > 0.0 && eta_sa <= 1.0 && eta_sb > 0.0 && eta_sb <= 1.0)) {
    throw ParameterError("singles efficiencies must lie in (0, 1]");
  }
  std::set<double> densities;
  for (const auto& p : points) {
    if (p.density > 0.0) densities.insert(p.density);
    if (!(p.c_a_err > 0.0 && p.c_b_err > 0.0)) throw ParameterError("singles errors must be > 0");
  }
  if (densities.size() < 2) {
    throw DegenerateError("rank-deficient design: need at least two distinct nonzero densities");
  }

  const Eigen::Index rows = static_cast<Eigen::Index>(2 * points.size());
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, 3);
  Eigen::VectorXd target(rows);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double i2 = p.density * p.density;
    const Eigen::Index ra = static_cast<Eigen::Index>(2 * i);
    const Eigen::Index rb = ra + 1;
    const double wa = 1.0 / p.c_a_err;
    const double wb = 1.0 / p.c_b_err;
    design(ra, 0) = wa * eta_sa * i2;
    design(ra, 1) = wa * eta_sa * p.density;
    design(rb, 0) = wb * eta_sb * i2;
    design(rb, 2) = wb * eta_sb * p.density;
    target(ra) = wa * p.c_a;
    target(rb) = wb * p.c_b;
  }

  static constexpr std::array<const char*, 3> kNames = {"alpha", "beta_a", "beta_b"};
  std::vector<int> free = {0, 1, 2};
  SinglesFit fit;
  LinearSolution sol;
  for (;;) {
    if (free.empty()) throw FitError("fit failure: every parameter clamped to zero");
    sol = solve_weighted(design, target, free);
    int worst = -1;
    for (int k : free) {
      if (sol.theta(k) < 0.0 && (worst < 0 || sol.theta(k) < sol.theta(worst))) worst = k;
    }
    if (worst < 0) break;
    fit.clamped.emplace_back(kNames[static_cast<std::size_t>(worst)]);
    std::erase(free, worst);
  }

  fit.alpha = sol.theta(0);
  fit.beta_a = sol.theta(1);
  fit.beta_b = sol.theta(2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) fit.covariance[i][j] = sol.covariance(i, j);
  }
  fit.alpha_err = std::sqrt(sol.covariance(0, 0));
  fit.beta_a_err = std::sqrt(sol.covariance(1, 1));
  fit.beta_b_err = std::sqrt(sol.covariance(2, 2));
  const Eigen::VectorXd resid = design * sol.theta - target;
  fit.chi2 = resid.squaredNorm();
  fit.dof = static_cast<std::size_t>(rows) > free.size() ? static_cast<std::size_t>(rows) - free.size() : 0;
  return fit;
}

EtaXFit fit_eta_x(std::span<const SweepPoint> points, double alpha, double eta_sa, double eta_sb) {
  require_points(points);
  EtaXFit fit;
  double sxy = 0.0;
  double sxx = 0.0;
  bool any_signal = false;
  std::size_t used = 0;
  for (const auto& p : points) {
    if (!(p.c_s_err > 0.0)) continue;
    const double x = eta_sa * eta_sb * alpha * p.density * p.density;
    const double w = 1.0 / (p.c_s_err * p.c_s_err);
    sxy += w * p.c_s * x;
    sxx += w * x * x;
    any_signal = any_signal || p.c_s != 0.0;
    if (x > 0.0) ++used;
  }
  if (!(sxx > 0.0)) {
    fit.degenerate = true;
    fit.eta_x_err = kInf;
    return fit;
  }
  fit.eta_x = sxy / sxx;
  fit.eta_x_err = 1.0 / std::sqrt(sxx);
  if (fit.eta_x < 0.0) {
    fit.eta_x = 0.0;
    fit.clamped = true;
  }
  if (!any_signal) {
    fit.degenerate = true;
    fit.eta_x_err = kInf;
  }
  for (const auto& p : points) {
    if (!(p.c_s_err > 0.0)) continue;
    const double x = eta_sa * eta_sb * alpha * p.density * p.density;
    const double r = (p.c_s - fit.eta_x * x) / p.c_s_err;
    fit.chi2 += r * r;
  }
  fit.dof = used > 1 ? used - 1 : 0;
  return fit;
}

double singles_log_slope(double density, double alpha, double beta) noexcept {
  const double ai = alpha * density;
  return (2.0 * ai + beta) / (ai + beta);
}

double predict_cr(double density, const SourceParams& p) noexcept {
  const double pair = p.alpha * density * density;
  return p.eta_sa * p.eta_sb * (pair + p.beta_a * density) * (pair + p.beta_b * density);
}

double predict_cs(double density, const SourceParams& p) noexcept {
  return p.eta_x * p.eta_sa * p.eta_sb * p.alpha * density * density;
}

std::optional<double> predict_car(double density, const SourceParams& p) noexcept {
  if (density == 0.0) {
    if (p.beta_a * p.beta_b > 0.0) return p.eta_x * p.alpha / (p.beta_a * p.beta_b);
    return std::nullopt;
  }
  const double pair = p.alpha * density * density;
  const double denom = (pair + p.beta_a * density) * (pair + p.beta_b * density);
  if (!(denom > 0.0)) return std::nullopt;
  return p.eta_x * pair / denom;
}

double cr_log_slope(double density, const SourceParams& p) noexcept {
  return singles_log_slope(density, p.alpha, p.beta_a) + singles_log_slope(density, p.alpha, p.beta_b);
}

SourceParams FitResult::params() const noexcept {
  return SourceParams{alpha, beta_a, beta_b, eta_sa, eta_sb, eta_x};
}

namespace {

void fill_figures(FitResult& r) {
  const auto fom = figures_of_merit(r);
  r.car_max = fom.car_max;
  r.car_prime_max = fom.car_prime_max;
}

}  // namespace

FitResult fit_sweep(std::span<const SweepPoint> points, double eta_sa, double eta_sb) {
  const auto singles = fit_singles(points, eta_sa, eta_sb);
  const auto eta = fit_eta_x(points, singles.alpha, eta_sa, eta_sb);
  FitResult r;
  r.alpha = singles.alpha;
  r.alpha_err = singles.alpha_err;
  r.beta_a = singles.beta_a;
  r.beta_a_err = singles.beta_a_err;
  r.beta_b = singles.beta_b;
  r.beta_b_err = singles.beta_b_err;
  r.eta_x = eta.eta_x;
  r.eta_x_err = eta.eta_x_err;
  r.eta_sa = eta_sa;
  r.eta_sb = eta_sb;
  r.singles_chi2_per_dof = singles.dof ? singles.chi2 / static_cast<double>(singles.dof) : 0.0;
  r.coincidence_chi2_per_dof = eta.dof ? eta.chi2 / static_cast<double>(eta.dof) : 0.0;
  r.clamped = singles.clamped;
  if (eta.clamped) r.clamped.emplace_back("eta_x");
  r.eta_x_degenerate = eta.degenerate;
  r.points = points.size();
  fill_figures(r);
  return r;
}

FitResult fit_joint(std::span<const SweepPoint> points, double eta_sa, double eta_sb) {
  FitResult start = fit_sweep(points, eta_sa, eta_sb);
  const std::size_t n = points.size();
  const Eigen::Index m = static_cast<Eigen::Index>(4 * n);

  auto evaluate = [&](const Eigen::Vector4d& th, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(m);
    if (jac) jac->setZero(m, 4);
    const double alpha = th(0), ba = th(1), bb = th(2), ex = th(3);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = points[i];
      const double d = p.density, d2 = d * d;
      const double sa = alpha * d2 + ba * d;
      const double sb = alpha * d2 + bb * d;
      const Eigen::Index k = static_cast<Eigen::Index>(4 * i);
      const double wa = 1.0 / p.c_a_err, wb = 1.0 / p.c_b_err;
      const double ws = p.c_s_err > 0 ? 1.0 / p.c_s_err : 0.0;
      const double wr = p.c_r_err > 0 ? 1.0 / p.c_r_err : 0.0;
      const double e2 = eta_sa * eta_sb;
      r(k) = wa * (eta_sa * sa - p.c_a);
      r(k + 1) = wb * (eta_sb * sb - p.c_b);
      r(k + 2) = ws * (ex * e2 * alpha * d2 - p.c_s);
      r(k + 3) = wr * (e2 * sa * sb - p.c_r);
      if (!jac) continue;
      auto& j = *jac;
      j(k, 0) = wa * eta_sa * d2;
      j(k, 1) = wa * eta_sa * d;
      j(k + 1, 0) = wb * eta_sb * d2;
      j(k + 1, 2) = wb * eta_sb * d;
      j(k + 2, 0) = ws * ex * e2 * d2;
      j(k + 2, 3) = ws * e2 * alpha * d2;
      j(k + 3, 0) = wr * e2 * d2 * (sa + sb);
      j(k + 3, 1) = wr * e2 * d * sb;
      j(k + 3, 2) = wr * e2 * d * sa;
    }
  };

  Eigen::Vector4d theta(start.alpha, start.beta_a, start.beta_b, start.eta_x);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  evaluate(theta, r, &jac);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::Matrix4d jtj = jac.transpose() * jac;
    const Eigen::Vector4d grad = jac.transpose() * r;
    Eigen::Matrix4d damped = jtj;
    for (int d = 0; d < 4; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-300);
    const Eigen::Vector4d step = damped.ldlt().solve(-grad);
    const Eigen::Vector4d trial = (theta + step).cwiseMax(0.0);

    Eigen::VectorXd r_trial;
    evaluate(trial, r_trial, nullptr);
    const double trial_cost = r_trial.squaredNorm();
    if (trial_cost <= cost) {
      const double rel = ((trial - theta).cwiseAbs().array() /
                          theta.cwiseAbs().array().max(1e-300)).maxCoeff();
      theta = trial;
      cost = trial_cost;
      evaluate(theta, r, &jac);
      lambda = std::max(lambda / 10.0, 1e-12);
      if (rel < 1e-10) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }

  const Eigen::Matrix4d jtj = jac.transpose() * jac;
  Eigen::Matrix4d cov = Eigen::Matrix4d::Constant(kInf);
  Eigen::FullPivLU<Eigen::Matrix4d> lu(jtj);
  if (lu.isInvertible()) cov = lu.inverse();

  FitResult out = start;
  out.method = "joint";
  out.alpha = theta(0);
  out.beta_a = theta(1);
  out.beta_b = theta(2);
  out.eta_x = theta(3);
  out.alpha_err = std::sqrt(std::abs(cov(0, 0)));
  out.beta_a_err = std::sqrt(std::abs(cov(1, 1)));
  out.beta_b_err = std::sqrt(std::abs(cov(2, 2)));
  out.eta_x_err = std::sqrt(std::abs(cov(3, 3)));
  const std::size_t dof = static_cast<std::size_t>(m) > 4 ? static_cast<std::size_t>(m) - 4 : 0;
  out.singles_chi2_per_dof = dof ? cost / static_cast<double>(dof) : 0.0;
  out.coincidence_chi2_per_dof = out.singles_chi2_per_dof;
  fill_figures(out);
  return out;
}

FiguresOfMerit figures_of_merit(const FitResult& fit) {
  FiguresOfMerit fom;
  const double background = fit.beta_a * fit.beta_b;
  if (background > 0.0) {
    fom.car_prime_max = fit.alpha / background;
    fom.car_max = fit.eta_x * fit.alpha / background;
  }
  fom.comparison.push_back({"this source (fitted)", fom.car_prime_max, fit.alpha, 1.0});
  for (const auto& ref : kReferenceSources) {
    fom.comparison.push_back({ref.method, ref.car_prime_max, ref.alpha, fit.alpha / ref.alpha});
  }
  return fom;
}

void write_comparison_tsv(std::ostream& out, const FiguresOfMerit& fom) {
  const auto old_precision = out.precision(6);
  out << "method\tcar_prime_max_ratio\talpha_pairs_per_pulse_per_nj_cm2_sq\talpha_fitted_over_method_ratio\n";
  for (const auto& row : fom.comparison) {
    out << row.method << '\t';
    if (row.car_prime_max) {
      out << *row.car_prime_max;
    } else {
      out << "NA";
    }
    out << '\t' << row.alpha << '\t' << row.alpha_ratio << '\n';
  }
  out.precision(old_precision);
}

}  // namespace pairchar
