#include "pairchar/projection.hpp"

#include <cmath>
#include <numbers>

#include "pairchar/errors.hpp"

namespace pairchar {
namespace {

constexpr double kElectronVoltJ = 1.602176634e-19;
constexpr double kNanojoulePerJoule = 1e9;

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double disk_area_cm2(double diameter_m) noexcept {
  const double radius_cm = 0.5 * diameter_m * 100.0;
  return std::numbers::pi * radius_cm * radius_cm;
}

CwProjection project_cw(const CwProjectionInput& in) {
  if (!(std::isfinite(in.power_w) && in.power_w >= 0.0)) throw ParameterError("power must be >= 0");
  if (!positive(in.spot_diameter_m)) throw ParameterError("spot diameter must be > 0");
  if (!positive(in.tau_eff_s)) throw ParameterError("effective pulse duration must be > 0");
  if (!positive(in.photon_energy_ev)) throw ParameterError("photon energy must be > 0");
  in.params.validate();

  CwProjection out;
  out.spot_area_cm2 = disk_area_cm2(in.spot_diameter_m);
  out.intensity_nj_per_s_cm2 = in.power_w * kNanojoulePerJoule / out.spot_area_cm2;
  out.pair_rate_hz = in.params.alpha * in.tau_eff_s * out.intensity_nj_per_s_cm2 * out.intensity_nj_per_s_cm2;
  out.coincidence_rate_hz = out.pair_rate_hz * in.params.eta_sa * in.params.eta_sb;
  out.assumptions = {
      "spot is a top-hat disk; spot size is its diameter",
      "intensity is uniform over the spot: I_cw = power / area",
      "alpha transfers to CW through fluence I_cw * tau_eff per tau_eff window",
      "detected coincidences = pair rate x eta_sa x eta_sb (no eta_x factor)",
      "photon energy is not used by the rate projection",
  };
  return out;
}

PhotonsPerPair photons_per_pair(const SourceParams& params, double spot_diameter_m,
                                double photon_energy_ev) {
  if (!(params.alpha > 0.0)) throw ParameterError("photons per pair undefined for alpha = 0");
  if (!positive(spot_diameter_m)) throw ParameterError("spot diameter must be > 0");
  if (!positive(photon_energy_ev)) throw ParameterError("photon energy must be > 0");

  PhotonsPerPair out;
  out.fluence_nj_per_cm2 = 1.0 / std::sqrt(params.alpha);
  out.spot_area_cm2 = disk_area_cm2(spot_diameter_m);
  out.photon_energy_nj = photon_energy_ev * kElectronVoltJ * kNanojoulePerJoule;
  out.photons = out.fluence_nj_per_cm2 * out.spot_area_cm2 / out.photon_energy_nj;
  out.assumptions = {
      "spot is a top-hat disk; spot size is its diameter",
      "one pair per pulse at fluence F with alpha F^2 = 1",
      "every pump photon has the stated photon energy",
  };
  return out;
}

}  // namespace pairchar
