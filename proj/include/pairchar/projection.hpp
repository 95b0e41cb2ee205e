#pragma once

#include <string>
#include <vector>

#include "pairchar/source_sim.hpp"

namespace pairchar {

/// Continuous-wave pump. The spot is a top-hat disk of the given diameter.
struct CwProjectionInput {
  double power_w = 1e-3;
  double spot_diameter_m = 100e-6;
  double photon_energy_ev = 3.186;
  double tau_eff_s = 1e-12;  // pulse duration that carried the fitted alpha
  SourceParams params;
};

struct CwProjection {
  double spot_area_cm2 = 0.0;
  double intensity_nj_per_s_cm2 = 0.0;
  double pair_rate_hz = 0.0;
  double coincidence_rate_hz = 0.0;  // pair rate x eta_sa x eta_sb
  std::vector<std::string> assumptions;
};

/// A pulse of fluence F = I_cw * tau_eff yields alpha F^2 pairs, so the CW
/// pair rate is alpha * tau_eff * I_cw^2.
CwProjection project_cw(const CwProjectionInput& in);

struct PhotonsPerPair {
  double fluence_nj_per_cm2 = 0.0;  // fluence giving one pair per pulse
  double spot_area_cm2 = 0.0;
  double photon_energy_nj = 0.0;
  double photons = 0.0;
  std::vector<std::string> assumptions;
};

/// Pump photons per pulse at the fluence where alpha F^2 = 1.
PhotonsPerPair photons_per_pair(const SourceParams& params, double spot_diameter_m,
                                double photon_energy_ev);

double disk_area_cm2(double diameter_m) noexcept;

}  // namespace pairchar
