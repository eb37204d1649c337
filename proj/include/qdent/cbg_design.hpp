#pragma once

#include "qdent/source_model.hpp"

namespace qdent {

struct CbgGeometry {
  double disk_radius = 375.0;     // nm
  double grating_period = 365.0;  // nm
  double trench_width = 100.0;    // nm
  int n_rings = 10;

  void validate() const;
};

// Linear mode-placement rules measured over radius and period sweeps.
struct DesignRules {
  double slope_radius = 1.14;     // nm mode shift per nm radius
  double slope_period = 0.25;     // nm mode shift per nm period
  double ref_radius = 375.0;      // nm
  double ref_period = 365.0;      // nm
  double ref_lambda = 890.0;      // nm, mode at the reference geometry
  // 1σ spread of the fabricated disk radius and grating period (nm).
  double fab_sigma_radius = 0.87 / 1.14;
  double fab_sigma_period = 0.0;

  // Radius and period range over which the rules were characterized.
  double range_min = 360.0;
  double range_max = 395.0;

  void validate() const;
};

struct ModeWavelength {
  double lambda = 0.0;        // nm
  bool extrapolated = false;  // geometry outside the characterized range
};

ModeWavelength mode_wavelength(const CbgGeometry& geom, const DesignRules& rules);

// Disk radius placing the mode at target_lambda for the given period.
double solve_radius(double target_lambda, double period, const DesignRules& rules);

struct DetuningBudget {
  double sigma_lambda = 0.0;     // nm, mode-placement spread
  double cavity_fwhm = 0.0;      // nm
  double ratio = 0.0;            // sigma_lambda / cavity_fwhm
  double purcell_penalty = 1.0;  // F(0)/F(sigma_lambda), ≥ 1
};

DetuningBudget detuning_budget(const DesignRules& rules, const CavityParams& cav);

}  // namespace qdent
