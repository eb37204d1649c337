#include "qdent/cbg_design.hpp"

#include <cmath>

#include "qdent/error.hpp"

namespace qdent {

void CbgGeometry::validate() const {
  if (!(disk_radius > 0 && grating_period > 0 && trench_width > 0 && n_rings > 0)) {
    throw ValidationError("CBG geometry values must be positive");
  }
}

void DesignRules::validate() const {
  if (!(slope_radius > 0 && slope_period > 0)) throw ValidationError("design slopes must be > 0");
  if (!(fab_sigma_radius >= 0 && fab_sigma_period >= 0)) {
    throw ValidationError("fabrication spreads must be >= 0");
  }
  if (!(ref_radius > 0 && ref_period > 0 && ref_lambda > 0)) {
    throw ValidationError("reference geometry must be positive");
  }
  if (!(range_min < range_max)) throw ValidationError("design range is empty");
}

ModeWavelength mode_wavelength(const CbgGeometry& geom, const DesignRules& rules) {
  geom.validate();
  rules.validate();
  ModeWavelength out;
  out.lambda = rules.ref_lambda + rules.slope_radius * (geom.disk_radius - rules.ref_radius) +
               rules.slope_period * (geom.grating_period - rules.ref_period);
  auto outside = [&](double v) { return v < rules.range_min || v > rules.range_max; };
  out.extrapolated = outside(geom.disk_radius) || outside(geom.grating_period);
  return out;
}

double solve_radius(double target_lambda, double period, const DesignRules& rules) {
  rules.validate();
  return rules.ref_radius +
         (target_lambda - rules.ref_lambda - rules.slope_period * (period - rules.ref_period)) /
             rules.slope_radius;
}

DetuningBudget detuning_budget(const DesignRules& rules, const CavityParams& cav) {
  rules.validate();
  cav.validate();
  DetuningBudget out;
  out.sigma_lambda = std::hypot(rules.slope_radius * rules.fab_sigma_radius,
                                rules.slope_period * rules.fab_sigma_period);
  out.cavity_fwhm = cav.fwhm();
  out.ratio = out.sigma_lambda / out.cavity_fwhm;
  out.purcell_penalty = 1.0 + 4.0 * out.ratio * out.ratio;
  return out;
}

}  // namespace qdent
