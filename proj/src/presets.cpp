#include "qdent/presets.hpp"

#include <cmath>

#include "qdent/error.hpp"

namespace qdent {

double reexcitation_for_g2(double g2, double on_fraction, double prep) {
  if (!(g2 >= 0)) throw ValidationError("g2 must be >= 0");
  if (g2 == 0) return 0.0;
  // g2 = 2x / (on·p·(1+x)²)  ->  k x² + (2k − 2) x + k = 0 with k = g2·on·p.
  const double k = g2 * on_fraction * prep;
  const double b = 2.0 * k - 2.0;
  const double disc = b * b - 4.0 * k * k;
  if (disc < 0) throw NoSolutionError("g2 target unreachable by re-excitation");
  return 2.0 * k / (-b + std::sqrt(disc));
}

double same_cascade_fraction(double p_reexcite) {
  return (1.0 + p_reexcite) / (1.0 + 3.0 * p_reexcite);
}

SourceParams device_source(const DeviceTargets& t) {
  SourceParams src;
  const QDotParams bulk;
  const CavityFit fit = fit_cavity_to_lifetimes(t.tau_xx, t.tau_x, bulk.tau_xx_bulk,
                                                bulk.tau_x_bulk, t.line_split, t.q_factor,
                                                t.lambda_c);
  src.cavity = fit.cavity;
  src.qdot.lambda_xx = t.lambda_c - fit.detuning_xx;
  src.qdot.lambda_x = t.lambda_c - fit.detuning_x;

  src.excitation.power = src.excitation.p_pi_power;
  src.excitation.prep_efficiency = t.prep_efficiency;
  src.excitation.p_reexcite = reexcitation_for_g2(t.g2_xx, t.on_fraction, t.prep_efficiency);
  src.blinking.on_fraction = t.on_fraction;

  // Cross-cascade coincidences are uncorrelated, so the single-cascade
  // state has to carry slightly larger correlations than the targets.
  const double f = same_cascade_fraction(src.excitation.p_reexcite);
  const Visibilities single{t.visibilities.linear / f, t.visibilities.diagonal / f,
                            t.visibilities.circular / f};
  const double gamma_x = 1.0 / src.lifetimes().tau_x;
  src.qdot = calibrate_noise_to_visibilities(src.qdot, gamma_x, single);
  src.validate();
  return src;
}

HomConfig device_hom(const SourceParams& src, const DeviceTargets& t) {
  HomConfig hom;
  const double gamma = 1.0 / src.lifetimes().tau_xx;
  // Unfiltered visibility of jitter-free photons is γ/(γ + 2γ_d).
  hom.dephase_xx = 0.5 * gamma * (1.0 / t.hom_raw_xx - 1.0);
  hom.dephase_x = 0.0;
  hom.classical_visibility = 1.0;
  hom.detection_efficiency = 1.0;
  return hom;
}

double device_correction_visibility(const DeviceTargets& t) {
  return std::sqrt((t.hom_raw_xx + t.g2_xx) / t.hom_corrected_xx);
}

}  // namespace qdent
