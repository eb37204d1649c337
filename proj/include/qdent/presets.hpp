#pragma once

#include "qdent/cascade_sim.hpp"
#include "qdent/detection_chain.hpp"
#include "qdent/hom.hpp"

namespace qdent {

// Measured device values the calibrated configuration is built from.
struct DeviceTargets {
  double tau_xx = 66.4;             // ps
  double tau_x = 126.7;             // ps
  double line_split = 1.6;          // nm, λ_XX − λ_X
  double q_factor = 150.0;
  double lambda_c = 890.0;          // nm
  double prep_efficiency = 0.70;    // side-to-center estimate at π
  double on_fraction = 0.84;
  double g2_xx = 0.014;
  double g2_x = 0.013;
  Visibilities visibilities{0.84, 0.86, -0.88};
  double hom_raw_xx = 0.86;
  double hom_corrected_xx = 0.90;
};

// Source whose lifetimes, preparation efficiency, blinking, multi-photon
// probability and time-integrated polarization correlations reproduce
// DeviceTargets. Derived at call time from the inversion routines.
SourceParams device_source(const DeviceTargets& t = {});

// Re-excitation probability giving the target HBT g²(0) for a source whose
// pulses radiate with probability on_fraction · prep.
double reexcitation_for_g2(double g2, double on_fraction, double prep);

// Fraction of zero-delay cross-correlation coincidences that come from the
// same cascade when each pulse re-excites with probability p_re.
double same_cascade_fraction(double p_reexcite);

// HOM settings whose XX pure dephasing reproduces the raw XX visibility;
// X photons carry no extra dephasing.
HomConfig device_hom(const SourceParams& src, const DeviceTargets& t = {});

// Classical visibility that maps the raw XX visibility onto the corrected
// value at the measured g²(0) with a balanced beam splitter.
double device_correction_visibility(const DeviceTargets& t = {});

}  // namespace qdent
