#pragma once

// Unit conventions used throughout the library:
//   energies in µeV, times in ps, wavelengths in nm, rates in 1/ps unless
//   a field name says otherwise (rep_rate in MHz, dark_rate in 1/s).

namespace qdent::units {

inline constexpr double kHbarMicroEvPs = 658.2;  // ħ in µeV·ps
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kPsPerNs = 1e3;
inline constexpr double kPsPerSecond = 1e12;

// FWHM of a Gaussian expressed in standard deviations.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

// Repetition period in ps for a rate given in MHz.
constexpr double rep_period_ps(double rep_rate_mhz) { return 1e6 / rep_rate_mhz; }

}  // namespace qdent::units
