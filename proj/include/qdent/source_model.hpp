#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qdent/polarization.hpp"

namespace qdent {

// Single-mode cavity described by a Lorentzian Purcell spectrum.
struct CavityParams {
  double lambda_c = 890.0;     // nm
  double q_factor = 150.0;
  double f_max = 11.3;         // peak Purcell factor
  double eta_extr_max = 0.9;   // peak first-lens extraction efficiency

  double fwhm() const { return lambda_c / q_factor; }
  void validate() const;
  friend bool operator==(const CavityParams&, const CavityParams&) = default;
};

// Correlations (<ZZ>, <XX>, <YY>) of the Bell-diagonal state that is mixed
// into the cascade state with weight eps_depol. All zeros is white noise.
struct NoiseCorrelations {
  double zz = 0.0;
  double xx = 0.0;
  double yy = 0.0;

  friend bool operator==(const NoiseCorrelations&, const NoiseCorrelations&) = default;
};

struct QDotParams {
  double fss = 1.2;              // fine structure splitting, µeV
  double tau_xx_bulk = 750.3;    // ps
  double tau_x_bulk = 1102.3;    // ps
  double lambda_xx = 889.98;     // nm
  double lambda_x = 888.38;      // nm
  double gamma_cross = 0.0;      // HH/VV cross-dephasing, 1/ns
  double eps_depol = 0.0;
  NoiseCorrelations noise;

  void validate() const;
  friend bool operator==(const QDotParams&, const QDotParams&) = default;
};

struct ExcitationParams {
  double rep_rate = 76.0;        // MHz
  double p_pi_power = 16.0;      // nW
  double power = 16.0;           // nW
  double p_reexcite = 0.0;
  // Probability that a π pulse leaves the dot in XX and the cascade
  // radiates; scales the ideal Rabi curve.
  double prep_efficiency = 1.0;

  double rep_period() const;     // ps
  void validate() const;
  friend bool operator==(const ExcitationParams&, const ExcitationParams&) = default;
};

using Matrix4c = Eigen::Matrix4cd;

// Joint XX–X polarization density matrix over (HH, HV, VH, VV); the first
// tensor factor is the XX photon.
class TwoPhotonState {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-12;
  static constexpr double kPsdTol = -1e-10;

  // Throws ValidationError unless rho is Hermitian, unit trace and PSD.
  explicit TwoPhotonState(const Matrix4c& rho);

  static TwoPhotonState bell_phi_plus();
  static TwoPhotonState maximally_mixed();

  const Matrix4c& rho() const { return rho_; }
  double min_eigenvalue() const;

  // <Φ+|ρ|Φ+>.
  double bell_fidelity() const;
  // Tr[ρ (|a><a| ⊗ |b><b|)].
  double joint_probability(Pol xx, Pol x) const;

 private:
  Matrix4c rho_;
};

// Lorentzian Purcell factor at emission wavelength lambda (nm).
double purcell_factor(double lambda, const CavityParams& cav);

// Radiative lifetime inside the cavity. Rejects f_p < 1.
double cavity_lifetime(double tau_bulk, double f_p);

struct CascadeLifetimes {
  double tau_xx;  // ps
  double tau_x;   // ps
};

CascadeLifetimes cascade_lifetimes(const QDotParams& qd, const CavityParams& cav);

struct CavityFit {
  CavityParams cavity;
  double detuning_xx;  // |λ_XX − λ_c|, nm
  double detuning_x;   // |λ_X − λ_c|, nm
};

// Inverts the Lorentzian against measured lifetimes: finds f_max and the
// detuning of the line nearer resonance such that both Purcell factors
// tau_bulk/tau are reproduced with the two lines lambda_split apart on the
// same side of resonance. Throws NoSolutionError if none exists.
CavityFit fit_cavity_to_lifetimes(double tau_xx, double tau_x, double tau_xx_bulk,
                                  double tau_x_bulk, double lambda_split, double q_factor,
                                  double lambda_c = 890.0);

// Pulse area θ = π·sqrt(P/P_π).
double rabi_pulse_area(const ExcitationParams& exc);
// prep_efficiency · sin²(θ/2).
double rabi_preparation_probability(const ExcitationParams& exc);

// Time-resolved cascade model: HH/VV coherence precesses at S/ħ and decays at
// gamma_cross; the result is mixed with the Bell-diagonal noise state.
//
// The state is affine in the complex coherence c(τ) = exp(iSτ/ħ − γτ):
//   ρ(τ) = ρ_static + c(τ)·K + conj(c(τ))·K†
// which lets samplers precompute projector expectations once per setting.
class CascadeStateModel {
 public:
  explicit CascadeStateModel(const QDotParams& qd);

  std::complex<double> coherence(double tau) const;
  Matrix4c at(double tau) const;
  // State with the coherence replaced by an arbitrary value m (|m| ≤ 1).
  Matrix4c with_coherence(std::complex<double> m) const;

  const Matrix4c& static_part() const { return static_; }
  const Matrix4c& coherence_operator() const { return k_; }

 private:
  double phase_rate_;  // rad/ps
  double decay_rate_;  // 1/ps
  Matrix4c static_;
  Matrix4c k_;
};

TwoPhotonState rho_at_delay(const QDotParams& qd, double tau);

// Mean HH/VV coherence under an exponential delay distribution of rate
// gamma_x: Γ/(Γ + γ − iS/ħ).
std::complex<double> mean_coherence(const QDotParams& qd, double gamma_x);

TwoPhotonState rho_time_integrated(const QDotParams& qd, double gamma_x);

struct Visibilities {
  double linear = 0.0;
  double diagonal = 0.0;
  double circular = 0.0;
};

// Born-rule visibilities from the twelve analyzer projections.
Visibilities predict_visibilities(const TwoPhotonState& state);

// Chooses eps_depol and the noise correlations so the time-integrated state
// (coherence averaged at gamma_x) has exactly the requested visibilities.
// eps_depol = 1 − linear and the noise carries no ZZ correlation.
// Throws NoSolutionError if the resulting noise state is unphysical.
QDotParams calibrate_noise_to_visibilities(const QDotParams& base, double gamma_x,
                                           const Visibilities& target);

}  // namespace qdent
