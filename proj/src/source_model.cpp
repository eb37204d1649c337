#include "qdent/source_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "qdent/error.hpp"
#include "qdent/units.hpp"

namespace qdent {

namespace {

using cd = std::complex<double>;

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

Matrix4c kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

Matrix4c noise_state(const NoiseCorrelations& n) {
  Eigen::Matrix2cd x, y, z;
  x << 0, 1, 1, 0;
  y << 0, cd(0, -1), cd(0, 1), 0;
  z << 1, 0, 0, -1;
  return 0.25 * (Matrix4c::Identity() + n.zz * kron(z, z) + n.xx * kron(x, x) + n.yy * kron(y, y));
}

// Eigenvalues of the Bell-diagonal noise state, ordered Φ+, Φ−, Ψ+, Ψ−.
std::array<double, 4> noise_eigenvalues(const NoiseCorrelations& n) {
  return {(1 + n.zz + n.xx - n.yy) / 4, (1 + n.zz - n.xx + n.yy) / 4,
          (1 - n.zz + n.xx + n.yy) / 4, (1 - n.zz - n.xx - n.yy) / 4};
}

Eigen::Vector4cd product_ket(Pol a, Pol b) {
  const Eigen::Vector2cd ja = jones(a);
  const Eigen::Vector2cd jb = jones(b);
  return {ja(0) * jb(0), ja(0) * jb(1), ja(1) * jb(0), ja(1) * jb(1)};
}

}  // namespace

void CavityParams::validate() const {
  require(lambda_c > 0, "cavity.lambda_c must be > 0");
  require(q_factor > 0, "cavity.q_factor must be > 0");
  require(f_max >= 1, "cavity.f_max must be >= 1");
  require(in_unit(eta_extr_max), "cavity.eta_extr_max must be in [0,1]");
}

void QDotParams::validate() const {
  require(fss >= 0, "qdot.fss must be >= 0");
  require(tau_xx_bulk > 0 && tau_x_bulk > 0, "qdot bulk lifetimes must be > 0");
  require(lambda_xx > 0 && lambda_x > 0, "qdot wavelengths must be > 0");
  require(std::abs(lambda_x - lambda_xx) > 0, "qdot.lambda_x and lambda_xx must differ");
  require(gamma_cross >= 0, "qdot.gamma_cross must be >= 0");
  require(in_unit(eps_depol), "qdot.eps_depol must be in [0,1]");
  for (double ev : noise_eigenvalues(noise)) {
    require(ev >= -1e-12, "qdot.noise correlations do not describe a physical state");
  }
}

double ExcitationParams::rep_period() const { return units::rep_period_ps(rep_rate); }

void ExcitationParams::validate() const {
  require(rep_rate > 0, "excitation.rep_rate must be > 0");
  require(p_pi_power > 0, "excitation.p_pi_power must be > 0");
  require(power >= 0, "excitation.power must be >= 0");
  require(in_unit(p_reexcite), "excitation.p_reexcite must be in [0,1]");
  require(in_unit(prep_efficiency), "excitation.prep_efficiency must be in [0,1]");
}

TwoPhotonState::TwoPhotonState(const Matrix4c& rho) : rho_(rho) {
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - cd(1, 0)) > kTraceTol) {
    throw ValidationError("density matrix trace differs from 1");
  }
  if (min_eigenvalue() < kPsdTol) throw ValidationError("density matrix is not positive semidefinite");
}

TwoPhotonState TwoPhotonState::bell_phi_plus() {
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = rho(0, 3) = rho(3, 0) = rho(3, 3) = 0.5;
  return TwoPhotonState(rho);
}

TwoPhotonState TwoPhotonState::maximally_mixed() {
  return TwoPhotonState(0.25 * Matrix4c::Identity());
}

double TwoPhotonState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(rho_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double TwoPhotonState::bell_fidelity() const {
  return 0.5 * (rho_(0, 0) + rho_(3, 3) + rho_(0, 3) + rho_(3, 0)).real();
}

double TwoPhotonState::joint_probability(Pol xx, Pol x) const {
  const Eigen::Vector4cd k = product_ket(xx, x);
  return (k.adjoint() * rho_ * k)(0, 0).real();
}

double purcell_factor(double lambda, const CavityParams& cav) {
  const double u = 2.0 * cav.q_factor * (lambda - cav.lambda_c) / cav.lambda_c;
  return cav.f_max / (1.0 + u * u);
}

double cavity_lifetime(double tau_bulk, double f_p) {
  if (!(tau_bulk > 0)) throw ValidationError("bulk lifetime must be > 0");
  if (!(f_p >= 1)) throw ValidationError("Purcell factor below 1 (inhibition) is outside the model");
  return tau_bulk / f_p;
}

CascadeLifetimes cascade_lifetimes(const QDotParams& qd, const CavityParams& cav) {
  return {cavity_lifetime(qd.tau_xx_bulk, purcell_factor(qd.lambda_xx, cav)),
          cavity_lifetime(qd.tau_x_bulk, purcell_factor(qd.lambda_x, cav))};
}

CavityFit fit_cavity_to_lifetimes(double tau_xx, double tau_x, double tau_xx_bulk,
                                  double tau_x_bulk, double lambda_split, double q_factor,
                                  double lambda_c) {
  require(tau_xx > 0 && tau_x > 0 && tau_xx_bulk > 0 && tau_x_bulk > 0,
          "lifetimes must be > 0");
  require(lambda_split >= 0, "lambda_split must be >= 0");
  require(q_factor > 0 && lambda_c > 0, "q_factor and lambda_c must be > 0");

  const double f_xx = tau_xx_bulk / tau_xx;
  const double f_x = tau_x_bulk / tau_x;
  // Work with the stronger-enhanced line ("near") closer to resonance at
  // detuning d and the other ("far") at d + split.
  const bool xx_near = f_xx >= f_x;
  const double f_near = xx_near ? f_xx : f_x;
  const double f_far = xx_near ? f_x : f_xx;
  const double w = lambda_c / (2.0 * q_factor);
  const double s = lambda_split;
  const double df = f_near - f_far;

  // f_near (1 + d²/w²) = f_far (1 + (d+s)²/w²)
  //   df·d² − 2 f_far s d + df w² − f_far s² = 0
  double d = 0.0;
  const double scale = std::max(f_near, 1.0);
  if (std::abs(df) <= 1e-12 * scale) {
    if (s > 0) {
      throw NoSolutionError("equal Purcell targets require the lines to straddle resonance");
    }
    d = 0.0;
  } else {
    const double a = df;
    const double b = -2.0 * f_far * s;
    const double c = df * w * w - f_far * s * s;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0) {
      throw NoSolutionError("Purcell ratio is inconsistent with the given Q and line split");
    }
    const double sq = std::sqrt(disc);
    // Citardauq form for the small root avoids cancellation.
    const double q = -0.5 * (b + std::copysign(sq, b));
    double r1 = q / a;
    double r2 = (q != 0.0) ? c / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    if (r1 >= 0) {
      d = r1;
    } else if (r2 >= 0) {
      d = r2;
    } else {
      throw NoSolutionError("no same-side detuning reproduces both Purcell factors");
    }
  }

  CavityFit fit;
  fit.cavity.lambda_c = lambda_c;
  fit.cavity.q_factor = q_factor;
  fit.cavity.f_max = f_near * (1.0 + (d / w) * (d / w));
  fit.detuning_xx = xx_near ? d : d + s;
  fit.detuning_x = xx_near ? d + s : d;
  if (fit.cavity.f_max < 1.0) throw NoSolutionError("fitted peak Purcell factor is below 1");
  return fit;
}

double rabi_pulse_area(const ExcitationParams& exc) {
  return units::kPi * std::sqrt(exc.power / exc.p_pi_power);
}

double rabi_preparation_probability(const ExcitationParams& exc) {
  const double s = std::sin(0.5 * rabi_pulse_area(exc));
  return exc.prep_efficiency * s * s;
}

CascadeStateModel::CascadeStateModel(const QDotParams& qd)
    : phase_rate_(qd.fss / units::kHbarMicroEvPs),
      decay_rate_(qd.gamma_cross / units::kPsPerNs) {
  const double ent = 1.0 - qd.eps_depol;
  static_ = qd.eps_depol * noise_state(qd.noise);
  static_(0, 0) += 0.5 * ent;
  static_(3, 3) += 0.5 * ent;
  k_ = Matrix4c::Zero();
  k_(0, 3) = 0.5 * ent;
}

std::complex<double> CascadeStateModel::coherence(double tau) const {
  return std::exp(cd(-decay_rate_ * tau, phase_rate_ * tau));
}

Matrix4c CascadeStateModel::with_coherence(std::complex<double> m) const {
  return static_ + m * k_ + std::conj(m) * k_.adjoint();
}

Matrix4c CascadeStateModel::at(double tau) const { return with_coherence(coherence(tau)); }

TwoPhotonState rho_at_delay(const QDotParams& qd, double tau) {
  if (tau < 0) throw ValidationError("rho_at_delay requires tau >= 0");
  return TwoPhotonState(CascadeStateModel(qd).at(tau));
}

std::complex<double> mean_coherence(const QDotParams& qd, double gamma_x) {
  if (!(gamma_x > 0)) throw ValidationError("gamma_x must be > 0");
  const double gamma = qd.gamma_cross / units::kPsPerNs;
  return gamma_x / cd(gamma_x + gamma, -qd.fss / units::kHbarMicroEvPs);
}

TwoPhotonState rho_time_integrated(const QDotParams& qd, double gamma_x) {
  return TwoPhotonState(CascadeStateModel(qd).with_coherence(mean_coherence(qd, gamma_x)));
}

Visibilities predict_visibilities(const TwoPhotonState& state) {
  auto basis = [&](Basis b) {
    const auto s = basis_settings(b);
    const double co1 = state.joint_probability(s[0].basis_xx, s[0].basis_x);
    const double cr1 = state.joint_probability(s[1].basis_xx, s[1].basis_x);
    const double cr2 = state.joint_probability(s[2].basis_xx, s[2].basis_x);
    const double co2 = state.joint_probability(s[3].basis_xx, s[3].basis_x);
    return (co1 - cr1 - cr2 + co2) / (co1 + cr1 + cr2 + co2);
  };
  return {basis(Basis::Linear), basis(Basis::Diagonal), basis(Basis::Circular)};
}

QDotParams calibrate_noise_to_visibilities(const QDotParams& base, double gamma_x,
                                           const Visibilities& target) {
  QDotParams out = base;
  out.eps_depol = 1.0 - target.linear;
  if (!(out.eps_depol > 0 && out.eps_depol <= 1)) {
    throw NoSolutionError("target linear visibility must lie in [0, 1)");
  }
  const double r = mean_coherence(base, gamma_x).real();
  const double ent = 1.0 - out.eps_depol;
  out.noise.zz = 0.0;
  out.noise.xx = (target.diagonal - ent * r) / out.eps_depol;
  out.noise.yy = (target.circular + ent * r) / out.eps_depol;
  for (double ev : noise_eigenvalues(out.noise)) {
    if (ev < -1e-12) throw NoSolutionError("target visibilities need an unphysical noise state");
  }
  return out;
}

}  // namespace qdent
