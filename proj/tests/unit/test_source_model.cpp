#include <doctest.h>

#include <cmath>
#include <random>

#include "qdent/error.hpp"
#include "qdent/presets.hpp"
#include "qdent/source_model.hpp"
#include "qdent/units.hpp"
#include "oracles.hpp"

using namespace qdent;

namespace {

using oracles::quadrature_average;
using oracles::random_qdot;

}  // namespace

TEST_CASE("purcell factor: resonance, half width, symmetry") {
  CavityParams cav;
  CHECK(purcell_factor(cav.lambda_c, cav) == doctest::Approx(cav.f_max).epsilon(1e-15));
  const double hw = cav.lambda_c / (2 * cav.q_factor);
  CHECK(purcell_factor(cav.lambda_c + hw, cav) == doctest::Approx(cav.f_max / 2).epsilon(1e-12));
  for (double d : {0.1, 0.7, 2.5, 11.0}) {
    CHECK(purcell_factor(cav.lambda_c + d, cav) == purcell_factor(cav.lambda_c - d, cav));
  }
}

TEST_CASE("cavity lifetime arithmetic") {
  CHECK(cavity_lifetime(750.3, 11.3) == doctest::Approx(66.4).epsilon(1e-3));
  CHECK(cavity_lifetime(1102.3, 8.7) == doctest::Approx(126.7).epsilon(1e-3));
  CHECK(cavity_lifetime(42.0, 1.0) == 42.0);
  CHECK_THROWS_AS(cavity_lifetime(100.0, 0.9), ValidationError);
  CHECK_THROWS_AS(cavity_lifetime(-1.0, 2.0), ValidationError);
  // Purcell factors quoted to one decimal follow from bulk and cavity lifetimes.
  CHECK(std::round(750.3 / 66.4 * 10) / 10 == 11.3);
  CHECK(std::round(1102.3 / 126.7 * 10) / 10 == 8.7);
}

TEST_CASE("cavity fit reproduces both Purcell factors") {
  const CavityFit fit = fit_cavity_to_lifetimes(66.4, 126.7, 750.3, 1102.3, 1.6, 150, 890);
  CHECK(fit.cavity.f_max == doctest::Approx(11.3).epsilon(0.01));
  CHECK(fit.detuning_xx == doctest::Approx(0.02).epsilon(0.2));
  CHECK(fit.detuning_x == doctest::Approx(1.62).epsilon(0.01));
  CHECK(fit.detuning_x - fit.detuning_xx == doctest::Approx(1.6).epsilon(1e-12));
  // Independent check: evaluate the Lorentzian at the fitted lines.
  const double f_xx = purcell_factor(890 - fit.detuning_xx, fit.cavity);
  const double f_x = purcell_factor(890 - fit.detuning_x, fit.cavity);
  CHECK(std::abs(f_xx - 750.3 / 66.4) < 1e-9);
  CHECK(std::abs(f_x - 1102.3 / 126.7) < 1e-9);
  CHECK(std::abs(f_x - 8.70) < 1e-3);

  const SourceParams src = device_source();
  CHECK(src.lifetimes().tau_xx == doctest::Approx(66.4).epsilon(1e-9));
  CHECK(src.lifetimes().tau_x == doctest::Approx(126.7).epsilon(1e-9));
  CHECK(src.qdot.lambda_xx - src.qdot.lambda_x == doctest::Approx(1.6).epsilon(1e-9));
}

TEST_CASE("cavity fit degenerate and failing cases") {
  const CavityFit same = fit_cavity_to_lifetimes(100, 100, 500, 500, 0.0, 150);
  CHECK(same.cavity.f_max == doctest::Approx(5.0));
  CHECK(same.detuning_xx == 0.0);
  CHECK(same.detuning_x == 0.0);
  CHECK_THROWS_AS(fit_cavity_to_lifetimes(100, 100, 500, 500, 1.0, 150), NoSolutionError);
  // Factor 5 ratio needs more detuning spread than a 0.01 nm split allows.
  CHECK_THROWS_AS(fit_cavity_to_lifetimes(50, 250, 500, 500, 0.01, 150), NoSolutionError);
}

TEST_CASE("rabi preparation probability") {
  ExcitationParams e;
  e.power = e.p_pi_power;
  CHECK(rabi_preparation_probability(e) == doctest::Approx(1.0));
  e.power = 0;
  CHECK(rabi_preparation_probability(e) == 0.0);
  e.power = e.p_pi_power / 4;
  CHECK(rabi_preparation_probability(e) == doctest::Approx(0.5));
  e.power = 4 * e.p_pi_power;
  CHECK(rabi_preparation_probability(e) == doctest::Approx(0.0).epsilon(1e-12));
  // Periodic in pulse area with period 2π: area θ and θ + 2π.
  for (double a : {0.3, 0.9, 1.4}) {
    e.power = a * a * e.p_pi_power;
    const double p1 = rabi_preparation_probability(e);
    e.power = (a + 2) * (a + 2) * e.p_pi_power;
    CHECK(rabi_preparation_probability(e) == doctest::Approx(p1).epsilon(1e-12));
    CHECK(p1 >= 0.0);
    CHECK(p1 <= 1.0);
  }
  e.power = e.p_pi_power;
  e.prep_efficiency = 0.7;
  CHECK(rabi_preparation_probability(e) == doctest::Approx(0.7));
}

TEST_CASE("two-photon state validation") {
  CHECK(TwoPhotonState::bell_phi_plus().bell_fidelity() == doctest::Approx(1.0));
  CHECK(TwoPhotonState::maximally_mixed().bell_fidelity() == doctest::Approx(0.25));
  Matrix4c m = 0.25 * Matrix4c::Identity();
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(TwoPhotonState{m}, ValidationError);
  m = 0.3 * Matrix4c::Identity();
  CHECK_THROWS_AS(TwoPhotonState{m}, ValidationError);
  m = Matrix4c::Zero();
  m(0, 0) = 1.2;
  m(3, 3) = -0.2;
  CHECK_THROWS_AS(TwoPhotonState{m}, ValidationError);
}

TEST_CASE("rho at delay") {
  QDotParams qd;
  qd.fss = 0;
  for (double tau : {0.0, 50.0, 1e4}) {
    CHECK(rho_at_delay(qd, tau).bell_fidelity() == doctest::Approx(1.0).epsilon(1e-14));
  }
  qd.fss = 1.2;
  const auto rho = rho_at_delay(qd, 126.7).rho();
  CHECK(std::arg(rho(0, 3)) == doctest::Approx(1.2 * 126.7 / 658.2).epsilon(1e-12));
  CHECK(std::arg(rho(0, 3)) == doctest::Approx(0.231).epsilon(1e-3));
  CHECK(std::abs(rho(3, 0)) == doctest::Approx(0.5));
  qd.eps_depol = 1;
  CHECK(rho_at_delay(qd, 10).bell_fidelity() == doctest::Approx(0.25));
  CHECK_THROWS_AS(rho_at_delay(qd, -1), ValidationError);

  std::mt19937_64 gen(3);
  for (int k = 0; k < 50; ++k) {
    const QDotParams r = random_qdot(gen);
    for (double tau : {0.0, 13.0, 400.0, 5000.0}) {
      CHECK_NOTHROW(rho_at_delay(r, tau));
    }
  }
}

TEST_CASE("mean coherence") {
  QDotParams qd;
  qd.fss = 0;
  CHECK(std::abs(mean_coherence(qd, 0.01) - 1.0) < 1e-15);
  qd.fss = 1.2;
  const auto m = mean_coherence(qd, 1 / 126.7);
  CHECK(std::abs(m) == doctest::Approx(1 / std::sqrt(1 + 0.231 * 0.231)).epsilon(1e-3));
  CHECK(std::abs(m) == doctest::Approx(0.974).epsilon(1e-3));
  CHECK(m.real() == doctest::Approx(0.949).epsilon(1e-3));
  qd.fss = 1e9;
  CHECK(std::abs(mean_coherence(qd, 1 / 126.7)) < 1e-6);
}

TEST_CASE("time-integrated state equals quadrature of rho at delay") {
  std::mt19937_64 gen(17);
  for (int k = 0; k < 5; ++k) {
    const QDotParams qd = random_qdot(gen);
    const double gamma_x = 1.0 / (50.0 + 200.0 * std::uniform_real_distribution<double>(0, 1)(gen));
    const Matrix4c ref = quadrature_average(qd, gamma_x);
    const Matrix4c got = rho_time_integrated(qd, gamma_x).rho();
    CHECK((ref - got).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("visibilities and fidelity identity") {
  auto v = predict_visibilities(TwoPhotonState::bell_phi_plus());
  CHECK(v.linear == doctest::Approx(1));
  CHECK(v.diagonal == doctest::Approx(1));
  CHECK(v.circular == doctest::Approx(-1));
  v = predict_visibilities(TwoPhotonState::maximally_mixed());
  CHECK(std::abs(v.linear) < 1e-15);
  CHECK(std::abs(v.diagonal) < 1e-15);
  CHECK(std::abs(v.circular) < 1e-15);

  // White-noise model: V_lin = 1−ε, V_diag = −V_circ = (1−ε) Re m.
  QDotParams qd;
  qd.eps_depol = 0.16;
  const double gx = 1 / 126.7;
  v = predict_visibilities(rho_time_integrated(qd, gx));
  const double re = mean_coherence(qd, gx).real();
  CHECK(v.linear == doctest::Approx(0.84).epsilon(1e-12));
  CHECK(v.diagonal == doctest::Approx(0.84 * re).epsilon(1e-12));
  CHECK(v.circular == doctest::Approx(-0.84 * re).epsilon(1e-12));

  std::mt19937_64 gen(5);
  for (int k = 0; k < 20; ++k) {
    const QDotParams r = random_qdot(gen);
    const TwoPhotonState s = rho_time_integrated(r, gx);
    const Visibilities w = predict_visibilities(s);
    CHECK(std::abs((1 + w.linear + w.diagonal - w.circular) / 4 - s.bell_fidelity()) < 1e-12);
  }
}

TEST_CASE("noise calibration hits the target visibilities") {
  QDotParams base;
  const double gx = 1 / 126.7;
  const Visibilities target{0.84, 0.86, -0.88};
  const QDotParams qd = calibrate_noise_to_visibilities(base, gx, target);
  const Visibilities v = predict_visibilities(rho_time_integrated(qd, gx));
  CHECK(v.linear == doctest::Approx(0.84).epsilon(1e-12));
  CHECK(v.diagonal == doctest::Approx(0.86).epsilon(1e-12));
  CHECK(v.circular == doctest::Approx(-0.88).epsilon(1e-12));
  CHECK((1 + v.linear + v.diagonal - v.circular) / 4 == doctest::Approx(0.895).epsilon(1e-12));
  CHECK_THROWS_AS(calibrate_noise_to_visibilities(base, gx, {0.5, 0.99, -0.99}), NoSolutionError);
}
