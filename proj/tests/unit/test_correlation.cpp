#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qdent/correlation.hpp"
#include "qdent/error.hpp"
#include "qdent/random.hpp"
#include "qdent/source_model.hpp"

using namespace qdent;

namespace {

std::vector<std::uint64_t> comb(std::uint64_t period, std::uint64_t n, std::uint64_t offset) {
  std::vector<std::uint64_t> t;
  for (std::uint64_t k = 0; k < n; ++k) t.push_back(offset + k * period);
  return t;
}

PeakAreas make_peaks(double center, const std::vector<double>& side_by_index, double rep) {
  PeakAreas p;
  p.center = center;
  p.rep_period = rep;
  const int n = static_cast<int>(side_by_index.size());
  for (int k = -n; k <= n; ++k) {
    if (k == 0) continue;
    p.sides.push_back({k * rep, side_by_index[std::abs(k) - 1]});
  }
  return p;
}

}  // namespace

TEST_CASE("single coincident records land in the zero bin") {
  const std::vector<std::uint64_t> a{0}, b{0};
  const auto h = build_histogram(a, b, 100.0, 1000.0);
  CHECK(h.total() == 1);
  CHECK(h.counts[h.center_index()] == 1);
  CHECK(h.delay(h.center_index()) == 0.0);
}

TEST_CASE("empty inputs give an empty histogram") {
  const std::vector<std::uint64_t> none;
  const auto h = build_histogram(none, none, 100.0, 1000.0, 500.0);
  CHECK(h.total() == 0);
  CHECK_THROWS_AS(build_histogram(none, none, 0.0, 1000.0), ValidationError);
}

TEST_CASE("periodic streams give a comb of peaks") {
  const std::uint64_t period = 10000;
  const auto a = comb(period, 500, 100000);
  const auto b = comb(period, 500, 100000);
  const auto h = build_histogram(a, b, 100.0, 50000.0, 10000.0);
  CHECK(h.rep_period == 10000.0);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] == 0) continue;
    const double d = h.delay(i);
    REQUIRE(std::fmod(std::abs(d), 10000.0) == doctest::Approx(0.0));
  }
  const auto peaks = integrate_peaks(h, 2000.0);
  CHECK(peaks.center == 500.0);
  // Peaks at ±50000 would reach past the histogram edge.
  REQUIRE(peaks.sides.size() == 8);
  CHECK(peaks.sides.front().delay == -40000.0);
  CHECK(peaks.sides.front().counts == 496.0);
  CHECK(g2_zero(peaks).value > 1.0);
}

TEST_CASE("bin width is shrunk to divide the period") {
  const std::vector<std::uint64_t> a{0}, b{0};
  const auto h = build_histogram(a, b, 100.0, 30000.0, 13157.894736842);
  const double ratio = h.rep_period / h.bin_width;
  CHECK(ratio == doctest::Approx(std::round(ratio)).epsilon(1e-12));
  CHECK(h.bin_width <= 100.0);
}

TEST_CASE("mirrored inputs mirror the histogram") {
  Rng rng(8);
  std::vector<std::uint64_t> a, b;
  std::uint64_t ta = 0, tb = 0;
  for (int i = 0; i < 5000; ++i) {
    ta += 1 + static_cast<std::uint64_t>(rng.exponential(3000));
    tb += 1 + static_cast<std::uint64_t>(rng.exponential(3000));
    a.push_back(ta);
    b.push_back(tb);
  }
  const auto ab = build_histogram(a, b, 50.0, 20000.0);
  const auto ba = build_histogram(b, a, 50.0, 20000.0);
  REQUIRE(ab.counts.size() == ba.counts.size());
  const std::size_t n = ab.counts.size();
  for (std::size_t i = 0; i < n; ++i) REQUIRE(ab.counts[i] == ba.counts[n - 1 - i]);
  // Every delay within range is counted exactly once.
  CHECK(ab.total() == coincidence_delays(a, b, 20000).size());
}

TEST_CASE("flat histogram has equal center and side areas") {
  CorrelationHistogram h;
  h.bin_width = 100.0;
  h.rep_period = 10000.0;
  h.counts.assign(1001, 7);  // ±50000 ps
  const auto p = integrate_peaks(h, 2000.0);
  REQUIRE(p.sides.size() == 8);
  for (const auto& s : p.sides) CHECK(s.counts == p.center);
  CHECK(g2_zero(p).value == doctest::Approx(1.0));
  CHECK(side_to_center_calibration(p).value == doctest::Approx(1.0));
}

TEST_CASE("peak window limits") {
  CorrelationHistogram h;
  h.bin_width = 100.0;
  h.rep_period = 10000.0;
  h.counts.assign(1001, 1);
  CHECK_THROWS_AS(integrate_peaks(h, 6000.0), ValidationError);
  CHECK_NOTHROW(integrate_peaks(h, 5000.0));
  h.rep_period = 0.0;
  CHECK_THROWS_AS(integrate_peaks(h, 2000.0), ValidationError);
}

TEST_CASE("g2 estimator") {
  auto p = make_peaks(0.0, {100, 100, 100}, 10000.0);
  CHECK(g2_zero(p).value == 0.0);
  CHECK(g2_zero(p).uncertainty > 0.0);
  p.center = 100.0;
  const auto one = g2_zero(p);
  CHECK(one.value == doctest::Approx(1.0));
  // Var(C/S̄) = C/S̄² + C²·S̄_total/(n²S̄⁴) with S̄ the mean side area.
  const double expected_sigma = std::sqrt(100.0 / 1e4 + 1e4 * 600.0 / (36.0 * 1e8));
  CHECK(one.uncertainty == doctest::Approx(expected_sigma).epsilon(1e-9));

  // Only side peaks beyond the cutoff normalize.
  p = make_peaks(14.0, {50, 80, 100, 100}, 10000.0);
  CHECK(g2_zero(p, 25000.0).value == doctest::Approx(0.14));
  CHECK_THROWS_AS(g2_zero(p, 1e6), EstimatorError);
  p = make_peaks(5.0, {0, 0}, 10000.0);
  CHECK_THROWS_AS(g2_zero(p), EstimatorError);
}

TEST_CASE("side-to-center ratio") {
  auto p = make_peaks(100.0, {70, 90, 100}, 10000.0);
  CHECK(side_to_center_calibration(p).value == doctest::Approx(0.70));
  p.sides[2].counts = 60;  // delay −10000
  p.sides[3].counts = 80;  // delay +10000
  CHECK(side_to_center_calibration(p).value == doctest::Approx(0.70));
  p.center = 0;
  CHECK_THROWS_AS(side_to_center_calibration(p), EstimatorError);
}

TEST_CASE("basis visibility and fidelity") {
  CHECK(basis_visibility(1, 0, 0, 1) == 1.0);
  CHECK(basis_visibility(1, 1, 1, 1) == 0.0);
  CHECK(basis_visibility(0, 1, 1, 0) == -1.0);
  CHECK_THROWS_AS(basis_visibility(0, 0, 0, 0), EstimatorError);
  CHECK_THROWS_AS(basis_visibility(1, -1, 0, 1), EstimatorError);

  CHECK(fidelity_from_visibilities(0.84, 0.86, -0.88) == doctest::Approx(0.895));
  CHECK(fidelity_from_visibilities(1, 1, -1) == 1.0);
  CHECK(fidelity_from_visibilities(0, 0, 0) == 0.25);
  CHECK_THROWS_AS(fidelity_from_visibilities(1.1, 0, 0), ValidationError);
}

TEST_CASE("tomography on exact Born-rule counts reproduces the state visibilities") {
  QDotParams qd;
  qd.eps_depol = 0.15;
  qd.noise = {0.0, 0.4, -0.5};
  qd.fss = 1.0;
  const auto state = rho_time_integrated(qd, 1.0 / 126.7);
  const auto truth = predict_visibilities(state);

  const double n = 1e6;
  std::vector<TomographyRecord> records;
  for (const auto& s : tomography_settings()) {
    TomographyRecord r;
    r.setting = s;
    r.zero_peak_counts =
        static_cast<std::uint64_t>(std::llround(n * state.joint_probability(s.basis_xx, s.basis_x)));
    r.normalization = n;
    r.side_counts = static_cast<std::uint64_t>(4 * n);
    records.push_back(r);
  }
  const auto result = analyze_tomography(records);
  CHECK(result.v_linear.value == doctest::Approx(truth.linear).epsilon(1e-5));
  CHECK(result.v_diagonal.value == doctest::Approx(truth.diagonal).epsilon(1e-5));
  CHECK(result.v_circular.value == doctest::Approx(truth.circular).epsilon(1e-5));
  CHECK(result.fidelity.value ==
        doctest::Approx(fidelity_from_visibilities(truth.linear, truth.diagonal, truth.circular))
            .epsilon(1e-5));
  CHECK(result.fidelity.value == doctest::Approx(state.bell_fidelity()).epsilon(1e-5));
  CHECK(result.v_linear.uncertainty > 0.0);
  CHECK(result.v_linear.uncertainty < 0.01);

  // Order does not matter; duplicates and gaps do.
  std::reverse(records.begin(), records.end());
  CHECK(analyze_tomography(records).fidelity.value == doctest::Approx(result.fidelity.value));
  records[0] = records[1];
  CHECK_THROWS_AS(analyze_tomography(records), EstimatorError);
  records.pop_back();
  CHECK_THROWS_AS(analyze_tomography(records), EstimatorError);
}

TEST_CASE("tomography record normalization") {
  const auto p = make_peaks(30.0, {40, 100, 100}, 10000.0);
  const auto r = make_tomography_record({Pol::H, Pol::H}, p, 15000.0);
  CHECK(r.zero_peak_counts == 30);
  CHECK(r.normalization == doctest::Approx(100.0));
  CHECK(r.side_counts == 400);
  CHECK(r.g2().value == doctest::Approx(0.3));
}

TEST_CASE("blinking envelope recovers the telegraph parameters") {
  const double rep = 13157.894736842;
  SUBCASE("exact envelope") {
    std::vector<double> sides;
    for (int k = 1; k <= 90; ++k) {
      sides.push_back(1000.0 * (0.84 + 0.16 * std::exp(-k * rep / 100000.0)));
    }
    const auto fit = blinking_envelope(make_peaks(10.0, sides, rep));
    CHECK(fit.on_fraction == doctest::Approx(0.84).epsilon(1e-4));
    CHECK(fit.t_corr == doctest::Approx(100.0).epsilon(1e-3));
    CHECK(fit.amplitude == doctest::Approx(1000.0).epsilon(1e-4));
  }
  SUBCASE("Poisson noise") {
    Rng rng(12);
    std::vector<double> sides;
    for (int k = 1; k <= 90; ++k) {
      const double mean = 20000.0 * (0.84 + 0.16 * std::exp(-k * rep / 100000.0));
      sides.push_back(std::round(mean + std::sqrt(mean) * rng.normal()));
    }
    const auto fit = blinking_envelope(make_peaks(10.0, sides, rep));
    CHECK(std::abs(fit.on_fraction - 0.84) < 0.03);
    CHECK(fit.chi2_per_dof < 2.0);
  }
  SUBCASE("no blinking") {
    std::vector<double> sides(60, 5000.0);
    const auto fit = blinking_envelope(make_peaks(10.0, sides, rep));
    CHECK(fit.on_fraction == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("too few peaks") {
    CHECK_THROWS_AS(blinking_envelope(make_peaks(10.0, {1, 2, 3}, rep)), EstimatorError);
  }
}

TEST_CASE("decay time fit") {
  Rng rng(21);
  std::vector<double> x(200000);
  for (double& v : x) v = rng.exponential(66.4);
  const auto full = fit_decay_time(x, 0.0, std::numeric_limits<double>::infinity());
  CHECK(std::abs(full.value - 66.4) < 4 * full.uncertainty);
  CHECK(full.uncertainty == doctest::Approx(66.4 / std::sqrt(200000.0)).epsilon(0.05));
  const auto trunc = fit_decay_time(x, 40.0, 400.0);
  CHECK(std::abs(trunc.value - 66.4) < 4 * trunc.uncertainty);
  CHECK_THROWS_AS(fit_decay_time(x, 10.0, 10.0), ValidationError);
  const std::vector<double> one{5.0};
  CHECK_THROWS_AS(fit_decay_time(one, 0.0, 100.0), EstimatorError);
}
