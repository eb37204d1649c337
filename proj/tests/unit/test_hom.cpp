#include <doctest.h>

#include <cmath>
#include <vector>

#include "qdent/error.hpp"
#include "qdent/hom.hpp"
#include "qdent/presets.hpp"
#include "oracles.hpp"

using namespace qdent;

namespace {

const DetectorParams kIdealDetector{0.0, 0.0, 0.0};

using oracles::integrated_density;
using oracles::quadrature_visibility;

struct HomPair {
  HomRun cross, parallel;
};

HomPair run_pair(const SourceParams& src, HomConfig hom, std::uint64_t n, std::uint64_t seed,
                 const DetectorParams& det = kIdealDetector) {
  hom.polarization = HomPolarization::Cross;
  auto cross = simulate_hom(src, hom, n, seed, det);
  hom.polarization = HomPolarization::Parallel;
  auto parallel = simulate_hom(src, hom, n, seed, det);
  return {std::move(cross), std::move(parallel)};
}

Estimate center_visibility(const HomPair& p, double half_window) {
  return hom_visibility(static_cast<double>(hom_center_counts(p.cross.records, half_window)),
                        static_cast<double>(hom_center_counts(p.parallel.records, half_window)));
}

}  // namespace

TEST_CASE("identical packets never coincide at equal times") {
  for (double dephase : {0.0, 1e-3, 0.05}) {
    const Wavepacket p{0.0, 1.0 / 66.4, dephase};
    for (double t = 0.0; t < 600.0; t += 7.3) {
      REQUIRE(coincidence_density(p, p, t, t, true) == doctest::Approx(0.0).scale(1e-18));
    }
  }
}

TEST_CASE("identical pure packets cancel everywhere in parallel") {
  const Wavepacket p{0.0, 1.0 / 66.4, 0.0};
  for (double t1 = 0.0; t1 < 500.0; t1 += 13.0) {
    for (double t2 = 0.0; t2 < 500.0; t2 += 11.0) {
      REQUIRE(coincidence_density(p, p, t1, t2, true) == doctest::Approx(0.0).scale(1e-18));
    }
  }
  CHECK(integrated_density(1.0 / 66.4, 0.0, 0.0, true, 0.5, 1.0) ==
        doctest::Approx(0.0).scale(1e-9));
}

TEST_CASE("density vanishes before either packet starts") {
  const Wavepacket p1{100.0, 0.02, 0.0}, p2{200.0, 0.02, 0.0};
  CHECK(coincidence_density(p1, p2, 50.0, 250.0, false) == 0.0);
  CHECK(coincidence_density(p1, p2, 250.0, 150.0, false) > 0.0);
}

TEST_CASE("cross polarization ignores dephasing and classical visibility") {
  const Wavepacket a{0.0, 0.015, 0.0}, b{30.0, 0.015, 0.0};
  const Wavepacket ad{0.0, 0.015, 0.01}, bd{30.0, 0.015, 0.02};
  for (double t1 = 0.0; t1 < 400.0; t1 += 9.0) {
    for (double t2 = 0.0; t2 < 400.0; t2 += 17.0) {
      const double base = coincidence_density(a, b, t1, t2, false, 0.45, 1.0);
      REQUIRE(coincidence_density(ad, bd, t1, t2, false, 0.45, 0.7) == base);
    }
  }
}

TEST_CASE("overlap of offset packets decays as exp(-gamma |s|)") {
  const double gamma = 1.0 / 126.7;
  for (double s : {0.0, 40.0, 150.0}) {
    CAPTURE(s);
    const double cross = integrated_density(gamma, 0.0, s, false, 0.5, 1.0);
    const double par = integrated_density(gamma, 0.0, s, true, 0.5, 1.0);
    CHECK(cross == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(par / cross == doctest::Approx(1.0 - std::exp(-gamma * s)).scale(1.0).epsilon(2e-3));
  }
}

TEST_CASE("simulated visibility matches the integrated density") {
  struct Case {
    double dephase, r, c;
  };
  const Case cases[] = {{0.0, 0.5, 1.0},
                        {1.2e-3, 0.5, 1.0},
                        {4e-3, 0.45, 0.97},
                        {8e-4, 0.55, 0.9},
                        {2.5e-3, 0.4, 1.0}};
  SourceParams src;
  const double gamma = 1.0 / src.lifetimes().tau_xx;
  std::uint64_t seed = 100;
  for (const auto& k : cases) {
    CAPTURE(k.dephase);
    CAPTURE(k.r);
    CAPTURE(k.c);
    HomConfig hom;
    hom.dephase_xx = k.dephase;
    hom.bs_reflectivity = k.r;
    hom.classical_visibility = k.c;
    const auto pair = run_pair(src, hom, 400000, seed++);
    const auto mc = center_visibility(pair, hom.pulse_pair_delay / 2);
    const double oracle = quadrature_visibility(gamma, k.dephase, k.r, k.c);
    CHECK(std::abs(mc.value - oracle) <= 3 * mc.uncertainty + 1e-6);
  }
}

TEST_CASE("jitter-free identical photons give an empty parallel peak") {
  SourceParams src;
  HomConfig hom;
  hom.dephase_xx = 0.0;
  const auto pair = run_pair(src, hom, 100000, 3);
  CHECK(hom_center_counts(pair.parallel.records, 1000.0) == 0);
  CHECK(hom_center_counts(pair.cross.records, 1000.0) > 0);
  // Same seed, same photon histories: only the routing differs.
  CHECK(pair.cross.records.size() == pair.parallel.records.size());
}

TEST_CASE("X photons are less indistinguishable than XX photons") {
  SourceParams src;
  HomConfig hom;
  hom.dephase_xx = hom.dephase_x = 0.0;
  hom.species = Species::XX;
  const auto xx = center_visibility(run_pair(src, hom, 300000, 5), 1000.0);
  hom.species = Species::X;
  const auto x = center_visibility(run_pair(src, hom, 300000, 5), 1000.0);
  CHECK(x.value < xx.value);
  // Timing jitter inherited from the XX decay: E[exp(−γx|Δs|)] = γxx/(γxx + γx).
  const auto lt = src.lifetimes();
  const double bound = (1.0 / lt.tau_xx) / (1.0 / lt.tau_xx + 1.0 / lt.tau_x);
  CHECK(std::abs(x.value - bound) < 3 * x.uncertainty);
}

TEST_CASE("raw visibility estimator") {
  CHECK(hom_visibility(100, 0).value == 1.0);
  CHECK(hom_visibility(100, 14).value == doctest::Approx(0.86));
  CHECK(hom_visibility(100, 100).value == 0.0);
  CHECK(hom_visibility(100, 14).uncertainty > 0.0);
  CHECK_THROWS_AS(hom_visibility(0, 5), EstimatorError);
}

TEST_CASE("visibility correction") {
  SUBCASE("identity for ideal optics") {
    for (double v : {0.2, 0.5, 0.86}) {
      const auto c = correct_visibility(v, 0.0, 0.5, 1.0);
      CHECK(c.value == doctest::Approx(v));
      CHECK_FALSE(c.clamped);
    }
  }
  SUBCASE("calibrated constants map 0.86 to 0.90") {
    const double cv = device_correction_visibility();
    CHECK(cv > 0.9);
    CHECK(cv < 1.0);
    CHECK(correct_visibility(0.86, 0.014, 0.5, cv).value == doctest::Approx(0.90).epsilon(1e-9));
  }
  SUBCASE("clamping") {
    const auto c = correct_visibility(0.98, 0.05, 0.5, 0.95);
    CHECK(c.value == 1.0);
    CHECK(c.clamped);
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(correct_visibility(1.5, 0.0, 0.5, 1.0), ValidationError);
    CHECK_THROWS_AS(correct_visibility(0.5, -0.1, 0.5, 1.0), ValidationError);
    CHECK_THROWS_AS(correct_visibility(0.5, 0.0, 0.5, 0.0), ValidationError);
  }
  SUBCASE("recovers the intrinsic overlap of a simulated source") {
    SourceParams src;
    const double gamma = 1.0 / src.lifetimes().tau_xx;
    HomConfig hom;
    hom.dephase_xx = 2e-3;
    hom.classical_visibility = 0.95;
    const auto raw = center_visibility(run_pair(src, hom, 600000, 41), 1000.0);
    const double truth = gamma / (gamma + 2.0 * hom.dephase_xx);
    const auto corrected = correct_visibility(raw.value, 0.0, 0.5, 0.95);
    CHECK(std::abs(corrected.value - truth) < 0.02);
  }
}

TEST_CASE("temporal filtering") {
  SourceParams src;
  const double gamma = 1.0 / src.lifetimes().tau_xx;
  HomConfig hom;
  hom.dephase_xx = 3e-3;
  const auto pair = run_pair(src, hom, 600000, 77);

  const auto wide = temporal_filter_visibility(pair.cross.records, pair.parallel.records, 1e9,
                                               hom.pulse_pair_delay);
  CHECK(wide.value == center_visibility(pair, hom.pulse_pair_delay / 2).value);

  // Analytic curve is non-increasing and the simulation follows it.
  double prev_oracle = 2.0;
  for (double w : {10.0, 25.0, 50.0, 100.0, 200.0, 400.0}) {
    CAPTURE(w);
    const double oracle = quadrature_visibility(gamma, hom.dephase_xx, 0.5, 1.0, w);
    CHECK(oracle <= prev_oracle + 1e-9);
    prev_oracle = oracle;
    const auto mc =
        temporal_filter_visibility(pair.cross.records, pair.parallel.records, w, hom.pulse_pair_delay);
    CHECK(std::abs(mc.value - oracle) < 3.5 * mc.uncertainty);
  }
  CHECK_THROWS_AS(temporal_filter_visibility(pair.cross.records, pair.parallel.records, 0.0,
                                             hom.pulse_pair_delay),
                  ValidationError);
  const std::vector<DetectionRecord> none;
  CHECK_THROWS_AS(temporal_filter_visibility(none, none, 50.0, hom.pulse_pair_delay), EstimatorError);
}

TEST_CASE("histogram shows the five-peak interferometer pattern") {
  SourceParams src;
  HomConfig hom;
  hom.polarization = HomPolarization::Cross;
  const auto run = simulate_hom(src, hom, 100000, 9, kIdealDetector);
  const auto h = hom_histogram(run, 100.0);
  auto area = [&](double center) {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      if (std::abs(h.delay(i) - center) <= 500.0) n += h.counts[i];
    }
    return static_cast<double>(n);
  };
  const double d = hom.pulse_pair_delay;
  // Delays 0, ±Δ, ±2Δ carry relative weights 2 : 2 : 1 for cross polarization.
  CHECK(area(0) / area(2 * d) == doctest::Approx(2.0).epsilon(0.08));
  CHECK(area(-d) / area(-2 * d) == doctest::Approx(2.0).epsilon(0.08));
  CHECK(area(3 * d) == 0.0);
}

TEST_CASE("configuration checks") {
  SourceParams src;
  HomConfig hom;
  hom.pulse_pair_delay = 7000.0;
  CHECK_THROWS_AS(simulate_hom(src, hom, 10, 1), ValidationError);
  hom = {};
  hom.bs_reflectivity = 1.0;
  CHECK_THROWS_AS(hom.validate(), ValidationError);
  hom = {};
  CHECK_THROWS_AS(simulate_hom(src, hom, 0, 1), ValidationError);
}
