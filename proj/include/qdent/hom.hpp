#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdent/cascade_sim.hpp"
#include "qdent/correlation.hpp"
#include "qdent/detection_chain.hpp"

namespace qdent {

// Single-photon wavepacket ψ(t) = √γ·exp(−γ(t − t0)/2) for t ≥ t0.
struct Wavepacket {
  double t0 = 0.0;            // ps
  double gamma = 1.0 / 66.4;  // 1/ps
  double dephase_rate = 0.0;  // pure dephasing γ_d, 1/ps

  void validate() const;
  double amplitude(double t) const;
};

enum class Species { XX, X };
enum class HomPolarization { Parallel, Cross };

const char* species_name(Species s);
const char* polarization_name(HomPolarization p);

struct HomConfig {
  double pulse_pair_delay = 2000.0;  // ps, also the interferometer arm imbalance
  Species species = Species::XX;
  HomPolarization polarization = HomPolarization::Parallel;
  double bs_reflectivity = 0.5;
  // Interferometer mode overlap. The interference term is weighted by its
  // square (field overlap on both inputs).
  double classical_visibility = 1.0;
  double dephase_xx = 1.2258e-3;     // 1/ps
  double dephase_x = 0.0;            // 1/ps
  double detection_efficiency = 1.0; // per photon, both outputs
  double filter_window = 50.0;       // ps, |t1 − t2| cut for temporal filtering

  void validate() const;
  double dephase_rate() const { return species == Species::XX ? dephase_xx : dephase_x; }
  friend bool operator==(const HomConfig&, const HomConfig&) = default;
};

// Joint detection density (1/ps²) for photon 1 and 2 meeting at the second
// beam splitter, with t1 at output 1 and t2 at output 2:
//   T²|a|² + R²|b|² − 2RT·Re(a b*)·exp(−(γd1 + γd2)|t1 − t2|)·V²
// a = ψ1(t1)ψ2(t2), b = ψ1(t2)ψ2(t1), V the classical visibility. Cross
// polarization drops the interference term.
double coincidence_density(const Wavepacket& p1, const Wavepacket& p2, double t1, double t2,
                           bool parallel, double bs_reflectivity = 0.5,
                           double classical_visibility = 1.0);

// Channel 0 and 1 are the two interferometer outputs.
inline constexpr std::uint8_t kChannelOut1 = 0;
inline constexpr std::uint8_t kChannelOut2 = 1;

struct HomRun {
  std::vector<DetectionRecord> records;
  std::uint64_t n_pulse_pairs = 0;
  double rep_period = 0.0;        // ps between pulse pairs
  double pulse_pair_delay = 0.0;  // ps
};

// Two π pulses per repetition period, pulse_pair_delay apart. Each photon
// passes an unbalanced Mach-Zehnder whose long arm delay equals the pulse
// separation, so (first photon long, second photon short) overlap at the
// last beam splitter; all other path combinations arrive at distinct times.
// XX photons start at the pulse; X photons start at their own cascade's XX
// emission. Detection applies loss and Gaussian jitter (no dark counts or
// dead time). The random draw sequence does not depend on the polarization
// setting, so cross and parallel runs with one seed share photon histories.
HomRun simulate_hom(const SourceParams& src, const HomConfig& hom, std::uint64_t n_pulse_pairs,
                    std::uint64_t seed, const DetectorParams& det = {}, unsigned threads = 0);

// Output-1/output-2 coincidences with |t2 − t1| ≤ half_window.
std::uint64_t hom_center_counts(std::span<const DetectionRecord> records, double half_window);

// Coincidence histogram between the outputs over ±3 pulse separations.
CorrelationHistogram hom_histogram(const HomRun& run, double bin_width);

// (center_cross − center_parallel) / center_cross with Poisson uncertainty.
Estimate hom_visibility(double center_cross, double center_parallel);

struct CorrectedVisibility {
  double value = 0.0;
  bool clamped = false;  // raw correction exceeded 1
};

// Removes the multi-photon excess (additive g²) and divides by the
// interferometer contrast V²·2RT/(R² + T²).
CorrectedVisibility correct_visibility(double v_raw, double g2_zero, double bs_reflectivity,
                                       double classical_visibility);

// Visibility from coincidences with |t1 − t2| ≤ window. Windows wider than
// half the pulse separation are clamped there, which is the unfiltered
// central-peak visibility.
Estimate temporal_filter_visibility(std::span<const DetectionRecord> cross,
                                    std::span<const DetectionRecord> parallel, double window,
                                    double pulse_pair_delay);

}  // namespace qdent
