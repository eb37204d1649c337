#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qdent/cascade_sim.hpp"
#include "qdent/polarization.hpp"
#include "qdent/random.hpp"
#include "qdent/source_model.hpp"

namespace qdent {

struct SetupEfficiencies {
  double eta_det = 0.76;
  double eta_path = 0.25;
  double eta_fiber = 0.65;
  double eta_extr_xx = 0.795;
  double eta_extr_x = 0.782;

  // End-to-end single-photon efficiency of each arm.
  double eta_xx() const { return eta_extr_xx * eta_path * eta_fiber * eta_det; }
  double eta_x() const { return eta_extr_x * eta_path * eta_fiber * eta_det; }
  void validate() const;
  friend bool operator==(const SetupEfficiencies&, const SetupEfficiencies&) = default;
};

struct DetectorParams {
  double jitter_fwhm = 20.0;   // ps, Gaussian
  double dark_rate = 100.0;    // counts/s per channel
  double dead_time = 10'000.0; // ps, non-paralyzable

  void validate() const;
  friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

struct DetectionRecord {
  std::uint8_t channel = 0;
  std::uint64_t timestamp = 0;  // ps from run start

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

// How photons reach detectors.
//   Cross:  XX -> channel 0, X -> channel 1 (cross-correlation setup)
//   HbtXX:  XX photons split 50:50 onto channels 0 and 1, X discarded
//   HbtX:   same for X photons
enum class Routing { Cross, HbtXX, HbtX };

inline constexpr std::uint8_t kChannelXX = 0;
inline constexpr std::uint8_t kChannelX = 1;

struct DetectionConfig {
  SetupEfficiencies efficiencies;
  DetectorParams detector;
  Routing routing = Routing::Cross;
  std::optional<AnalyzerSetting> analyzer;

  void validate() const;
};

// Born-rule sampling of a destructive polarizer on each arm.
std::pair<bool, bool> project_pair(const TwoPhotonState& state, const AnalyzerSetting& setting,
                                   Rng& rng);

// Precomputed projection probabilities for one analyzer setting; the only
// delay-dependent piece is the HH/VV coherence.
class PairProjector {
 public:
  PairProjector(const CascadeStateModel& model, const AnalyzerSetting& setting);

  struct Probabilities {
    double both = 0.0;
    double xx = 0.0;  // marginal pass probability of the XX arm
    double x = 0.0;
  };
  Probabilities probabilities(double tau) const;
  std::pair<bool, bool> sample(double tau, double u) const;

 private:
  const CascadeStateModel* model_;
  double both_static_ = 0.0;
  std::complex<double> both_k_;
  double xx_marginal_ = 0.0;
  double x_marginal_ = 0.0;
};

// Emission events -> sorted detection records: polarization projection,
// per-photon loss, Gaussian jitter, dark counts over [0, duration) and
// dead-time filtering. Random numbers come from the (seed, block)
// detection substream, with dark counts on their own substream.
std::vector<DetectionRecord> apply_chain(std::span<const EmissionEvent> events,
                                         const QDotParams& qd, const DetectionConfig& cfg,
                                         double duration, std::uint64_t seed);

// Photon-level part of apply_chain for one block (no darks, no dead time,
// unsorted).
void detect_photons(std::span<const EmissionEvent> events, const QDotParams& qd,
                    const DetectionConfig& cfg, Rng& rng, std::vector<DetectionRecord>& out);

// Sorts by (timestamp, channel), adds dark counts and applies dead time.
void finalize_records(std::vector<DetectionRecord>& records, const DetectorParams& det,
                      double duration, std::uint64_t seed);

struct DetectionRun {
  std::vector<DetectionRecord> records;
  double duration = 0.0;      // ps
  double rep_period = 0.0;    // ps
  std::uint64_t n_pulses = 0;
  std::uint64_t n_cascades = 0;
};

// Block-parallel simulate -> detect pipeline. Emission events never exist
// for the whole run at once.
DetectionRun simulate_detections(const SimConfig& sim, const DetectionConfig& det,
                                 unsigned threads = 0);

// Timestamps of one channel, in record order.
std::vector<std::uint64_t> channel_timestamps(std::span<const DetectionRecord> records,
                                              std::uint8_t channel);

struct PredictedRates {
  double r_xx = 0.0;  // 1/s
  double r_x = 0.0;
  double r_cc = 0.0;
};

PredictedRates predict_rates(const SetupEfficiencies& eff, double pair_rate, double rep_rate_mhz);

// Coincidence rate over the singles rate of the other arm.
double klyshko(double r_cc, double r_singles_other_arm);

double pair_extraction_efficiency(double eta_extr_xx, double eta_extr_x);

}  // namespace qdent
