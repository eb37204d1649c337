#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdent/config.hpp"
#include "qdent/correlation.hpp"
#include "qdent/detection_chain.hpp"

namespace qdent {

struct ExperimentResult {
  nlohmann::json summary;
  std::vector<std::string> files;  // written artifacts, summary.json last
};

// Runs cfg.kind end to end and writes its artifacts into out_dir (created
// if missing). Every summary carries a provenance block with the config
// hash, seed and library version; there is no wall-clock field, so equal
// inputs give byte-identical files.
//
// Files per kind (all CSVs have a header row):
//   rabi_sweep    rabi.csv
//                   power_ratio,power_nw,sqrt_power,pulse_area_pi,
//                   xx_counts,x_counts,coincidences,predicted_prep
//   hbt           cross.qtt, hbt_xx.qtt, hbt_x.qtt
//                 cross_histogram.csv, hbt_xx_histogram.csv, hbt_x_histogram.csv
//                   delay_ps,counts
//   tomography12  tomography_<XX><X>.qtt per setting
//                 tomography_histograms.csv  setting,delay_ps,counts
//   hom           hom_cross.qtt, hom_parallel.qtt
//                 hom_histogram.csv  delay_ps,counts,polarization
//                 hom_window_sweep.csv  window_ps,visibility,uncertainty,
//                                       cross_counts,parallel_counts
//   calibrate     calibrate.csv
//                   pulse_area_pi,power_nw,xx_counts,normalized_counts,
//                   p,p_uncertainty,p_blinking_corrected
//   design        (summary only)
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                unsigned threads = 0);

// Closed-form efficiency chain: pair generation rate, per-arm efficiencies,
// predicted rates, Klyshko efficiencies and pair extraction efficiency.
nlohmann::json summarize_bookkeeping(const ExperimentConfig& cfg);

// Histogram and peak estimators for a recorded two-channel time-tag file.
ExperimentResult analyze_timetags(const std::string& path, const AnalysisParams& analysis,
                                  const std::string& out_dir);

// Deterministic sub-seed for the index-th run of an experiment.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index);

// Estimators shared by the runners and the tests.
struct CrossRunSummary {
  double duration = 0.0;      // s
  double rate_xx = 0.0;       // 1/s
  double rate_x = 0.0;
  double rate_cc = 0.0;       // zero-delay peak, 1/s
  PeakAreas peaks;
  Estimate p_side_to_center;
  BlinkingFit blinking;
  double p_blinking_corrected = 0.0;
  Estimate tau_xx;            // ps, from detection time within the period
  Estimate tau_x;             // ps, from the X − XX delay
  // Secondary estimators that failed on sparse data; their fields keep
  // default values and the blinking correction is skipped.
  std::vector<std::string> warnings;
};

CrossRunSummary summarize_cross_run(const DetectionRun& run, const AnalysisParams& analysis);

// Tail starts for the lifetime fits, clear of the detector jitter.
inline constexpr double kLifetimeFitStartXX = 40.0;  // ps
inline constexpr double kLifetimeFitStartX = 60.0;   // ps

nlohmann::json estimate_json(const Estimate& e);

}  // namespace qdent
