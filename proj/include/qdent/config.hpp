#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdent/cascade_sim.hpp"
#include "qdent/cbg_design.hpp"
#include "qdent/detection_chain.hpp"
#include "qdent/hom.hpp"

namespace qdent {

enum class ExperimentKind { RabiSweep, Hbt, Tomography12, Hom, Calibrate, Design };

const char* kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

struct RunParams {
  std::uint64_t n_pulses = 1'000'000;  // pulse pairs for kind=hom
  std::uint64_t seed = 1;
  std::uint64_t block_size = 65'536;

  friend bool operator==(const RunParams&, const RunParams&) = default;
};

struct AnalysisParams {
  double bin_width = 100.0;            // ps
  double peak_window = kDefaultPeakWindow;
  double max_delay = 1.2e6;            // ps, histogram half range
  double g2_min_side_delay = 5.0e5;    // ps, g² normalization uses sides beyond this

  friend bool operator==(const AnalysisParams&, const AnalysisParams&) = default;
};

struct RabiParams {
  // Powers in units of P_π.
  std::vector<double> power_ratios = [] {
    std::vector<double> v;
    for (int i = 0; i <= 40; ++i) v.push_back(0.1 * i);
    return v;
  }();

  friend bool operator==(const RabiParams&, const RabiParams&) = default;
};

struct CalibrateParams {
  // Pulse areas in units of π.
  std::vector<double> pulse_areas = {1.0 / 6.0, 1.0 / 3.0, 0.5, 1.0};

  friend bool operator==(const CalibrateParams&, const CalibrateParams&) = default;
};

struct HomAnalysisParams {
  HomConfig config;
  double g2_xx = 0.014;                 // residual multi-photon term per species
  double g2_x = 0.013;
  double correction_visibility = 1.0;  // interferometer visibility used by the correction
  std::vector<double> window_sweep = {10, 20, 30, 40, 50, 60, 80, 100, 150, 200, 300, 500, 1000};

  friend bool operator==(const HomAnalysisParams&, const HomAnalysisParams&) = default;
};

struct DesignParams {
  CbgGeometry geometry;
  DesignRules rules;

  friend bool operator==(const DesignParams& a, const DesignParams& b) {
    return a.geometry.disk_radius == b.geometry.disk_radius &&
           a.geometry.grating_period == b.geometry.grating_period &&
           a.geometry.trench_width == b.geometry.trench_width &&
           a.geometry.n_rings == b.geometry.n_rings &&
           a.rules.slope_radius == b.rules.slope_radius &&
           a.rules.slope_period == b.rules.slope_period &&
           a.rules.ref_radius == b.rules.ref_radius && a.rules.ref_period == b.rules.ref_period &&
           a.rules.ref_lambda == b.rules.ref_lambda &&
           a.rules.fab_sigma_radius == b.rules.fab_sigma_radius &&
           a.rules.fab_sigma_period == b.rules.fab_sigma_period &&
           a.rules.range_min == b.rules.range_min && a.rules.range_max == b.rules.range_max;
  }
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Hbt;
  SourceParams source;
  SetupEfficiencies efficiencies;
  DetectorParams detector;
  RunParams run;
  AnalysisParams analysis;
  RabiParams rabi;
  CalibrateParams calibrate;
  HomAnalysisParams hom;
  DesignParams design;

  // Throws ConfigError naming the offending field.
  void validate() const;
  SimConfig sim_config() const;
  DetectionConfig detection_config() const;

  // Device-calibrated preset.
  static ExperimentConfig device();

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Parses a config document. An optional top-level "preset" ("default" or
// "device") selects the starting values; every other key overrides one
// field. Unknown keys and wrong types are rejected with ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Full canonical form (sorted keys, every field, no preset key).
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string canonical_dump(const ExperimentConfig& cfg);

// FNV-1a 64 of the compact canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qdent
