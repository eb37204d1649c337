#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qdent/polarization.hpp"

namespace qdent {

// Value with a one-sigma uncertainty from first-order Poisson propagation.
struct Estimate {
  double value = 0.0;
  double uncertainty = 0.0;
};

// Coincidence counts versus delay t_b − t_a. Bins are symmetric about zero:
// bin `center_index() + j` holds delays d with round(|d|/bin_width) == |j|
// and sign(d) == sign(j), so mirroring the inputs mirrors the histogram
// exactly.
struct CorrelationHistogram {
  double bin_width = 1.0;   // ps
  double origin = 0.0;      // ps, left edge of bin 0
  double rep_period = 0.0;  // ps; an integer multiple of bin_width (0 if unset)
  std::vector<std::uint64_t> counts;

  std::size_t center_index() const { return counts.size() / 2; }
  double delay(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(center_index())) * bin_width;
  }
  double max_delay() const { return static_cast<double>(center_index()) * bin_width; }
  std::uint64_t total() const;
  bool empty() const { return counts.empty(); }

  // Elementwise merge; both histograms must share the binning.
  CorrelationHistogram& operator+=(const CorrelationHistogram& other);
};

// Calls fn(delay) for every pair with |t_b − t_a| ≤ max_delay. Both inputs
// must be sorted ascending.
template <typename Fn>
void for_each_delay(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                    std::int64_t max_delay, Fn&& fn) {
  std::size_t lo = 0;
  for (const std::uint64_t ta_u : a) {
    const auto ta = static_cast<std::int64_t>(ta_u);
    while (lo < b.size() && static_cast<std::int64_t>(b[lo]) < ta - max_delay) ++lo;
    for (std::size_t j = lo; j < b.size(); ++j) {
      const std::int64_t d = static_cast<std::int64_t>(b[j]) - ta;
      if (d > max_delay) break;
      fn(d);
    }
  }
}

std::vector<std::int64_t> coincidence_delays(std::span<const std::uint64_t> a,
                                             std::span<const std::uint64_t> b,
                                             std::int64_t max_delay);

// Start-stop-free histogram of all delays within ±max_delay. When
// rep_period > 0 the bin width is shrunk so that rep_period is an exact
// multiple of it. Empty inputs give an all-zero histogram.
CorrelationHistogram build_histogram(std::span<const std::uint64_t> a,
                                     std::span<const std::uint64_t> b, double bin_width,
                                     double max_delay, double rep_period = 0.0);

struct SidePeak {
  double delay = 0.0;  // ps, nonzero multiple of rep_period
  double counts = 0.0;
};

struct PeakAreas {
  double center = 0.0;
  std::vector<SidePeak> sides;  // ordered by delay
  double rep_period = 0.0;
};

inline constexpr double kDefaultPeakWindow = 2000.0;  // ps

// Sums bins whose centers lie within ±window/2 of each multiple of
// rep_period that fits completely inside the histogram.
PeakAreas integrate_peaks(const CorrelationHistogram& h, double window = kDefaultPeakWindow);

// center / mean(sides with |delay| > min_side_delay).
Estimate g2_zero(const PeakAreas& p, double min_side_delay = 0.0);

// Side-to-center ratio A_S/A_C using the two nearest side peaks and the
// zero-delay peak counted once per time ordering.
Estimate side_to_center_calibration(const PeakAreas& p);

// (co1 − cross1 − cross2 + co2) / (co1 + cross1 + cross2 + co2).
double basis_visibility(double co1, double cross1, double cross2, double co2);

double fidelity_from_visibilities(double v_lin, double v_diag, double v_circ);

// Zero-delay peak and side-peak normalization for one analyzer setting.
struct TomographyRecord {
  AnalyzerSetting setting;
  std::uint64_t zero_peak_counts = 0;
  double normalization = 0.0;      // mean side-peak counts
  std::uint64_t side_counts = 0;   // total counts in the normalizing peaks

  // Normalized zero-delay coincidence g²(0) with its Poisson uncertainty.
  Estimate g2() const;
};

TomographyRecord make_tomography_record(const AnalyzerSetting& setting, const PeakAreas& p,
                                        double min_side_delay = 0.0);

struct TomographyResult {
  Estimate v_linear;
  Estimate v_diagonal;
  Estimate v_circular;
  Estimate fidelity;
};

// Requires exactly the twelve settings of tomography_settings(), in any
// order.
TomographyResult analyze_tomography(std::span<const TomographyRecord> records);

struct BlinkingFit {
  double on_fraction = 1.0;   // asymptote / near-delay amplitude
  double t_corr = 0.0;        // ns
  double amplitude = 0.0;     // fitted side-peak area extrapolated to zero delay
  double chi2_per_dof = 0.0;
};

// Fits side-peak areas against |delay| to c·(β + (1−β)·exp(−|delay|/t_corr)).
// Needs side peaks at four or more distinct |delay| values.
BlinkingFit blinking_envelope(const PeakAreas& p);

// Maximum-likelihood decay time of samples restricted to [t_start, t_stop)
// (a truncated exponential); t_stop may be +inf.
Estimate fit_decay_time(std::span<const double> samples, double t_start, double t_stop);

}  // namespace qdent
