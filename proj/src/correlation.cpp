#include "qdent/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "qdent/error.hpp"

namespace qdent {

std::uint64_t CorrelationHistogram::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

CorrelationHistogram& CorrelationHistogram::operator+=(const CorrelationHistogram& other) {
  if (counts.empty()) {
    *this = other;
    return *this;
  }
  if (other.counts.size() != counts.size() || other.bin_width != bin_width) {
    throw std::invalid_argument("cannot merge histograms with different binning");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

std::vector<std::int64_t> coincidence_delays(std::span<const std::uint64_t> a,
                                             std::span<const std::uint64_t> b,
                                             std::int64_t max_delay) {
  std::vector<std::int64_t> out;
  for_each_delay(a, b, max_delay, [&](std::int64_t d) { out.push_back(d); });
  return out;
}

CorrelationHistogram build_histogram(std::span<const std::uint64_t> a,
                                     std::span<const std::uint64_t> b, double bin_width,
                                     double max_delay, double rep_period) {
  if (!(bin_width > 0)) throw ValidationError("bin_width must be > 0");
  if (!(max_delay >= 0)) throw ValidationError("max_delay must be >= 0");
  if (rep_period < 0) throw ValidationError("rep_period must be >= 0");

  CorrelationHistogram h;
  h.rep_period = rep_period;
  h.bin_width = bin_width;
  if (rep_period > 0) {
    const double n = std::max(1.0, std::round(rep_period / bin_width));
    h.bin_width = rep_period / n;
  }
  const auto half = static_cast<std::size_t>(std::floor(max_delay / h.bin_width + 0.5));
  h.counts.assign(2 * half + 1, 0);
  h.origin = -(static_cast<double>(half) + 0.5) * h.bin_width;

  const auto max_d = static_cast<std::int64_t>(std::floor(max_delay));
  const double inv = 1.0 / h.bin_width;
  for_each_delay(a, b, max_d, [&](std::int64_t d) {
    const auto j = static_cast<std::size_t>(std::floor(static_cast<double>(d < 0 ? -d : d) * inv + 0.5));
    if (j > half) return;
    const std::size_t idx = d < 0 ? half - j : half + j;
    ++h.counts[idx];
  });
  return h;
}

PeakAreas integrate_peaks(const CorrelationHistogram& h, double window) {
  if (!(h.rep_period > 0)) throw ValidationError("integrate_peaks needs a histogram with rep_period");
  if (!(window > 0)) throw ValidationError("peak window must be > 0");
  if (window > h.rep_period / 2) throw ValidationError("peak window exceeds half the repetition period");

  PeakAreas out;
  out.rep_period = h.rep_period;
  if (h.counts.empty()) return out;

  const auto per_period = static_cast<std::int64_t>(std::llround(h.rep_period / h.bin_width));
  const auto half = static_cast<std::int64_t>(std::floor(window / 2 / h.bin_width + 1e-9));
  const auto center = static_cast<std::int64_t>(h.center_index());
  const auto size = static_cast<std::int64_t>(h.counts.size());

  auto area = [&](std::int64_t c) {
    double sum = 0;
    for (std::int64_t i = c - half; i <= c + half; ++i) sum += static_cast<double>(h.counts[i]);
    return sum;
  };

  out.center = area(center);
  const std::int64_t k_max = (center - half) / per_period;
  for (std::int64_t k = -k_max; k <= k_max; ++k) {
    if (k == 0) continue;
    const std::int64_t c = center + k * per_period;
    if (c - half < 0 || c + half >= size) continue;
    out.sides.push_back({static_cast<double>(k) * h.rep_period, area(c)});
  }
  return out;
}

namespace {

Estimate ratio_to_mean(double numerator, double side_total, std::size_t n_sides) {
  const double mean = side_total / static_cast<double>(n_sides);
  if (!(mean > 0)) throw EstimatorError("side peaks contain no counts");
  const double value = numerator / mean;
  const double rel_num = numerator > 0 ? 1.0 / numerator : 0.0;
  double var = value * value * (rel_num + 1.0 / side_total);
  if (numerator <= 0) var = 1.0 / (mean * mean);  // one-count floor
  return {value, std::sqrt(var)};
}

}  // namespace

Estimate g2_zero(const PeakAreas& p, double min_side_delay) {
  double total = 0;
  std::size_t n = 0;
  for (const auto& s : p.sides) {
    if (std::abs(s.delay) > min_side_delay) {
      total += s.counts;
      ++n;
    }
  }
  if (n == 0) throw EstimatorError("g2_zero: no side peaks beyond the requested delay");
  return ratio_to_mean(p.center, total, n);
}

Estimate side_to_center_calibration(const PeakAreas& p) {
  if (!(p.center > 0)) throw EstimatorError("side_to_center_calibration: zero-delay peak is empty");
  const SidePeak* minus = nullptr;
  const SidePeak* plus = nullptr;
  for (const auto& s : p.sides) {
    if (s.delay < 0 && (!minus || s.delay > minus->delay)) minus = &s;
    if (s.delay > 0 && (!plus || s.delay < plus->delay)) plus = &s;
  }
  if (!minus || !plus) throw EstimatorError("side_to_center_calibration: nearest side peaks missing");
  const double a_s = minus->counts + plus->counts;
  const double a_c = 2.0 * p.center;
  const double value = a_s / a_c;
  const double rel = (a_s > 0 ? 1.0 / a_s : 0.0) + 1.0 / p.center;
  return {value, value * std::sqrt(rel)};
}

double basis_visibility(double co1, double cross1, double cross2, double co2) {
  if (co1 < 0 || cross1 < 0 || cross2 < 0 || co2 < 0) {
    throw EstimatorError("basis_visibility: negative coincidence value");
  }
  const double total = co1 + cross1 + cross2 + co2;
  if (!(total > 0)) throw EstimatorError("basis_visibility: all inputs are zero");
  return (co1 - cross1 - cross2 + co2) / total;
}

double fidelity_from_visibilities(double v_lin, double v_diag, double v_circ) {
  for (double v : {v_lin, v_diag, v_circ}) {
    if (!(std::abs(v) <= 1.0)) throw ValidationError("visibility outside [-1, 1]");
  }
  return (1.0 + v_lin + v_diag - v_circ) / 4.0;
}

Estimate TomographyRecord::g2() const {
  if (!(normalization > 0)) throw EstimatorError("tomography record has no normalization counts");
  const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(side_counts) / normalization));
  return ratio_to_mean(static_cast<double>(zero_peak_counts), static_cast<double>(side_counts),
                       std::max<std::size_t>(n, 1));
}

TomographyRecord make_tomography_record(const AnalyzerSetting& setting, const PeakAreas& p,
                                        double min_side_delay) {
  TomographyRecord r;
  r.setting = setting;
  r.zero_peak_counts = static_cast<std::uint64_t>(std::llround(p.center));
  double total = 0;
  std::size_t n = 0;
  for (const auto& s : p.sides) {
    if (std::abs(s.delay) > min_side_delay) {
      total += s.counts;
      ++n;
    }
  }
  if (n == 0) throw EstimatorError("tomography record: no side peaks for normalization");
  r.side_counts = static_cast<std::uint64_t>(std::llround(total));
  r.normalization = total / static_cast<double>(n);
  return r;
}

TomographyResult analyze_tomography(std::span<const TomographyRecord> records) {
  if (records.size() != 12) throw EstimatorError("tomography needs exactly 12 records");
  auto find = [&](const AnalyzerSetting& s) -> const TomographyRecord& {
    const TomographyRecord* hit = nullptr;
    for (const auto& r : records) {
      if (r.setting == s) {
        if (hit) throw EstimatorError("duplicate tomography setting " + s.label());
        hit = &r;
      }
    }
    if (!hit) throw EstimatorError("missing tomography setting " + s.label());
    return *hit;
  };

  auto basis = [&](Basis b) {
    const auto settings = basis_settings(b);
    std::array<Estimate, 4> g{};
    for (std::size_t i = 0; i < 4; ++i) g[i] = find(settings[i]).g2();
    const double v = basis_visibility(g[0].value, g[1].value, g[2].value, g[3].value);
    const double sum = g[0].value + g[1].value + g[2].value + g[3].value;
    const double d_co = (1.0 - v) / sum;
    const double d_cross = -(1.0 + v) / sum;
    double var = 0;
    var += std::pow(d_co * g[0].uncertainty, 2) + std::pow(d_co * g[3].uncertainty, 2);
    var += std::pow(d_cross * g[1].uncertainty, 2) + std::pow(d_cross * g[2].uncertainty, 2);
    return Estimate{v, std::sqrt(var)};
  };

  TomographyResult out;
  out.v_linear = basis(Basis::Linear);
  out.v_diagonal = basis(Basis::Diagonal);
  out.v_circular = basis(Basis::Circular);
  out.fidelity.value = fidelity_from_visibilities(out.v_linear.value, out.v_diagonal.value,
                                                  out.v_circular.value);
  out.fidelity.uncertainty = 0.25 * std::sqrt(std::pow(out.v_linear.uncertainty, 2) +
                                              std::pow(out.v_diagonal.uncertainty, 2) +
                                              std::pow(out.v_circular.uncertainty, 2));
  return out;
}

BlinkingFit blinking_envelope(const PeakAreas& p) {
  std::vector<double> x, y, w;
  std::set<long long> distinct;
  for (const auto& s : p.sides) {
    x.push_back(std::abs(s.delay));
    y.push_back(s.counts);
    w.push_back(1.0 / std::max(s.counts, 1.0));
    distinct.insert(std::llround(std::abs(s.delay)));
  }
  if (distinct.size() < 4) throw EstimatorError("blinking_envelope: need side peaks at >= 4 delays");

  struct Linear {
    double a, b, chi2;
  };
  // Weighted least squares for y = a + b·exp(−x/tau) at fixed tau.
  auto solve = [&](double tau) {
    double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = std::exp(-x[i] / tau);
      s00 += w[i];
      s01 += w[i] * e;
      s11 += w[i] * e * e;
      r0 += w[i] * y[i];
      r1 += w[i] * y[i] * e;
    }
    const double det = s00 * s11 - s01 * s01;
    Linear out{r0 / s00, 0.0, 0.0};
    if (std::abs(det) > 1e-12 * s00 * s11) {
      out.a = (r0 * s11 - r1 * s01) / det;
      out.b = (r1 * s00 - r0 * s01) / det;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - out.a - out.b * std::exp(-x[i] / tau);
      out.chi2 += w[i] * r * r;
    }
    return out;
  };

  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  double lo = std::log(*xmin_it / 10.0);
  double hi = std::log(*xmax_it * 100.0);
  // Coarse scan then golden-section refinement in log(tau).
  constexpr int kScan = 200;
  double best_u = lo;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double u = lo + (hi - lo) * i / kScan;
    const double c = solve(std::exp(u)).chi2;
    if (c < best_chi2) {
      best_chi2 = c;
      best_u = u;
    }
  }
  const double step = (hi - lo) / kScan;
  double a = best_u - step;
  double b = best_u + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (solve(std::exp(c)).chi2 < solve(std::exp(d)).chi2) {
      b = d;
    } else {
      a = c;
    }
  }
  const double tau = std::exp(0.5 * (a + b));
  const Linear fit = solve(tau);

  BlinkingFit out;
  out.amplitude = fit.a + fit.b;
  if (!(out.amplitude > 0)) throw EstimatorError("blinking_envelope: fit amplitude is not positive");
  out.on_fraction = fit.a / out.amplitude;
  out.t_corr = tau / 1e3;
  const double dof = static_cast<double>(x.size()) - 3.0;
  out.chi2_per_dof = dof > 0 ? fit.chi2 / dof : 0.0;
  return out;
}

Estimate fit_decay_time(std::span<const double> samples, double t_start, double t_stop) {
  if (!(t_stop > t_start)) throw ValidationError("fit_decay_time: empty time range");
  double sum = 0, sum2 = 0;
  std::size_t n = 0;
  for (double t : samples) {
    if (t >= t_start && t < t_stop) {
      const double u = t - t_start;
      sum += u;
      sum2 += u * u;
      ++n;
    }
  }
  if (n < 2) throw EstimatorError("fit_decay_time: fewer than two samples in range");
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(sum2 / static_cast<double>(n) - mean * mean, 1e-300);

  double tau = mean;
  if (std::isfinite(t_stop)) {
    const double len = t_stop - t_start;
    if (mean >= len / 2) throw EstimatorError("fit_decay_time: samples show no decay in range");
    // Mean of a truncated exponential: tau − L / (exp(L/tau) − 1).
    auto truncated_mean = [&](double t) { return t - len / std::expm1(len / t); };
    double lo = mean * 1e-3;
    double hi = len * 1e3;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      (truncated_mean(mid) < mean ? lo : hi) = mid;
    }
    tau = std::sqrt(lo * hi);
  }
  // Fisher information in the rate is n·Var(t); map back to tau.
  return {tau, tau * tau / std::sqrt(static_cast<double>(n) * var)};
}

}  // namespace qdent
