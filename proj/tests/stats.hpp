#pragma once

// Small statistical oracles shared by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace teststats {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double n = 0.0;
  double sem() const { return std::sqrt(var / n); }
};

inline Moments moments(const std::vector<double>& x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= m.n;
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= (m.n - 1);
  return m;
}

// Asymptotic Kolmogorov distribution tail Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
inline double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k < 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample KS p-value against the CDF.
inline double ks_pvalue(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
}

// χ² per bin of samples in [0, upper) against an exponential with mean tau
// truncated to the same range, using bins with >= 5 expected counts.
inline double exponential_chi2_per_bin(const std::vector<double>& x, double tau, double upper,
                                       int bins) {
  std::vector<double> counts(bins, 0.0);
  double n = 0;
  for (double v : x) {
    if (v < 0 || v >= upper) continue;
    counts[static_cast<int>(v / upper * bins)] += 1;
    n += 1;
  }
  const double norm = 1.0 - std::exp(-upper / tau);
  double chi2 = 0;
  int used = 0;
  for (int i = 0; i < bins; ++i) {
    const double a = upper * i / bins;
    const double b = upper * (i + 1) / bins;
    const double expected = n * (std::exp(-a / tau) - std::exp(-b / tau)) / norm;
    if (expected < 5) continue;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
    ++used;
  }
  return chi2 / used;
}

}  // namespace teststats
