#include "qdent/hom.hpp"

#include <algorithm>
#include <cmath>

#include "qdent/error.hpp"
#include "qdent/parallel.hpp"
#include "qdent/units.hpp"

namespace qdent {

namespace {

constexpr std::uint64_t kPairsPerBlock = 65'536;

std::uint64_t to_timestamp(double t) {
  if (!(t > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::llround(t));
}

void sort_records(std::vector<DetectionRecord>& records) {
  std::sort(records.begin(), records.end(), [](const DetectionRecord& a, const DetectionRecord& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.channel < b.channel;
  });
}

}  // namespace

void Wavepacket::validate() const {
  if (!(gamma > 0)) throw ValidationError("wavepacket gamma must be > 0");
  if (!(dephase_rate >= 0)) throw ValidationError("wavepacket dephase_rate must be >= 0");
}

double Wavepacket::amplitude(double t) const {
  if (t < t0) return 0.0;
  return std::sqrt(gamma) * std::exp(-0.5 * gamma * (t - t0));
}

const char* species_name(Species s) { return s == Species::XX ? "XX" : "X"; }

const char* polarization_name(HomPolarization p) {
  return p == HomPolarization::Parallel ? "parallel" : "cross";
}

void HomConfig::validate() const {
  if (!(pulse_pair_delay > 0)) throw ValidationError("hom.pulse_pair_delay must be > 0");
  if (!(bs_reflectivity > 0 && bs_reflectivity < 1)) {
    throw ValidationError("hom.bs_reflectivity must be in (0,1)");
  }
  if (!(classical_visibility >= 0 && classical_visibility <= 1)) {
    throw ValidationError("hom.classical_visibility must be in [0,1]");
  }
  if (!(dephase_xx >= 0 && dephase_x >= 0)) throw ValidationError("hom dephasing must be >= 0");
  if (!(detection_efficiency >= 0 && detection_efficiency <= 1)) {
    throw ValidationError("hom.detection_efficiency must be in [0,1]");
  }
  if (!(filter_window > 0)) throw ValidationError("hom.filter_window must be > 0");
}

double coincidence_density(const Wavepacket& p1, const Wavepacket& p2, double t1, double t2,
                           bool parallel, double bs_reflectivity, double classical_visibility) {
  const double r = bs_reflectivity;
  const double t = 1.0 - r;
  const double a = p1.amplitude(t1) * p2.amplitude(t2);
  const double b = p1.amplitude(t2) * p2.amplitude(t1);
  double density = t * t * a * a + r * r * b * b;
  if (parallel) {
    const double decay = std::exp(-(p1.dephase_rate + p2.dephase_rate) * std::abs(t1 - t2));
    density -= 2.0 * r * t * a * b * decay * classical_visibility * classical_visibility;
  }
  return density;
}

HomRun simulate_hom(const SourceParams& src, const HomConfig& hom, std::uint64_t n_pulse_pairs,
                    std::uint64_t seed, const DetectorParams& det, unsigned threads) {
  src.validate();
  hom.validate();
  det.validate();
  if (n_pulse_pairs == 0) throw ValidationError("n_pulse_pairs must be > 0");

  const CascadeLifetimes life = src.lifetimes();
  const double rep = src.excitation.rep_period();
  const double delay = hom.pulse_pair_delay;
  if (2.0 * delay >= rep) throw ValidationError("hom.pulse_pair_delay must be below half the repetition period");

  const bool is_xx = hom.species == Species::XX;
  const double tau = is_xx ? life.tau_xx : life.tau_x;
  const double gamma = 1.0 / tau;
  const double dephase = hom.dephase_rate();
  const double r = hom.bs_reflectivity;
  const double t = 1.0 - r;
  const double kappa = hom.polarization == HomPolarization::Parallel
                           ? hom.classical_visibility * hom.classical_visibility
                           : 0.0;
  const double eta = hom.detection_efficiency;
  const double sigma = det.jitter_fwhm / units::kFwhmPerSigma;

  const std::uint64_t n_blocks = (n_pulse_pairs + kPairsPerBlock - 1) / kPairsPerBlock;
  std::vector<std::vector<DetectionRecord>> blocks(n_blocks);

  parallel_for(n_blocks, threads ? threads : default_thread_count(), [&](std::size_t block) {
    Rng rng(seed, streams::kHom, block);
    auto& out = blocks[block];
    const std::uint64_t first = block * kPairsPerBlock;
    const std::uint64_t last = std::min(n_pulse_pairs, first + kPairsPerBlock);
    out.reserve(4 * (last - first));

    for (std::uint64_t k = first; k < last; ++k) {
      const double base = static_cast<double>(k) * rep;
      // Sixteen draws per pulse pair regardless of outcome.
      struct Photon {
        double start, arrival;
        bool long_arm, to_out1, detected;
        double jitter;
      } ph[2];
      for (int i = 0; i < 2; ++i) {
        const double cascade = rng.exponential(life.tau_xx);
        const double emission = rng.exponential(tau);
        const double u_arm = rng.uniform();
        const double u_port = rng.uniform();
        const double u_det = rng.uniform();
        ph[i].jitter = sigma * rng.normal();
        ph[i].start = base + i * delay + (is_xx ? 0.0 : cascade);
        ph[i].long_arm = u_arm < 0.5;
        ph[i].arrival = ph[i].start + emission + (ph[i].long_arm ? delay : 0.0);
        ph[i].to_out1 = u_port < t;
        ph[i].detected = u_det < eta;
      }
      const double u_coinc = rng.uniform();
      const double u_order = rng.uniform();

      if (ph[0].long_arm && !ph[1].long_arm) {
        // Overlapping wavepackets at the last beam splitter.
        const Wavepacket w1{ph[0].start + delay, gamma, dephase};
        const Wavepacket w2{ph[1].start, gamma, dephase};
        const double u = ph[0].arrival;
        const double v = ph[1].arrival;
        const double a = w1.amplitude(u) * w2.amplitude(v);
        const double b = w1.amplitude(v) * w2.amplitude(u);
        const double norm = a * a + b * b;
        const double cross_term = 2.0 * r * t * a * b * std::exp(-2.0 * dephase * std::abs(u - v)) * kappa;
        const double p_u_out1 = t * t * a * a + r * r * b * b - cross_term;
        const double p_v_out1 = t * t * b * b + r * r * a * a - cross_term;
        const double p_coinc = norm > 0 ? std::max(0.0, p_u_out1 + p_v_out1) / norm : 0.0;
        if (u_coinc < p_coinc) {
          const bool u_first = u_order * (p_u_out1 + p_v_out1) < p_u_out1;
          ph[0].to_out1 = u_first;
          ph[1].to_out1 = !u_first;
        } else {
          ph[0].to_out1 = ph[1].to_out1 = u_order < 0.5;
        }
      }

      for (const Photon& p : ph) {
        if (!p.detected) continue;
        out.push_back({p.to_out1 ? kChannelOut1 : kChannelOut2, to_timestamp(p.arrival + p.jitter)});
      }
    }
  });

  HomRun run;
  run.n_pulse_pairs = n_pulse_pairs;
  run.rep_period = rep;
  run.pulse_pair_delay = delay;
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  run.records.reserve(total);
  for (auto& b : blocks) {
    run.records.insert(run.records.end(), b.begin(), b.end());
    std::vector<DetectionRecord>().swap(b);
  }
  sort_records(run.records);
  return run;
}

std::uint64_t hom_center_counts(std::span<const DetectionRecord> records, double half_window) {
  if (!(half_window > 0)) throw ValidationError("coincidence window must be > 0");
  const auto a = channel_timestamps(records, kChannelOut1);
  const auto b = channel_timestamps(records, kChannelOut2);
  std::uint64_t n = 0;
  for_each_delay(a, b, static_cast<std::int64_t>(std::floor(half_window)), [&](std::int64_t) { ++n; });
  return n;
}

CorrelationHistogram hom_histogram(const HomRun& run, double bin_width) {
  const auto a = channel_timestamps(run.records, kChannelOut1);
  const auto b = channel_timestamps(run.records, kChannelOut2);
  return build_histogram(a, b, bin_width, 3.0 * run.pulse_pair_delay + run.pulse_pair_delay / 2);
}

Estimate hom_visibility(double center_cross, double center_parallel) {
  if (!(center_cross > 0)) throw EstimatorError("hom_visibility: cross-polarized peak is empty");
  const double ratio = center_parallel / center_cross;
  const double rel = (center_parallel > 0 ? 1.0 / center_parallel : 0.0) + 1.0 / center_cross;
  return {1.0 - ratio, ratio * std::sqrt(rel)};
}

CorrectedVisibility correct_visibility(double v_raw, double g2_zero, double bs_reflectivity,
                                       double classical_visibility) {
  if (!(v_raw >= -1 && v_raw <= 1)) throw ValidationError("v_raw must be in [-1,1]");
  if (!(g2_zero >= 0)) throw ValidationError("g2_zero must be >= 0");
  if (!(bs_reflectivity > 0 && bs_reflectivity < 1)) {
    throw ValidationError("bs_reflectivity must be in (0,1)");
  }
  if (!(classical_visibility > 0 && classical_visibility <= 1)) {
    throw ValidationError("classical_visibility must be in (0,1]");
  }
  const double r = bs_reflectivity;
  const double t = 1.0 - r;
  const double contrast = classical_visibility * classical_visibility * 2.0 * r * t / (r * r + t * t);
  CorrectedVisibility out;
  out.value = (v_raw + g2_zero) / contrast;
  if (out.value > 1.0) {
    out.value = 1.0;
    out.clamped = true;
  }
  return out;
}

Estimate temporal_filter_visibility(std::span<const DetectionRecord> cross,
                                    std::span<const DetectionRecord> parallel, double window,
                                    double pulse_pair_delay) {
  if (!(window > 0)) throw ValidationError("filter window must be > 0");
  if (!(pulse_pair_delay > 0)) throw ValidationError("pulse_pair_delay must be > 0");
  const double w = std::min(window, pulse_pair_delay / 2);
  const auto c = static_cast<double>(hom_center_counts(cross, w));
  const auto p = static_cast<double>(hom_center_counts(parallel, w));
  if (c == 0) throw EstimatorError("temporal filter leaves no coincidences");
  return hom_visibility(c, p);
}

}  // namespace qdent
