#include "qdent/detection_chain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "qdent/error.hpp"
#include "qdent/parallel.hpp"
#include "qdent/units.hpp"

namespace qdent {

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

Eigen::Vector4cd product_ket(Pol a, Pol b) {
  const Eigen::Vector2cd ja = jones(a);
  const Eigen::Vector2cd jb = jones(b);
  return {ja(0) * jb(0), ja(0) * jb(1), ja(1) * jb(0), ja(1) * jb(1)};
}

std::complex<double> expectation(const Eigen::Vector4cd& k, const Matrix4c& op) {
  return (k.adjoint() * op * k)(0, 0);
}

std::pair<bool, bool> sample_outcome(double both, double xx, double x, double u) {
  const double p_xx_only = xx - both;
  const double p_x_only = x - both;
  if (u < both) return {true, true};
  if (u < both + p_xx_only) return {true, false};
  if (u < both + p_xx_only + p_x_only) return {false, true};
  return {false, false};
}

std::uint64_t to_timestamp(double t) {
  if (!(t > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::llround(t));
}

}  // namespace

void SetupEfficiencies::validate() const {
  for (double v : {eta_det, eta_path, eta_fiber, eta_extr_xx, eta_extr_x}) {
    if (!in_unit(v)) throw ValidationError("setup efficiencies must be in [0,1]");
  }
}

void DetectorParams::validate() const {
  if (!(jitter_fwhm >= 0 && dark_rate >= 0 && dead_time >= 0)) {
    throw ValidationError("detector parameters must be >= 0");
  }
}

void DetectionConfig::validate() const {
  efficiencies.validate();
  detector.validate();
}

std::pair<bool, bool> project_pair(const TwoPhotonState& state, const AnalyzerSetting& setting,
                                   Rng& rng) {
  const Pol a = setting.basis_xx;
  const Pol b = setting.basis_x;
  const double both = state.joint_probability(a, b);
  const double xx = both + state.joint_probability(a, orthogonal(b));
  const double x = both + state.joint_probability(orthogonal(a), b);
  return sample_outcome(both, xx, x, rng.uniform());
}

PairProjector::PairProjector(const CascadeStateModel& model, const AnalyzerSetting& setting)
    : model_(&model) {
  const Pol a = setting.basis_xx;
  const Pol b = setting.basis_x;
  const Eigen::Vector4cd ab = product_ket(a, b);
  const Eigen::Vector4cd ab_ = product_ket(a, orthogonal(b));
  const Eigen::Vector4cd a_b = product_ket(orthogonal(a), b);
  const Matrix4c& st = model.static_part();
  const Matrix4c& k = model.coherence_operator();
  both_static_ = expectation(ab, st).real();
  both_k_ = expectation(ab, k);
  // Marginals of the modeled state do not depend on the HH/VV coherence:
  // Tr[|HH><VV| (P ⊗ 1)] = 0 for any single-photon projector P.
  xx_marginal_ = both_static_ + expectation(ab_, st).real();
  x_marginal_ = both_static_ + expectation(a_b, st).real();
}

PairProjector::Probabilities PairProjector::probabilities(double tau) const {
  const double both = both_static_ + 2.0 * (model_->coherence(tau) * both_k_).real();
  return {both, xx_marginal_, x_marginal_};
}

std::pair<bool, bool> PairProjector::sample(double tau, double u) const {
  const Probabilities p = probabilities(tau);
  return sample_outcome(p.both, p.xx, p.x, u);
}

void detect_photons(std::span<const EmissionEvent> events, const QDotParams& qd,
                    const DetectionConfig& cfg, Rng& rng, std::vector<DetectionRecord>& out) {
  const CascadeStateModel model(qd);
  std::optional<PairProjector> projector;
  if (cfg.analyzer && cfg.routing == Routing::Cross) projector.emplace(model, *cfg.analyzer);

  const double eta_xx = cfg.efficiencies.eta_xx();
  const double eta_x = cfg.efficiencies.eta_x();
  const double sigma = cfg.detector.jitter_fwhm / units::kFwhmPerSigma;

  for (const EmissionEvent& ev : events) {
    // Eight draws per cascade regardless of outcome.
    const double u_proj = rng.uniform();
    const double u_xx = rng.uniform();
    const double u_x = rng.uniform();
    const double u_route = rng.uniform();
    const double jitter_xx = sigma * rng.normal();
    const double jitter_x = sigma * rng.normal();

    auto [pass_xx, pass_x] = projector ? projector->sample(ev.x_delay, u_proj)
                                       : std::pair<bool, bool>{true, true};
    const bool det_xx = pass_xx && u_xx < eta_xx;
    const bool det_x = pass_x && u_x < eta_x;

    switch (cfg.routing) {
      case Routing::Cross:
        if (det_xx) out.push_back({kChannelXX, to_timestamp(ev.t_xx() + jitter_xx)});
        if (det_x) out.push_back({kChannelX, to_timestamp(ev.t_x() + jitter_x)});
        break;
      case Routing::HbtXX:
        if (det_xx) {
          out.push_back({static_cast<std::uint8_t>(u_route < 0.5 ? 0 : 1),
                         to_timestamp(ev.t_xx() + jitter_xx)});
        }
        break;
      case Routing::HbtX:
        if (det_x) {
          out.push_back({static_cast<std::uint8_t>(u_route < 0.5 ? 0 : 1),
                         to_timestamp(ev.t_x() + jitter_x)});
        }
        break;
    }
  }
}

void finalize_records(std::vector<DetectionRecord>& records, const DetectorParams& det,
                      double duration, std::uint64_t seed) {
  if (det.dark_rate > 0 && duration > 0) {
    const double mean_gap = units::kPsPerSecond / det.dark_rate;
    for (std::uint8_t ch = 0; ch < 2; ++ch) {
      Rng rng(seed, streams::kDarkCounts, ch);
      for (double t = rng.exponential(mean_gap); t < duration; t += rng.exponential(mean_gap)) {
        records.push_back({ch, to_timestamp(t)});
      }
    }
  }
  std::sort(records.begin(), records.end(), [](const DetectionRecord& a, const DetectionRecord& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.channel < b.channel;
  });
  if (det.dead_time <= 0) return;

  std::array<std::int64_t, 256> last{};
  last.fill(-1);
  std::size_t kept = 0;
  for (const DetectionRecord& r : records) {
    std::int64_t& prev = last[r.channel];
    const auto t = static_cast<std::int64_t>(r.timestamp);
    if (prev >= 0 && static_cast<double>(t - prev) < det.dead_time) continue;
    prev = t;
    records[kept++] = r;
  }
  records.resize(kept);
}

std::vector<DetectionRecord> apply_chain(std::span<const EmissionEvent> events,
                                         const QDotParams& qd, const DetectionConfig& cfg,
                                         double duration, std::uint64_t seed) {
  cfg.validate();
  std::vector<DetectionRecord> out;
  out.reserve(events.size());
  Rng rng(seed, streams::kDetection, 0);
  detect_photons(events, qd, cfg, rng, out);
  finalize_records(out, cfg.detector, duration, seed);
  return out;
}

DetectionRun simulate_detections(const SimConfig& sim, const DetectionConfig& det,
                                 unsigned threads) {
  sim.validate();
  det.validate();
  const std::uint64_t n_blocks = sim.block_count();
  std::vector<std::vector<DetectionRecord>> blocks(n_blocks);
  std::vector<std::uint64_t> cascades(n_blocks, 0);
  parallel_for(n_blocks, threads ? threads : default_thread_count(), [&](std::size_t b) {
    const std::vector<EmissionEvent> events = simulate_block(sim, b);
    cascades[b] = events.size();
    Rng rng(sim.seed, streams::kDetection, b);
    detect_photons(events, sim.source.qdot, det, rng, blocks[b]);
  });

  DetectionRun run;
  run.rep_period = sim.source.excitation.rep_period();
  run.n_pulses = sim.n_pulses;
  run.duration = static_cast<double>(sim.n_pulses) * run.rep_period;
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  run.records.reserve(total);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    run.records.insert(run.records.end(), blocks[b].begin(), blocks[b].end());
    run.n_cascades += cascades[b];
    std::vector<DetectionRecord>().swap(blocks[b]);
  }
  finalize_records(run.records, det.detector, run.duration, sim.seed);
  return run;
}

std::vector<std::uint64_t> channel_timestamps(std::span<const DetectionRecord> records,
                                              std::uint8_t channel) {
  std::vector<std::uint64_t> out;
  for (const auto& r : records) {
    if (r.channel == channel) out.push_back(r.timestamp);
  }
  return out;
}

PredictedRates predict_rates(const SetupEfficiencies& eff, double pair_rate, double rep_rate_mhz) {
  const double pairs_per_s = rep_rate_mhz * 1e6 * pair_rate;
  return {pairs_per_s * eff.eta_xx(), pairs_per_s * eff.eta_x(),
          pairs_per_s * eff.eta_xx() * eff.eta_x()};
}

double klyshko(double r_cc, double r_singles_other_arm) {
  if (!(r_singles_other_arm > 0)) throw EstimatorError("klyshko: singles rate must be > 0");
  return r_cc / r_singles_other_arm;
}

double pair_extraction_efficiency(double eta_extr_xx, double eta_extr_x) {
  if (!in_unit(eta_extr_xx) || !in_unit(eta_extr_x)) {
    throw ValidationError("extraction efficiencies must be in [0,1]");
  }
  return eta_extr_xx * eta_extr_x;
}

}  // namespace qdent
