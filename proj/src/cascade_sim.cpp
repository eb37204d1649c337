#include "qdent/cascade_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "qdent/error.hpp"
#include "qdent/parallel.hpp"
#include "qdent/units.hpp"

namespace qdent {

void BlinkingParams::validate() const {
  if (!(on_fraction > 0 && on_fraction <= 1)) {
    throw ValidationError("blinking.on_fraction must be in (0,1]");
  }
  if (!(t_corr > 0)) throw ValidationError("blinking.t_corr must be > 0");
}

void SourceParams::validate() const {
  qdot.validate();
  cavity.validate();
  excitation.validate();
  blinking.validate();
  // Throws if either line ends up with F < 1.
  (void)lifetimes();
}

void SimConfig::validate() const {
  source.validate();
  if (n_pulses == 0) throw ValidationError("run.n_pulses must be > 0");
  if (block_size == 0) throw ValidationError("run.block_size must be > 0");
}

TelegraphProcess::TelegraphProcess(const BlinkingParams& params, Rng& rng, double t0)
    : on_fraction_(params.on_fraction),
      t_corr_ps_(params.t_corr * units::kPsPerNs),
      last_t_(t0),
      on_(on_fraction_ >= 1.0 || rng.uniform() < on_fraction_) {}

bool TelegraphProcess::sample(double t, Rng& rng) {
  if (on_fraction_ >= 1.0) return on_ = true;
  const double decay = std::exp(-(t - last_t_) / t_corr_ps_);
  last_t_ = t;
  // P(on at t | state at last_t) for a two-state Markov chain.
  const double p_on = on_ ? on_fraction_ + (1.0 - on_fraction_) * decay
                          : on_fraction_ * (1.0 - decay);
  on_ = rng.uniform() < p_on;
  return on_;
}

std::pair<double, double> sample_cascade_times(double tau_xx, double tau_x, Rng& rng) {
  const double dt_xx = rng.exponential(tau_xx);
  const double dt_x = rng.exponential(tau_x);
  return {dt_xx, dt_x};
}

std::vector<EmissionEvent> simulate_block(const SimConfig& cfg, std::uint64_t block) {
  const SourceParams& src = cfg.source;
  const auto [tau_xx, tau_x] = src.lifetimes();
  const double period = src.excitation.rep_period();
  const double p_prep = rabi_preparation_probability(src.excitation);
  const double p_re = src.excitation.p_reexcite;

  const std::uint64_t first = block * cfg.block_size;
  const std::uint64_t last = std::min(cfg.n_pulses, first + cfg.block_size);

  Rng rng(cfg.seed, streams::kEmission, block);
  TelegraphProcess telegraph(src.blinking, rng, static_cast<double>(first) * period);

  std::vector<EmissionEvent> events;
  events.reserve(static_cast<std::size_t>(static_cast<double>(last - first) * p_prep * 1.05) + 16);

  auto emit = [&](std::uint64_t pulse, double pulse_time, bool re) {
    EmissionEvent ev;
    ev.pulse_index = pulse;
    ev.pulse_time = pulse_time;
    std::tie(ev.xx_delay, ev.x_delay) = sample_cascade_times(tau_xx, tau_x, rng);
    ev.reexcitation = re;
    if (!(ev.x_delay > 0.0)) throw std::logic_error("cascade causality violated");
    events.push_back(ev);
  };

  for (std::uint64_t k = first; k < last; ++k) {
    const double t = static_cast<double>(k) * period;
    const bool on = telegraph.sample(t, rng);
    // Fixed draw count per pulse keeps neighbouring pulses decoupled from
    // the outcome of this one.
    const double u_prep = rng.uniform();
    const double u_re = rng.uniform();
    if (!on || u_prep >= p_prep) continue;
    emit(k, t, false);
    if (u_re < p_re) emit(k, t, true);
  }
  return events;
}

std::vector<EmissionEvent> simulate_emissions(const SimConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::uint64_t n_blocks = cfg.block_count();
  std::vector<std::vector<EmissionEvent>> blocks(n_blocks);
  parallel_for(n_blocks, threads ? threads : default_thread_count(),
               [&](std::size_t b) { blocks[b] = simulate_block(cfg, b); });
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  std::vector<EmissionEvent> out;
  out.reserve(total);
  for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

double expected_pairs_per_pulse(const SourceParams& src) {
  return src.blinking.on_fraction * rabi_preparation_probability(src.excitation) *
         (1.0 + src.excitation.p_reexcite);
}

}  // namespace qdent
