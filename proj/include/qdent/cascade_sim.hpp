#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "qdent/random.hpp"
#include "qdent/source_model.hpp"

namespace qdent {

// Two-state telegraph blinking. t_corr is the correlation time of the
// process (ns): the on/off autocorrelation decays as exp(−Δt/t_corr).
struct BlinkingParams {
  double on_fraction = 0.84;
  double t_corr = 100.0;  // ns

  void validate() const;
  friend bool operator==(const BlinkingParams&, const BlinkingParams&) = default;
};

struct SourceParams {
  QDotParams qdot;
  CavityParams cavity;
  ExcitationParams excitation;
  BlinkingParams blinking;

  void validate() const;
  CascadeLifetimes lifetimes() const { return cascade_lifetimes(qdot, cavity); }
  friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

struct SimConfig {
  SourceParams source;
  std::uint64_t n_pulses = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t block_size = 65'536;

  void validate() const;
  std::uint64_t block_count() const { return (n_pulses + block_size - 1) / block_size; }
  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// One radiative cascade. Times are in ps; the absolute emission times are
// pulse_time + xx_delay and that plus x_delay. The polarization state of
// the pair is rho_at_delay(qd, x_delay).
struct EmissionEvent {
  std::uint64_t pulse_index = 0;
  double pulse_time = 0.0;
  double xx_delay = 0.0;
  double x_delay = 0.0;
  bool reexcitation = false;

  double t_xx() const { return pulse_time + xx_delay; }
  double t_x() const { return pulse_time + xx_delay + x_delay; }
};

// Exact discrete-time sampling of the telegraph process. Construction draws
// the state from the stationary distribution at time `t0`.
class TelegraphProcess {
 public:
  TelegraphProcess(const BlinkingParams& params, Rng& rng, double t0 = 0.0);

  // State at time t (ps, non-decreasing across calls).
  bool sample(double t, Rng& rng);
  bool on() const { return on_; }

 private:
  double on_fraction_;
  double t_corr_ps_;
  double last_t_;
  bool on_;
};

// Two independent exponential delays with means tau_xx and tau_x (ps).
std::pair<double, double> sample_cascade_times(double tau_xx, double tau_x, Rng& rng);

// Events of one pulse block, generated from the block's own substream.
std::vector<EmissionEvent> simulate_block(const SimConfig& cfg, std::uint64_t block);

// Whole run, blocks concatenated in order. Deterministic in (seed,
// block_size, config) for any thread count.
std::vector<EmissionEvent> simulate_emissions(const SimConfig& cfg, unsigned threads = 0);

// Expected pairs per pulse: on_fraction · p_prep · (1 + p_reexcite).
double expected_pairs_per_pulse(const SourceParams& src);

}  // namespace qdent
