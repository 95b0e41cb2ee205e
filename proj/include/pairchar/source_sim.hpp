#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pairchar/tag_model.hpp"

namespace pairchar {

/// Pair-source model. Pairs per pulse have mean alpha * I^2 and background
/// photons per pulse on each path have mean beta * I, where I is the
/// excitation density in nJ/cm^2.
struct SourceParams {
  double alpha = 0.0;   // pairs / pulse / (nJ/cm^2)^2
  double beta_a = 0.0;  // photons / pulse / (nJ/cm^2)
  double beta_b = 0.0;
  double eta_sa = 0.0;  // singles detection efficiency, path A
  double eta_sb = 0.0;
  double eta_x = 0.0;   // joint pair-detection factor

  /// Biexciton-resonance CuCl source: alpha = 2.6e-3, beta_A = 1.4e-3,
  /// beta_B = 3.4e-3, eta_S = 2.5 %, eta_X = 20.3 %.
  static SourceParams reference() noexcept;

  /// Throws ParameterError when a field is negative or non-finite, an
  /// efficiency exceeds 1, or the joint detection probability exceeds a
  /// singles efficiency.
  void validate() const;

  friend bool operator==(const SourceParams&, const SourceParams&) = default;
};

struct SimConfig {
  double density = 0.0;  // nJ/cm^2
  std::uint64_t pulse_count = 0;
  PulseClock clock;
  double jitter_sigma_ps = 100.0;
  std::uint64_t resolution_ps = 165;
  std::uint64_t dead_time_ps = 10000;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Per-pair detection outcome. Matches both the singles efficiencies and the
/// joint factor: P(both) = eta_x * eta_sa * eta_sb.
struct PairOutcomeProbabilities {
  double both = 0.0;
  double a_only = 0.0;
  double b_only = 0.0;
  double none = 0.0;
};

PairOutcomeProbabilities pair_outcome_probabilities(const SourceParams& params);

/// Mean detected tags per pulse on each channel before dead time.
double expected_singles_a(const SourceParams& params, double density) noexcept;
double expected_singles_b(const SourceParams& params, double density) noexcept;

/// Keeps a tag iff it is at least dead_time_ps after the previously kept tag
/// on the same channel. Channels are filtered independently. Throws
/// OrderingError on unsorted input.
std::vector<TimeTag> apply_dead_time(std::span<const TimeTag> tags, std::uint64_t dead_time_ps);

TagStreamHeader make_header(const SimConfig& config);

/// Consumer of simulator output. Each call receives a time-ordered batch that
/// continues the previous one.
using TagSink = std::function<void(std::span<const TimeTag>)>;

/// Streams the simulated acquisition to sink in time order. Memory use scales
/// with the block size, not with pulse_count. Pulses are simulated in fixed
/// blocks with independently seeded generators, so the output depends only
/// on (params, config), never on `threads`.
void simulate_to(const SourceParams& params, const SimConfig& config, const TagSink& sink,
                 unsigned threads = 1);

TagStream simulate(const SourceParams& params, const SimConfig& config, unsigned threads = 1);

/// Seed for an independent sub-stream (per block, per sweep point).
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t stream_index) noexcept;

}  // namespace pairchar
