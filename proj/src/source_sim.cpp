#include "pairchar/source_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <optional>
#include <random>
#include <string>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "pairchar/errors.hpp"

namespace pairchar {
namespace {

constexpr std::uint64_t kBlockPulses = std::uint64_t{1} << 22;
// Jitter draws beyond this many sigma are redrawn. Bounding the jitter makes
// the block-boundary reordering below exact.
constexpr double kJitterClipSigmas = 8.0;

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

/// Detected-event rates per pulse, split by origin and outcome.
struct EventRates {
  double both = 0.0;
  double a_only = 0.0;
  double b_only = 0.0;
  double bg_a = 0.0;
  double bg_b = 0.0;

  double total() const { return both + a_only + b_only + bg_a + bg_b; }
};

EventRates event_rates(const SourceParams& p, double density) {
  const auto outcome = pair_outcome_probabilities(p);
  const double pairs = p.alpha * density * density;
  EventRates r;
  r.both = pairs * outcome.both;
  r.a_only = pairs * outcome.a_only;
  r.b_only = pairs * outcome.b_only;
  r.bg_a = p.beta_a * density * p.eta_sa;
  r.bg_b = p.beta_b * density * p.eta_sb;
  return r;
}

class DeadTimeFilter {
 public:
  explicit DeadTimeFilter(std::uint64_t dead_ps) : dead_(dead_ps) {}

  bool keep(const TimeTag& tag) {
    auto& last = last_kept_[tag.channel & 1u];
    if (last && tag.timestamp_ps - *last < dead_) return false;
    last = tag.timestamp_ps;
    return true;
  }

 private:
  std::uint64_t dead_;
  std::array<std::optional<std::uint64_t>, 2> last_kept_;
};

class BlockGenerator {
 public:
  BlockGenerator(const SourceParams& params, const SimConfig& cfg)
      : cfg_(cfg), rates_(event_rates(params, cfg.density)) {
    const auto bound = make_header(cfg).timestamp_bound().value();
    max_timestamp_ = ((bound - 1) / cfg.resolution_ps) * cfg.resolution_ps;
  }

  std::uint64_t block_count() const {
    return (cfg_.pulse_count + kBlockPulses - 1) / kBlockPulses;
  }

  /// Detected tags of pulses [block * kBlockPulses, ...), sorted.
  std::vector<TimeTag> generate(std::uint64_t block) const {
    std::vector<TimeTag> out;
    const double total = rates_.total();
    if (total <= 0.0) return out;

    const std::uint64_t first = block * kBlockPulses;
    const std::uint64_t count = std::min(kBlockPulses, cfg_.pulse_count - first);

    std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    std::mt19937_64 engine(seq);
    boost::random::exponential_distribution<double> gap(total);
    boost::random::uniform_01<double> unit;
    boost::random::normal_distribution<double> jitter(0.0, cfg_.jitter_sigma_ps);

    out.reserve(static_cast<std::size_t>(1.2 * total * static_cast<double>(count)) + 16);

    // Detected events form a Poisson process of rate `total` per pulse; each
    // event is marked with its origin independently. This has the same law
    // as per-pulse Poisson draws followed by thinning, without visiting
    // empty pulses.
    double position = 0.0;
    const double span = static_cast<double>(count);
    for (;;) {
      position += gap(engine);
      if (position >= span) break;
      const std::uint64_t pulse = first + static_cast<std::uint64_t>(position);
      double mark = unit(engine) * total;
      auto emit = [&](std::uint8_t channel) {
        out.push_back({stamp(pulse, engine, jitter), channel});
      };
      if ((mark -= rates_.both) < 0.0) {
        emit(kChannelA);
        emit(kChannelB);
      } else if ((mark -= rates_.a_only) < 0.0) {
        emit(kChannelA);
      } else if ((mark -= rates_.b_only) < 0.0) {
        emit(kChannelB);
      } else if ((mark -= rates_.bg_a) < 0.0) {
        emit(kChannelA);
      } else {
        emit(kChannelB);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Tags of later blocks can only land at or after this time.
  std::int64_t release_limit(std::uint64_t next_block) const {
    const auto t = cfg_.clock.pulse_time(static_cast<std::int64_t>(next_block * kBlockPulses));
    const double margin = std::ceil(kJitterClipSigmas * cfg_.jitter_sigma_ps) +
                          static_cast<double>(cfg_.resolution_ps);
    return static_cast<std::int64_t>(static_cast<double>(*t) - margin);
  }

 private:
  std::uint64_t stamp(std::uint64_t pulse, std::mt19937_64& engine,
                      boost::random::normal_distribution<double>& jitter) const {
    const std::uint64_t base = cfg_.clock.origin_ps + pulse * cfg_.clock.period_ps;
    double offset = 0.0;
    if (cfg_.jitter_sigma_ps > 0.0) {
      const double clip = kJitterClipSigmas * cfg_.jitter_sigma_ps;
      do {
        offset = jitter(engine);
      } while (std::abs(offset) > clip);
    }
    const std::uint64_t res = cfg_.resolution_ps;
    const std::uint64_t rem = base % res;
    const auto steps = std::llround((static_cast<double>(rem) + offset) / static_cast<double>(res));
    const __int128 q = static_cast<__int128>(base - rem) + static_cast<__int128>(steps) * res;
    if (q < 0) return 0;
    if (q > static_cast<__int128>(max_timestamp_)) return max_timestamp_;
    return static_cast<std::uint64_t>(q);
  }

  SimConfig cfg_;
  EventRates rates_;
  std::uint64_t max_timestamp_ = 0;
};

}  // namespace

SourceParams SourceParams::reference() noexcept {
  return SourceParams{2.6e-3, 1.4e-3, 3.4e-3, 0.025, 0.025, 0.203};
}

void SourceParams::validate() const {
  const std::array<std::pair<const char*, double>, 6> fields = {{{"alpha", alpha},
                                                                  {"beta_a", beta_a},
                                                                  {"beta_b", beta_b},
                                                                  {"eta_sa", eta_sa},
                                                                  {"eta_sb", eta_sb},
                                                                  {"eta_x", eta_x}}};
  for (const auto& [name, value] : fields) {
    if (!finite_nonneg(value)) {
      throw ParameterError(std::string(name) + " must be finite and >= 0");
    }
  }
  if (eta_sa > 1.0 || eta_sb > 1.0) throw ParameterError("singles efficiencies must be <= 1");
  const double joint = eta_x * eta_sa * eta_sb;
  if (joint > std::min(eta_sa, eta_sb)) {
    throw ParameterError("joint detection probability eta_x*eta_sa*eta_sb exceeds a singles efficiency");
  }
  // Otherwise P(neither detector fires) would be negative.
  if (joint < eta_sa + eta_sb - 1.0 - 1e-15) {
    throw ParameterError("joint detection probability below eta_sa + eta_sb - 1");
  }
}

void SimConfig::validate() const {
  if (!finite_nonneg(density)) throw ParameterError("density must be finite and >= 0");
  if (!finite_nonneg(jitter_sigma_ps)) throw ParameterError("jitter_sigma must be finite and >= 0");
  if (clock.period_ps == 0) throw ParameterError("pulse period must be > 0");
  if (resolution_ps == 0) throw ParameterError("resolution must be > 0");
  if (!make_header(*this).timestamp_bound()) {
    throw RangeError("pulse_count * period overflows 64-bit picoseconds");
  }
}

PairOutcomeProbabilities pair_outcome_probabilities(const SourceParams& params) {
  params.validate();
  PairOutcomeProbabilities p;
  p.both = params.eta_x * params.eta_sa * params.eta_sb;
  p.a_only = params.eta_sa - p.both;
  p.b_only = params.eta_sb - p.both;
  p.none = std::max(0.0, 1.0 - p.a_only - p.b_only - p.both);
  return p;
}

double expected_singles_a(const SourceParams& p, double density) noexcept {
  return p.eta_sa * (p.alpha * density * density + p.beta_a * density);
}

double expected_singles_b(const SourceParams& p, double density) noexcept {
  return p.eta_sb * (p.alpha * density * density + p.beta_b * density);
}

std::vector<TimeTag> apply_dead_time(std::span<const TimeTag> tags, std::uint64_t dead_time_ps) {
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (tags[i].timestamp_ps < tags[i - 1].timestamp_ps) {
      throw OrderingError("apply_dead_time: input unsorted at index " + std::to_string(i));
    }
  }
  DeadTimeFilter filter(dead_time_ps);
  std::vector<TimeTag> out;
  out.reserve(tags.size());
  for (const auto& t : tags) {
    if (filter.keep(t)) out.push_back(t);
  }
  return out;
}

TagStreamHeader make_header(const SimConfig& config) {
  TagStreamHeader h;
  h.clock = config.clock;
  h.pulse_count = config.pulse_count;
  h.resolution_ps = config.resolution_ps;
  return h;
}

void simulate_to(const SourceParams& params, const SimConfig& config, const TagSink& sink,
                 unsigned threads) {
  params.validate();
  config.validate();
  const BlockGenerator gen(params, config);
  const std::uint64_t blocks = gen.block_count();
  threads = std::max(1u, threads);

  DeadTimeFilter filter(config.dead_time_ps);
  std::vector<TimeTag> carry;
  std::vector<TimeTag> merged;
  std::vector<TimeTag> kept;

  auto consume = [&](std::vector<TimeTag> raw, std::uint64_t block) {
    merged.clear();
    merged.reserve(carry.size() + raw.size());
    std::merge(carry.begin(), carry.end(), raw.begin(), raw.end(), std::back_inserter(merged));

    auto split = merged.end();
    if (block + 1 < blocks) {
      const std::int64_t limit = gen.release_limit(block + 1);
      split = std::partition_point(merged.begin(), merged.end(), [&](const TimeTag& t) {
        return static_cast<std::int64_t>(t.timestamp_ps) < limit;
      });
    }
    kept.clear();
    for (auto it = merged.begin(); it != split; ++it) {
      if (filter.keep(*it)) kept.push_back(*it);
    }
    carry.assign(split, merged.end());
    if (!kept.empty()) sink(kept);
  };

  for (std::uint64_t start = 0; start < blocks; start += threads) {
    const std::uint64_t stop = std::min<std::uint64_t>(blocks, start + threads);
    if (threads == 1) {
      consume(gen.generate(start), start);
      continue;
    }
    std::vector<std::future<std::vector<TimeTag>>> pending;
    for (std::uint64_t b = start; b < stop; ++b) {
      pending.push_back(std::async(std::launch::async, [&gen, b] { return gen.generate(b); }));
    }
    for (std::uint64_t b = start; b < stop; ++b) consume(pending[b - start].get(), b);
  }
}

TagStream simulate(const SourceParams& params, const SimConfig& config, unsigned threads) {
  TagStream out{make_header(config), {}};
  simulate_to(
      params, config,
      [&](std::span<const TimeTag> batch) { out.tags.insert(out.tags.end(), batch.begin(), batch.end()); },
      threads);
  return out;
}

std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t stream_index) noexcept {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base_seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace pairchar
