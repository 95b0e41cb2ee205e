#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "pairchar/correlate.hpp"
#include "pairchar/errors.hpp"
#include "pairchar/source_sim.hpp"

using namespace pairchar;

namespace {

SimConfig config(double density, std::uint64_t pulses, std::uint64_t seed = 1) {
  SimConfig c;
  c.density = density;
  c.pulse_count = pulses;
  c.seed = seed;
  return c;
}

// |observed - expected| in units of the Poisson standard deviation.
double poisson_z(std::uint64_t observed, double expected) {
  return (static_cast<double>(observed) - expected) / std::sqrt(std::max(expected, 1.0));
}

}  // namespace

TEST(SourceParams, ReferenceValues) {
  const auto p = SourceParams::reference();
  EXPECT_DOUBLE_EQ(p.alpha, 2.6e-3);
  EXPECT_DOUBLE_EQ(p.beta_a, 1.4e-3);
  EXPECT_DOUBLE_EQ(p.beta_b, 3.4e-3);
  EXPECT_DOUBLE_EQ(p.eta_sa, 0.025);
  EXPECT_DOUBLE_EQ(p.eta_sb, 0.025);
  EXPECT_DOUBLE_EQ(p.eta_x, 0.203);
  EXPECT_NO_THROW(p.validate());
}

TEST(SourceParams, ValidationRejectsBadValues) {
  auto p = SourceParams::reference();
  p.alpha = -1e-3;
  EXPECT_THROW(p.validate(), ParameterError);
  p = SourceParams::reference();
  p.beta_a = std::nan("");
  EXPECT_THROW(p.validate(), ParameterError);
  p = SourceParams::reference();
  p.eta_sa = 1.5;
  EXPECT_THROW(p.validate(), ParameterError);
  p = SourceParams::reference();
  p.eta_x = 50.0;  // joint 0.03125 > 0.025
  EXPECT_THROW(p.validate(), ParameterError);
  p = SourceParams{1, 1, 1, 0.9, 0.9, 0.5};  // joint 0.405 < 0.8
  EXPECT_THROW(p.validate(), ParameterError);
  p = SourceParams{0, 0, 0, 0, 0, 0};
  EXPECT_NO_THROW(p.validate());
}

TEST(SimConfig, Validation) {
  auto c = config(1.0, 10);
  EXPECT_NO_THROW(c.validate());
  c.density = -1;
  EXPECT_THROW(c.validate(), ParameterError);
  c = config(1.0, 10);
  c.clock.period_ps = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = config(1.0, 10);
  c.resolution_ps = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = config(1.0, std::uint64_t{1} << 62);
  EXPECT_THROW(c.validate(), RangeError);
}

// Frozen from tools/oracles/model_values.py.
TEST(PairOutcomes, ReferenceProbabilities) {
  const auto p = pair_outcome_probabilities(SourceParams::reference());
  EXPECT_NEAR(p.both, 1.26875e-4, 1e-15);
  EXPECT_NEAR(p.a_only, 0.024873125, 1e-15);
  EXPECT_NEAR(p.b_only, 0.024873125, 1e-15);
  EXPECT_NEAR(p.none, 0.950126875, 1e-12);
  EXPECT_NEAR(p.both + p.a_only, 0.025, 1e-15);
}

TEST(PairOutcomes, ExpectedSingles) {
  const auto p = SourceParams::reference();
  EXPECT_NEAR(expected_singles_a(p, 1.6), 2.224e-4, 1e-12);
  EXPECT_NEAR(expected_singles_b(p, 1.6), 3.024e-4, 1e-12);
}

TEST(DeadTime, FiltersPerChannel) {
  std::vector<TimeTag> tags = {{0, 0}, {5, 1}, {9, 0}, {10, 0}, {12, 1}, {15, 1}, {25, 0}};
  EXPECT_EQ(apply_dead_time(tags, 10), (std::vector<TimeTag>{{0, 0}, {5, 1}, {10, 0}, {15, 1}, {25, 0}}));
  EXPECT_EQ(apply_dead_time(tags, 0), tags);
  std::vector<TimeTag> unsorted = {{5, 0}, {4, 1}};
  EXPECT_THROW(apply_dead_time(unsorted, 1), OrderingError);
}

TEST(Simulate, StreamIsValid) {
  const auto s = simulate(SourceParams::reference(), config(16.0, 200000, 5));
  EXPECT_TRUE(validate_stream(s.header, s.tags).empty());
  EXPECT_EQ(s.header.pulse_count, 200000u);
  EXPECT_GT(s.tags.size(), 1000u);
  for (const auto& t : s.tags) ASSERT_EQ(t.timestamp_ps % 165, 0u);
}

TEST(Simulate, DeadTimeHolds) {
  auto c = config(16.0, 300000, 9);
  c.dead_time_ps = 40000;
  const auto s = simulate(SourceParams::reference(), c);
  std::array<std::optional<std::uint64_t>, 2> last;
  for (const auto& t : s.tags) {
    if (last[t.channel]) ASSERT_GE(t.timestamp_ps - *last[t.channel], 40000u);
    last[t.channel] = t.timestamp_ps;
  }
}

TEST(Simulate, ZeroDensityGivesNoTags) {
  EXPECT_TRUE(simulate(SourceParams::reference(), config(0.0, 1000000)).tags.empty());
}

TEST(Simulate, ZeroJitterLandsOnPulseTimes) {
  for (std::uint64_t res : {1u, 125u}) {
    auto c = config(8.0, 100000, 3);
    c.jitter_sigma_ps = 0;
    c.resolution_ps = res;
    const auto s = simulate(SourceParams::reference(), c);
    ASSERT_FALSE(s.tags.empty());
    for (const auto& t : s.tags) ASSERT_EQ(t.timestamp_ps % 12500, 0u);
  }
}

TEST(Simulate, DeterministicAcrossThreadCounts) {
  auto c = config(10.0, (std::uint64_t{1} << 22) * 3 + 12345, 77);
  const auto one = simulate(SourceParams::reference(), c, 1);
  const auto four = simulate(SourceParams::reference(), c, 4);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, simulate(SourceParams::reference(), c, 1));
  EXPECT_TRUE(validate_stream(one.header, one.tags).empty());
}

TEST(Simulate, SeedsGiveDifferentStreams) {
  const auto a = simulate(SourceParams::reference(), config(10.0, 100000, 1));
  const auto b = simulate(SourceParams::reference(), config(10.0, 100000, 2));
  EXPECT_NE(a.tags, b.tags);
  EXPECT_NE(stream_seed(7, 0), stream_seed(7, 1));
  EXPECT_NE(stream_seed(7, 0), stream_seed(8, 0));
}

TEST(Simulate, SinglesMeansMatchModel) {
  auto c = config(4.0, 2000000, 21);
  c.dead_time_ps = 0;
  const auto p = SourceParams::reference();
  const auto s = simulate(p, c);
  std::uint64_t a = 0, b = 0;
  for (const auto& t : s.tags) (t.channel == 0 ? a : b) += 1;
  EXPECT_LT(std::abs(poisson_z(a, expected_singles_a(p, 4.0) * 2e6)), 4.0);
  EXPECT_LT(std::abs(poisson_z(b, expected_singles_b(p, 4.0) * 2e6)), 4.0);
}

// With eta_x at its maximum and no background, every pair in slot 0 is a
// true coincidence and the off-slot counts come only from pair crosstalk.
TEST(Simulate, CoincidenceMeansMatchModel) {
  SourceParams p{0.01, 0.0, 0.0, 0.5, 0.5, 1.0};
  auto c = config(2.0, 1000000, 4);
  c.dead_time_ps = 0;
  const auto s = simulate(p, c);
  const auto h = correlate_stream(s, CorrelateOptions{10, std::nullopt});
  const double mu = p.alpha * 4.0;
  // Slot 0: both detected from one pair (mu * 0.25) plus two pairs in the
  // same pulse split across channels (mu^2 * 0.25).
  EXPECT_LT(std::abs(poisson_z(h.at(0), 1e6 * (mu * 0.25 + mu * mu * 0.25))), 4.0);
  EXPECT_LT(std::abs(poisson_z(h.at(3), 1e6 * mu * mu * 0.25)), 4.0);
}

TEST(StreamSeed, Distinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(stream_seed(123, i));
  EXPECT_EQ(seen.size(), 1000u);
}

#ifdef NDEBUG
TEST(SimulatePerformance, AtLeastTenMillionPulsesPerSecond) {
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t n = 0;
  simulate_to(SourceParams::reference(), config(1.6, 200000000, 3),
              [&](std::span<const TimeTag> b) { n += b.size(); });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GT(n, 0u);
  EXPECT_GT(2e8 / secs, 1e7);
}
#endif
