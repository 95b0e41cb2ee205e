#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <sstream>

#include "pairchar/correlate.hpp"
#include "pairchar/errors.hpp"
#include "pairchar/source_sim.hpp"
#include "test_support.hpp"

using namespace pairchar;

namespace {

std::vector<TimeTag> random_channel(std::mt19937_64& rng, std::size_t n, std::uint64_t span, std::uint8_t ch) {
  std::vector<TimeTag> out(n);
  for (auto& t : out) t = {rng() % span, ch};
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Correlate, HandComputedHistogram) {
  PulseClock clock{100, 0};
  // A at pulses 0, 1, 5; B at pulses 0, 2, 3.
  std::vector<TimeTag> a = {{0, 0}, {101, 0}, {499, 0}};
  std::vector<TimeTag> b = {{10, 1}, {190, 1}, {305, 1}};
  const auto h = cross_correlate(a, b, clock, {3, std::nullopt}, 6);
  // Pairs (pa, pb): (0,0)0 (0,2)2 (0,3)3 (1,0)-1 (1,2)1 (1,3)2 (5,2)-3 (5,3)-2
  EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{1, 1, 1, 1, 1, 2, 1}));
  EXPECT_EQ(h.pulse_count, 6u);
  EXPECT_EQ(h.period_ps, 100u);
  EXPECT_EQ(h.total(), 8u);
}

TEST(Correlate, SlotWindowRestrictsPairs) {
  PulseClock clock{100, 0};
  std::vector<TimeTag> a = {{0, 0}};
  std::vector<TimeTag> b = {{5, 1}, {40, 1}, {110, 1}};
  const auto h = cross_correlate(a, b, clock, {2, 20}, 2);
  // dt - n*P: 5 (slot 0), 40 (slot 0, rejected), 10 (slot 1)
  EXPECT_EQ(h.at(0), 1u);
  EXPECT_EQ(h.at(1), 1u);
  EXPECT_EQ(h.total(), 2u);
}

TEST(Correlate, MatchesBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    PulseClock clock{1 + rng() % 2000, rng() % 5000};
    const std::uint64_t span = clock.origin_ps + clock.period_ps * (1 + rng() % 300);
    const auto a = random_channel(rng, rng() % 200, span, 0);
    const auto b = random_channel(rng, rng() % 200, span, 1);
    CorrelateOptions opts{static_cast<std::int64_t>(1 + rng() % 64), std::nullopt};
    if (rng() % 3 == 0) opts.slot_window_ps = rng() % (clock.period_ps + 1);
    const auto got = cross_correlate(a, b, clock, opts, 100);
    const auto want = testing_support::brute_force_histogram(a, b, clock, opts, 100);
    ASSERT_EQ(got, want) << "trial " << trial;
  }
}

TEST(Correlate, EqualTimestampsAcrossChannels) {
  PulseClock clock{10, 0};
  std::vector<TimeTag> a = {{50, 0}, {50, 0}};
  std::vector<TimeTag> b = {{50, 1}, {50, 1}, {50, 1}};
  const auto h = cross_correlate(a, b, clock, {1, std::nullopt}, 10);
  EXPECT_EQ(h.at(0), 6u);
}

TEST(Correlate, StreamAndCounterAgree) {
  auto c = SimConfig{};
  c.density = 12.0;
  c.pulse_count = 300000;
  c.seed = 5;
  const auto s = simulate(SourceParams::reference(), c);
  std::vector<TimeTag> a, b;
  split_channels(s.tags, a, b);
  const CorrelateOptions opts{20, std::nullopt};
  const auto direct = cross_correlate(a, b, s.header.clock, opts, c.pulse_count);
  EXPECT_EQ(correlate_stream(s, opts), direct);
  CoincidenceCounter counter(s.header.clock, opts);
  for (std::size_t i = 0; i < s.tags.size(); i += 1000) {
    counter.push(std::span(s.tags).subspan(i, std::min<std::size_t>(1000, s.tags.size() - i)));
  }
  EXPECT_EQ(counter.histogram(c.pulse_count), direct);
  EXPECT_EQ(counter.singles_a(), a.size());
  EXPECT_EQ(counter.singles_b(), b.size());
}

TEST(Correlate, RejectsBadInput) {
  PulseClock clock;
  std::vector<TimeTag> sorted = {{1, 0}, {2, 0}};
  std::vector<TimeTag> unsorted = {{2, 0}, {1, 0}};
  EXPECT_THROW(cross_correlate(unsorted, sorted, clock, {}, 1), OrderingError);
  EXPECT_THROW(cross_correlate(sorted, unsorted, clock, {}, 1), OrderingError);
  EXPECT_THROW(cross_correlate(sorted, sorted, clock, {0, std::nullopt}, 1), ParameterError);
  CoincidenceCounter counter(clock, {});
  counter.push({5, 0});
  EXPECT_THROW(counter.push({4, 1}), OrderingError);
}

TEST(Correlate, PartitionedEqualsWhole) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    PulseClock clock{1 + rng() % 1000, rng() % 3000};
    const std::uint64_t pulses = 1 + rng() % 500;
    const std::uint64_t span = clock.origin_ps + clock.period_ps * (pulses + 1);
    const auto a = random_channel(rng, rng() % 500, span, 0);
    const auto b = random_channel(rng, rng() % 500, span, 1);
    const CorrelateOptions opts{static_cast<std::int64_t>(1 + rng() % 40), std::nullopt};
    std::vector<std::int64_t> splits(rng() % 6);
    for (auto& s : splits) s = static_cast<std::int64_t>(rng() % (pulses + 1));
    std::sort(splits.begin(), splits.end());
    const auto whole = cross_correlate(a, b, clock, opts, pulses);
    ASSERT_EQ(correlate_partitioned(a, b, clock, opts, pulses, splits), whole) << "trial " << trial;
    ASSERT_EQ(correlate_partitioned(a, b, clock, opts, pulses, std::size_t{1 + rng() % 7}, 3), whole);
  }
}

TEST(HistogramMerge, SumsAndChecksShape) {
  auto x = CoincidenceHistogram::zeros(2, 100, 10);
  auto y = CoincidenceHistogram::zeros(2, 100, 5);
  x.at(0) = 3;
  y.at(0) = 4;
  y.at(-2) = 1;
  const auto m = histogram_merge(x, y);
  EXPECT_EQ(m.at(0), 7u);
  EXPECT_EQ(m.at(-2), 1u);
  EXPECT_EQ(m.pulse_count, 15u);
  EXPECT_THROW(histogram_merge(x, CoincidenceHistogram::zeros(3, 100)), ShapeError);
  EXPECT_THROW(histogram_merge(x, CoincidenceHistogram::zeros(2, 200)), ShapeError);
}

TEST(ExtractRates, HandValues) {
  auto h = CoincidenceHistogram::zeros(2, 12500, 1000);
  h.at(0) = 50;
  h.at(1) = 2;
  h.at(-1) = 4;
  h.at(2) = 3;
  h.at(-2) = 1;
  const auto r = extract_rates(h);
  EXPECT_EQ(r.off_slots, 4u);
  EXPECT_EQ(r.coinc_off_sum, 10u);
  EXPECT_EQ(r.coinc_zero, 50u);
  EXPECT_DOUBLE_EQ(r.c_r, 10.0 / 4000.0);
  EXPECT_DOUBLE_EQ(r.c_s, 0.05 - 0.0025);
  EXPECT_DOUBLE_EQ(*r.car, 19.0);
  EXPECT_NEAR(r.c_r_err, std::sqrt(10.0) / 4000.0, 1e-15);
  EXPECT_NEAR(*r.car_err, std::hypot(std::sqrt(50.0) * 4 / 10, 50.0 * 4 * std::sqrt(10.0) / 100), 1e-12);

  const auto g = extract_rates(h, 1);
  EXPECT_EQ(g.off_slots, 2u);
  EXPECT_EQ(g.coinc_off_sum, 4u);
}

TEST(ExtractRates, DegenerateCases) {
  auto h = CoincidenceHistogram::zeros(2, 12500, 0);
  EXPECT_THROW(extract_rates(h), DegenerateError);
  h.pulse_count = 10;
  EXPECT_THROW(extract_rates(h, 2), DegenerateError);
  EXPECT_THROW(extract_rates(h, -1), ParameterError);
  h.at(0) = 3;
  const auto r = extract_rates(h);
  EXPECT_FALSE(r.car.has_value());
  EXPECT_DOUBLE_EQ(r.c_r, 0.0);
  EXPECT_GT(r.c_r_err, 0.0);
}

// Reference parameters at 1.6 nJ/cm^2: CAR from the model is 12.557, and a
// simulation without jitter and dead time reproduces it.
TEST(ExtractRates, SimulatedCarNearModel) {
  SimConfig c;
  c.density = 1.6;
  c.pulse_count = 1000000000;
  c.seed = 31;
  c.jitter_sigma_ps = 0;
  c.dead_time_ps = 0;
  CoincidenceCounter counter(c.clock, {50, std::nullopt});
  simulate_to(SourceParams::reference(), c, [&](std::span<const TimeTag> b) { counter.push(b); });
  const auto r = extract_rates(counter.histogram(c.pulse_count));
  ASSERT_TRUE(r.car);
  EXPECT_LT(std::abs(*r.car - 12.5566) / *r.car_err, 3.0) << *r.car << " +- " << *r.car_err;
  EXPECT_LT(std::abs(r.c_r - 6.725376e-8) / r.c_r_err, 3.0);
}

TEST(HistogramTsv, Layout) {
  auto h = CoincidenceHistogram::zeros(1, 12500, 4);
  h.at(-1) = 2;
  std::ostringstream out;
  write_histogram_tsv(out, h);
  EXPECT_EQ(out.str(), "slot\tdelay_ps\tcount\n-1\t-12500\t2\n0\t0\t0\n1\t12500\t0\n");
}

#ifdef NDEBUG
TEST(CorrelatePerformance, AtLeastTwentyMillionTagsPerSecond) {
  std::mt19937_64 rng(1);
  // About 1e-3 tags per pulse per channel, the scale of the experiment.
  const std::uint64_t pulses = 2000000000;
  const auto a = random_channel(rng, 2000000, pulses * 12500, 0);
  const auto b = random_channel(rng, 2000000, pulses * 12500, 1);
  const auto start = std::chrono::steady_clock::now();
  const auto h = cross_correlate(a, b, PulseClock{}, {50, std::nullopt}, pulses);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_GT(h.total(), 0u);
  EXPECT_GT(4e6 / secs, 2e7);
}
#endif
