#include "agectl/estimation.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace agectl;

namespace {

// Midpoint-rule integral of the estimated-age function on a grid of width
// `step`. Event times in the randomized cases sit on grid lines, so no cell
// straddles a reset and the rule is exact up to rounding.
double brute_force_age_average(double start, double end, AgePoint seed,
                               const std::vector<AckEvent>& acks, double step) {
  const auto cells = static_cast<long>(std::llround((end - start) / step));
  double sum = 0.0;
  std::size_t next = 0;
  double reset_time = seed.time;
  double reset_age = seed.age;
  for (long i = 0; i < cells; ++i) {
    const double t = start + (static_cast<double>(i) + 0.5) * step;
    while (next < acks.size() && acks[next].ack_time <= t) {
      reset_time = acks[next].ack_time;
      reset_age = acks[next].rtt_sample;
      ++next;
    }
    sum += reset_age + (t - reset_time);
  }
  return sum * step / (end - start);
}

}  // namespace

TEST_CASE("ewma_update") {
  CHECK(ewma_update(0.3, 0.3, 0.875) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(ewma_update(0.1, 0.2, 0.875) == doctest::Approx(0.1125).epsilon(1e-12));
  CHECK(ewma_update(std::nullopt, 0.42, 0.875) == 0.42);
  CHECK_THROWS_AS(ewma_update(0.1, -0.01, 0.875), Error);
  CHECK_THROWS_AS(ewma_update(0.1, 0.1, 1.0), Error);
  CHECK_THROWS_AS(ewma_update(0.1, 0.1, 0.0), Error);

  double est = 5.0;
  for (int i = 0; i < 500; ++i) est = ewma_update(est, 0.25, 0.875);
  CHECK(std::abs(est - 0.25) < 1e-9);
}

TEST_CASE("ewma output lies between previous value and sample") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> v(0.0, 10.0), a(0.01, 0.99);
  for (int i = 0; i < 10000; ++i) {
    const double prev = v(rng), sample = v(rng);
    const double out = ewma_update(prev, sample, a(rng));
    CHECK(out >= std::min(prev, sample) - 1e-12);
    CHECK(out <= std::max(prev, sample) + 1e-12);
  }
}

TEST_CASE("record_ack maintains RTT and inter-ACK estimates") {
  EstimatorState est;
  est.record_ack(0.1, 0.0);
  CHECK(*est.rtt_bar() == doctest::Approx(0.1));
  CHECK_FALSE(est.z_bar().has_value());
  est.record_ack(0.2, 0.1);
  CHECK(*est.rtt_bar() == doctest::Approx(0.1));
  CHECK(*est.z_bar() == doctest::Approx(0.1));
  CHECK(*est.last_ack_time() == 0.2);

  EstimatorState bad;
  CHECK_THROWS_AS(bad.record_ack(0.05, 0.1), Error);
  try {
    bad.record_ack(0.05, 0.1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kClockAnomaly);
  }
}

TEST_CASE("epoch age average by hand") {
  EpochAccumulator acc(0.0, {0.0, 0.0}, 0);
  acc.add_ack(0.0, 0.1);
  acc.add_ack(0.5, 0.1);
  CHECK(acc.age_average(1.0) == doctest::Approx(0.35).epsilon(1e-12));

  const double r = 0.07, L = 2.5;
  EpochAccumulator one(3.0, {3.0, 9.0}, 0);
  one.add_ack(3.0, r);
  CHECK(one.age_average(3.0 + L) == doctest::Approx(r + L / 2).epsilon(1e-12));

  // Carried-in age when the first ACK comes later.
  EpochAccumulator carried(1.0, {0.8, 0.3}, 0);
  carried.add_ack(1.5, 0.1);
  // [1,1.5]: 0.5 -> 1.0 (avg 0.75); [1.5,2]: 0.1 -> 0.6 (avg 0.35)
  CHECK(carried.age_average(2.0) == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(carried.age_at(2.0).age == doctest::Approx(0.6));
}

TEST_CASE("epoch age average errors") {
  EpochAccumulator acc(0.0, {0.0, 0.0}, 0);
  CHECK_THROWS_AS(acc.age_average(1.0), Error);
  try {
    acc.age_average(1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoSamples);
  }
  acc.add_ack(0.2, 0.1);
  CHECK_THROWS_AS(acc.age_average(0.0), Error);
  CHECK_THROWS_AS(acc.add_ack(0.1, 0.1), Error);
}

TEST_CASE("shifting every RTT sample shifts the average by the same amount") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    EpochAccumulator a(0.0, {0.0, 0.0}, 0), b(0.0, {0.0, 0.0}, 0);
    const double c = u(rng);
    double t = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double rtt = 0.01 + u(rng) * 0.2;
      a.add_ack(t, rtt);
      b.add_ack(t, rtt + c);
      t += u(rng) * 0.1;
    }
    CHECK(b.age_average(t + 0.05) - a.age_average(t + 0.05) == doctest::Approx(c).epsilon(1e-9));
  }
}

TEST_CASE("sawtooth average matches brute-force integration") {
  const double step = 1e-5;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> gap_cells(1, 20000);
  std::uniform_int_distribution<int> rtt_cells(1, 30000);
  for (int trial = 0; trial < 200; ++trial) {
    const double start = 1e-5 * gap_cells(rng);
    const AgePoint seed{start - 0.02, 0.05};
    EpochAccumulator acc(start, seed, 0);
    std::vector<AckEvent> acks;
    long cell = std::lround(start / step) + gap_cells(rng) / 4;
    const int n = 1 + trial % 40;
    for (int i = 0; i < n; ++i) {
      const AckEvent ev{cell * step, rtt_cells(rng) * step};
      acc.add_ack(ev.ack_time, ev.rtt_sample);
      acks.push_back(ev);
      cell += gap_cells(rng) / 10;
    }
    const double end = cell * step;
    const double exact = acc.age_average(end);
    const double oracle = brute_force_age_average(start, end, seed, acks, step);
    CHECK(std::abs(exact - oracle) / oracle < 1e-6);
  }
}

TEST_CASE("epoch backlog average") {
  EpochAccumulator acc(0.0, {0.0, 0.0}, 1);
  acc.set_backlog(0.4, 2);
  CHECK(acc.backlog_average(1.0) == doctest::Approx(1.6).epsilon(1e-12));

  EpochAccumulator constant(2.0, {2.0, 0.0}, 3);
  CHECK(constant.backlog_average(5.0) == doctest::Approx(3.0));

  EpochAccumulator idle(0.0, {0.0, 0.0}, 0);
  CHECK(idle.backlog_average(1.0) == 0.0);

  // Splitting a segment into identical halves changes nothing.
  EpochAccumulator split(0.0, {0.0, 0.0}, 1);
  split.set_backlog(0.2, 1);
  split.set_backlog(0.4, 2);
  split.set_backlog(0.7, 2);
  CHECK(split.backlog_average(1.0) == doctest::Approx(1.6).epsilon(1e-12));

  CHECK_THROWS_AS(acc.set_backlog(0.1, 1), Error);
  CHECK_THROWS_AS(acc.set_backlog(0.9, -1), Error);
}
