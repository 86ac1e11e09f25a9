#include "agectl/netsim.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "agectl/error.hpp"
#include "doctest.h"

using namespace agectl;

namespace {

SimConfig fig1_config() {
  SimConfig cfg;
  cfg.protocol = "constant:1000";
  cfg.duration = 2.0;
  cfg.payload_bytes = 1000 - kUpdateHeaderSize - 28;  // 8000 bits on the wire
  Station st;
  st.rate_bps = 8e6;  // 1 ms per update
  cfg.stations = {st, st, st};
  cfg.record_trace = true;
  return cfg;
}

SimConfig contended_config(int sources, const std::string& protocol) {
  SimConfig cfg;
  cfg.sources = sources;
  cfg.protocol = protocol;
  cfg.duration = 20.0;
  cfg.start_spread = 1.0;
  MultiaccessHop hop;
  hop.prop_delay = 3e-4;
  cfg.multiaccess = hop;
  Station st;
  st.prop_delay = 3e-4;
  cfg.stations = {st, st};
  return cfg;
}

}  // namespace

TEST_CASE("three deterministic stations at matched rate pipeline one update each") {
  const auto cfg = fig1_config();
  const auto res = run_simulation(cfg);
  const auto& src = res.sources.front();
  REQUIRE(src.deliveries.size() > 1900);
  for (const auto& d : src.deliveries) CHECK(d.receive_time - d.gen_time == doctest::Approx(3e-3).epsilon(1e-9));
  CHECK(src.forward_occupancy_avg == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(src.dropped == 0);
}

TEST_CASE("uncontended access delay is the frame airtime") {
  SimConfig cfg = contended_config(1, "lazy");
  cfg.multiaccess->per_source_loss = 0.0;
  cfg.multiaccess->frame_overhead = 0.0;
  const auto res = run_simulation(cfg);
  const auto& src = res.sources.front();
  REQUIRE(src.access_samples > 100);
  CHECK(src.access_delay_avg == doctest::Approx(static_cast<double>(cfg.update_bits()) / 12e6).epsilon(1e-9));
  CHECK(src.collisions == 0);
}

TEST_CASE("identical config and seed reproduce the trace") {
  SimConfig cfg = contended_config(6, "acp+");
  cfg.duration = 5.0;
  cfg.record_trace = true;
  const auto a = run_simulation(cfg);
  const auto b = run_simulation(cfg);
  CHECK(a.trace == b.trace);
  CHECK(a.events == b.events);
  cfg.seed = 2;
  CHECK(run_simulation(cfg).trace != a.trace);
}

TEST_CASE("adding a source leaves the others' start times alone") {
  SimConfig cfg = contended_config(3, "lazy");
  cfg.duration = 2.0;
  cfg.record_trace = true;
  auto first_gen = [](const SimResult& r, int source) {
    for (const auto& t : r.trace)
      if (t.source == source && t.kind == TraceKind::kGenerated) return t.time;
    return -1.0;
  };
  const auto a = run_simulation(cfg);
  cfg.sources = 4;
  const auto b = run_simulation(cfg);
  for (int s = 0; s < 3; ++s) CHECK(first_gen(a, s) == first_gen(b, s));
}

TEST_CASE("packets are conserved and stations serve in arrival order") {
  SimConfig cfg = contended_config(12, "acp+");
  cfg.duration = 10.0;
  cfg.record_trace = true;
  cfg.multiaccess->buffer_capacity = 2;
  cfg.stations[0].service = ServiceKind::kExponential;
  cfg.stations[1].buffer_capacity = 3;
  const auto res = run_simulation(cfg);
  std::uint64_t dropped = 0;
  for (const auto& s : res.sources) {
    CHECK(s.generated == s.reached_monitor + s.dropped + s.in_flight_at_end);
    dropped += s.dropped;
  }
  CHECK(dropped > 0);

  // Per (hop, direction) queue: order of enqueue must equal order of service.
  using Key = std::tuple<int, int, std::uint32_t, bool>;
  std::map<std::pair<int, bool>, std::vector<Key>> enq, served;
  std::map<std::tuple<int, std::uint32_t>, std::vector<double>> life;
  for (const auto& t : res.trace) {
    const Key k{t.source, t.hop, t.seq, t.ack};
    if (t.hop >= 0 && t.hop < static_cast<int>(cfg.stations.size())) {
      if (t.kind == TraceKind::kEnqueued) enq[{t.hop, t.ack}].push_back(k);
      if (t.kind == TraceKind::kServiceStart) served[{t.hop, t.ack}].push_back(k);
    }
    if (!t.ack) life[{t.source, t.seq}].push_back(t.time);
  }
  REQUIRE(!served.empty());
  for (const auto& [q, order] : served) {
    const auto& arrivals = enq[q];
    REQUIRE(arrivals.size() >= order.size());
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i] == arrivals[i]);
  }
  for (const auto& [id, times] : life)
    for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i - 1] <= times[i]);
}

TEST_CASE("mean access delay does not fall as sources are added") {
  double prev = 0.0;
  for (int n : {1, 6, 12, 24, 48}) {
    const auto res = run_simulation(contended_config(n, "acp+"));
    double sum = 0.0;
    for (const auto& s : res.sources) sum += s.access_delay_avg;
    const double mean = sum / n;
    CHECK(mean >= prev);
    prev = mean;
  }
}

TEST_CASE("instantaneous reverse path returns ACKs at delivery time") {
  SimConfig cfg = fig1_config();
  cfg.protocol = "lazy";
  cfg.reverse = ReversePath::kInstantaneous;
  const auto res = run_simulation(cfg);
  const auto& src = res.sources.front();
  REQUIRE(src.log.acks.size() > 100);
  for (const auto& a : src.log.acks) CHECK(a.rtt == doctest::Approx(3e-3).epsilon(1e-9));
}

TEST_CASE("config validation") {
  SimConfig cfg = fig1_config();
  cfg.stations.clear();
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = fig1_config();
  cfg.duration = 0.0;
  CHECK_THROWS_AS(run_simulation(cfg), Error);
  cfg = fig1_config();
  cfg.stations[1].buffer_capacity = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = fig1_config();
  cfg.multiaccess = MultiaccessHop{};
  cfg.multiaccess->persistence = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = fig1_config();
  cfg.protocol = "tcp";
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("load curves") {
  Station mm1;
  mm1.service = ServiceKind::kExponential;
  mm1.rate_bps = 8e6;  // mu = 1000 pkt/s at 8000 bits

  SUBCASE("M/M/1 closed form") {
    const auto pts = rtt_vs_load_curve(mm1, 0.0, {500.0});
    CHECK(pts[0].mean_rtt == doctest::Approx(2e-3));
  }
  SUBCASE("M/M/1 simulation against the closed form") {
    const auto pts = rtt_vs_load_curve(mm1, 0.0, {500.0}, 8000, CurveMethod::kSimulated, 1'000'000, 3);
    CHECK(std::abs(pts[0].mean_rtt - 2e-3) / 2e-3 < 0.05);
  }
  SUBCASE("deterministic below capacity sees only the base RTT") {
    Station dd1;
    dd1.rate_bps = 8e6;
    for (auto method : {CurveMethod::kAnalytic, CurveMethod::kSimulated}) {
      const auto pts = rtt_vs_load_curve(dd1, 0.01, {500.0}, 8000, method, 10'000);
      CHECK(pts[0].mean_rtt == doctest::Approx(0.01).epsilon(1e-12));
    }
  }
  SUBCASE("deterministic overload saturates at the buffer") {
    Station dd1;
    dd1.rate_bps = 8e6;
    dd1.buffer_capacity = 5;
    const auto a = rtt_vs_load_curve(dd1, 0.01, {2000.0});
    CHECK(a[0].mean_rtt == doctest::Approx(0.01 + 4e-3));
    const auto s = rtt_vs_load_curve(dd1, 0.01, {2000.0}, 8000, CurveMethod::kSimulated, 100'000);
    CHECK(s[0].mean_rtt == doctest::Approx(0.01 + 4e-3).epsilon(1e-3));
  }
  SUBCASE("unbounded buffer at capacity is unstable") {
    const auto pts = rtt_vs_load_curve(mm1, 0.0, {1000.0, 1500.0});
    for (const auto& p : pts) {
      CHECK(p.unstable);
      CHECK(std::isinf(p.mean_rtt));
    }
  }
  SUBCASE("loads must be positive") { CHECK_THROWS_AS(rtt_vs_load_curve(mm1, 0.0, {0.0}), Error); }
}

TEST_CASE("single M/M/1 station: age is U-shaped in the update rate") {
  SimConfig cfg;
  cfg.duration = 200.0;
  cfg.payload_bytes = 1000 - kUpdateHeaderSize - 28;
  Station st;
  st.service = ServiceKind::kExponential;
  st.rate_bps = 8e6;
  cfg.stations = {st};
  const auto rates = utilization_grid(cfg, 0.1, 0.95, 18);
  CHECK(rates.front() == doctest::Approx(100.0));
  const auto sweep = sweep_min_age(cfg, rates, true);
  CHECK(sweep.points.front().age > sweep.best_age);
  CHECK(sweep.points.back().age > sweep.best_age);
  CHECK(sweep.best_rate > rates.front());
  CHECK(sweep.best_rate < rates.back());

  // Starvation: fewer updates, older information.
  const auto slow = sweep_min_age(cfg, {2.0, 20.0}, true);
  CHECK(slow.points[0].age > slow.points[1].age);
}
