/*
 * Copyright (c) 2026 The agectl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at:
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Deterministic discrete-event simulation of status-update sessions over a
// path made of an optional shared multiaccess first hop followed by FCFS
// stations in tandem. ACKs return through the same hops in reverse (each
// station is full duplex; the access point contends for the shared channel)
// unless the reverse path is declared instantaneous.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agectl/endpoints.hpp"
#include "agectl/metrics.hpp"

namespace agectl {

enum class ServiceKind { kDeterministic, kExponential };

struct Station {
  ServiceKind service = ServiceKind::kDeterministic;
  double rate_bps = 6e6;  // mean rate for kExponential
  std::optional<std::size_t> buffer_capacity;  // packets, including the one in service
  double prop_delay = 0.0;                     // to the next hop, seconds

  double mean_service_time(std::size_t bits) const { return static_cast<double>(bits) / rate_bps; }
};

// Slotted p-persistent contention with binary exponential backoff: in every
// idle slot a backlogged node at backoff stage s transmits with probability
// persistence * 2^-s. A frame reaching an idle, uncontended channel goes out
// at once. Collisions and losses both count as failed attempts.
struct MultiaccessHop {
  double link_rate_bps = 12e6;
  double slot = 9e-6;
  double persistence = 0.125;
  int max_backoff_exp = 6;
  int retry_limit = 7;
  double per_source_loss = 0.05;  // per-attempt loss on the source-AP link
  double frame_overhead = 130e-6;  // fixed per-transmission airtime, seconds
  double prop_delay = 0.0;
  std::optional<std::size_t> buffer_capacity;  // per-node MAC queue
};

enum class ReversePath { kSymmetric, kInstantaneous };

struct SimConfig {
  int sources = 1;
  std::string protocol = "acp+";  // see SourceConfig::parse_mode
  std::optional<MultiaccessHop> multiaccess;
  std::vector<Station> stations;
  double duration = 30.0;
  std::uint64_t seed = 1;
  ReversePath reverse = ReversePath::kSymmetric;
  std::size_t payload_bytes = kDefaultPayloadBytes;
  std::size_t lower_layer_bytes = 28;  // UDP + IPv4 headers added on every hop
  double alpha = kDefaultEwmaAlpha;
  double initial_rtt = 1.0;
  double lazy_timeout_factor = 2.0;
  double lazy_min_timeout = 0.2;
  double start_spread = 0.0;  // sources start uniformly in [0, start_spread]
  double warmup_fraction = 0.1;
  bool record_trace = false;

  // Throws kConfig describing the first invalid field.
  void validate() const;
  std::size_t update_bits() const { return 8 * (kUpdateHeaderSize + payload_bytes + lower_layer_bytes); }
  std::size_t ack_bits() const { return 8 * (kAckSize + lower_layer_bytes); }
};

enum class TraceKind { kGenerated, kEnqueued, kDropped, kServiceStart, kDelivered, kAckDelivered };

const char* to_string(TraceKind k) noexcept;

// hop: -1 for the multiaccess hop, station index otherwise, stations.size()
// for the endpoint (monitor for updates, source for ACKs).
struct TraceRecord {
  double time = 0;
  int source = 0;
  TraceKind kind = TraceKind::kGenerated;
  std::uint32_t seq = 0;
  int hop = 0;
  bool ack = false;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline constexpr const char* kTraceCsvHeader = "time,source,kind,seq,hop,ack";

struct SourceRunResult {
  int id = 0;
  SourceSessionLog log;
  std::vector<Delivery> deliveries;
  SourceCounters counters;
  std::uint64_t generated = 0;
  std::uint64_t reached_monitor = 0;  // includes updates the monitor discarded
  std::uint64_t dropped = 0;
  std::uint64_t in_flight_at_end = 0;
  double forward_occupancy_avg = 0;  // updates between generation and monitor, over the horizon
  double access_delay_avg = 0;       // multiaccess queueing + contention + airtime
  std::uint64_t access_samples = 0;
  std::uint64_t collisions = 0;
};

struct SimResult {
  std::vector<SourceRunResult> sources;
  std::vector<TraceRecord> trace;  // empty unless record_trace
  Horizon horizon;
  std::uint64_t events = 0;
};

SimResult run_simulation(const SimConfig& cfg);

// ---------------------------------------------------------------------------
// Single-station load curves.

enum class ArrivalProcess { kPeriodic, kPoisson };

struct StationDelayStats {
  double mean_sojourn = 0;  // waiting + service
  double mean_occupancy = 0;
  double drop_fraction = 0;
  std::uint64_t packets = 0;
};

// FCFS single-server simulation driven by `packets` arrivals.
StationDelayStats simulate_station(const Station& station, std::size_t packet_bits,
                                   double arrival_rate, ArrivalProcess arrivals,
                                   std::uint64_t packets, std::uint64_t seed);

struct LoadPoint {
  double load = 0;  // packets per second
  double mean_rtt = 0;
  bool unstable = false;
};

enum class CurveMethod { kAnalytic, kSimulated };

// Mean RTT against offered load for one bottleneck. Deterministic service
// time counts as part of rtt_base, so a sub-capacity deterministic queue
// reports rtt_base exactly; exponential service adds the full M/M/1 sojourn
// 1/(mu - lambda). Loads at or above capacity with an unbounded buffer are
// flagged unstable with an infinite RTT.
std::vector<LoadPoint> rtt_vs_load_curve(const Station& station, double rtt_base,
                                         const std::vector<double>& loads,
                                         std::size_t packet_bits = 8000,
                                         CurveMethod method = CurveMethod::kAnalytic,
                                         std::uint64_t packets = 1'000'000,
                                         std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Age-optimal constant rate over a tandem path.

struct SweepPoint {
  double rate = 0;
  double age = 0;
  double backlog = 0;
};

struct SweepResult {
  double best_rate = 0;
  double best_age = 0;
  double backlog_at_best = 0;
  std::vector<SweepPoint> points;
};

// Runs one single-source simulation of `base` per rate (protocol replaced by
// a constant-rate source; poisson arrivals when `poisson`) with an
// instantaneous reverse path, and picks the rate minimizing one-way age.
SweepResult sweep_min_age(const SimConfig& base, const std::vector<double>& rates, bool poisson);

// n evenly spaced utilizations in [lo, hi] of the slowest station's capacity.
std::vector<double> utilization_grid(const SimConfig& base, double lo, double hi, int n);

}  // namespace agectl
