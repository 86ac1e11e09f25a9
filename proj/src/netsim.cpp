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

#include "agectl/netsim.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <random>

#include <fmt/format.h>

#include "agectl/error.hpp"

namespace agectl {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Independent stream per simulated entity: adding a source or a station
// leaves every other entity's random sequence untouched.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  splitmix64(state);
  state ^= stream * 0xD1B54A32D192ED03ULL;
  return splitmix64(state);
}

constexpr std::uint64_t kSourceStream = 0x100000;
constexpr std::uint64_t kStationStream = 0x200000;
constexpr std::uint64_t kMacStream = 0x300000;

class Rng {
 public:
  Rng() : eng_(1) {}
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }
  bool bernoulli(double p) { return p > 0.0 && uniform() < p; }
  // Trials up to and including the first success.
  std::uint64_t geometric(double q) {
    if (q >= 1.0) return 1;
    const double k = std::floor(std::log1p(-uniform()) / std::log1p(-q));
    return 1 + static_cast<std::uint64_t>(std::min(k, 1e15));
  }

 private:
  std::mt19937_64 eng_;
};

struct Packet {
  int source = 0;
  std::uint32_t seq = 0;
  std::uint64_t gen_ts_ns = 0;
  bool ack = false;
  std::size_t bits = 0;
  double hop_arrival = 0;
};

enum class EventType {
  kSourceStart,
  kSourceTimer,
  kStationArrive,
  kStationDone,
  kMacArrive,
  kMacAttempt,
  kMacTxEnd,
  kMonitorArrive,
  kAckArrive,
};

struct Event {
  double time = 0;
  std::uint64_t order = 0;
  EventType type = EventType::kSourceStart;
  int index = 0;  // source, station or MAC node
  int dir = 0;    // 0 forward, 1 reverse
  std::uint64_t token = 0;
  Packet pkt;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return a.time > b.time || (a.time == b.time && a.order > b.order);
  }
};

struct StationQueue {
  std::deque<Packet> queue;
  bool busy = false;
  Rng rng;
};

struct MacNode {
  std::deque<Packet> queue;
  int stage = 0;
  int retries = 0;
  Rng rng;
};

struct SourceSlot {
  std::unique_ptr<Source> source;
  Monitor monitor;
  double scheduled = kNever;
  std::uint64_t token = 0;
  SourceRunResult result;
  int fwd_count = 0;
  double fwd_since = 0;
  double fwd_area = 0;
  double access_sum = 0;
};

class Engine {
 public:
  explicit Engine(const SimConfig& cfg) : cfg_(cfg) {
    cfg.validate();
    horizon_ = trimmed_horizon(0.0, cfg.duration, cfg.warmup_fraction);
    const int n = cfg.sources;
    slots_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      SourceConfig sc = SourceConfig::parse_mode(cfg.protocol);
      sc.payload_bytes = cfg.payload_bytes;
      sc.alpha = cfg.alpha;
      sc.initial_rtt = cfg.initial_rtt;
      sc.lazy_timeout_factor = cfg.lazy_timeout_factor;
      sc.lazy_min_timeout = cfg.lazy_min_timeout;
      sc.seed = stream_seed(cfg.seed, kSourceStream + 2 * static_cast<std::uint64_t>(i));
      sc.materialize_payload = false;
      auto& slot = slots_[static_cast<std::size_t>(i)];
      slot.source = std::make_unique<Source>(sc);
      slot.result.id = i;
      slot.result.log.protocol = sc.mode_label();
      slot.result.log.payload_bytes = cfg.payload_bytes;
      Rng start_rng(stream_seed(cfg.seed, kSourceStream + 2 * static_cast<std::uint64_t>(i) + 1));
      const double start = cfg.start_spread > 0 ? cfg.start_spread * start_rng.uniform() : 0.0;
      Event ev;
      ev.time = start;
      ev.type = EventType::kSourceStart;
      ev.index = i;
      push(ev);
    }
    for (std::size_t s = 0; s < cfg.stations.size(); ++s) {
      stations_.push_back({});
      for (std::uint64_t d = 0; d < 2; ++d) {
        stations_.back()[d].rng = Rng(stream_seed(cfg.seed, kStationStream + 2 * s + d));
      }
    }
    if (cfg.multiaccess) {
      mac_.resize(static_cast<std::size_t>(n) + 1);
      for (std::size_t i = 0; i < mac_.size(); ++i)
        mac_[i].rng = Rng(stream_seed(cfg.seed, kMacStream + i));
    }
  }

  SimResult run() {
    while (!events_.empty() && events_.top().time <= cfg_.duration) {
      Event ev = events_.top();
      events_.pop();
      now_ = ev.time;
      ++processed_;
      dispatch(ev);
    }
    now_ = cfg_.duration;
    SimResult out;
    out.horizon = horizon_;
    out.events = processed_;
    out.trace = std::move(trace_);
    for (auto& slot : slots_) {
      fwd_change(slot, 0);
      auto& r = slot.result;
      const Source& src = *slot.source;
      r.log.sent = src.counters().sent;
      r.log.acks = src.ack_log();
      r.log.backlog = src.backlog_trace();
      r.log.epochs = src.epoch_log();
      r.deliveries = slot.monitor.delivery_log();
      r.counters = src.counters();
      r.in_flight_at_end = static_cast<std::uint64_t>(slot.fwd_count);
      r.forward_occupancy_avg = slot.fwd_area / horizon_.length();
      if (r.access_samples > 0) r.access_delay_avg = slot.access_sum / static_cast<double>(r.access_samples);
      out.sources.push_back(std::move(r));
    }
    return out;
  }

 private:
  void push(Event ev) {
    ev.order = next_order_++;
    events_.push(std::move(ev));
  }

  void schedule_packet(EventType type, double at, int index, int dir, const Packet& pkt) {
    Event ev;
    ev.time = at;
    ev.type = type;
    ev.index = index;
    ev.dir = dir;
    ev.pkt = pkt;
    push(std::move(ev));
  }

  void record(int source, TraceKind kind, std::uint32_t seq, int hop, bool ack) {
    if (cfg_.record_trace) trace_.push_back({now_, source, kind, seq, hop, ack});
  }

  int endpoint_hop() const { return static_cast<int>(cfg_.stations.size()); }

  // Time-weighted forward occupancy, accumulated over the horizon only.
  void fwd_change(SourceSlot& slot, int delta) {
    const double lo = std::max(slot.fwd_since, horizon_.start);
    const double hi = std::min(now_, horizon_.end);
    if (hi > lo) slot.fwd_area += (hi - lo) * slot.fwd_count;
    slot.fwd_since = now_;
    slot.fwd_count += delta;
  }

  void dispatch(const Event& ev) {
    switch (ev.type) {
      case EventType::kSourceStart: {
        auto& slot = slots_[static_cast<std::size_t>(ev.index)];
        emit(ev.index, slot.source->start(now_));
        reschedule(ev.index);
        break;
      }
      case EventType::kSourceTimer: {
        auto& slot = slots_[static_cast<std::size_t>(ev.index)];
        if (ev.token != slot.token) break;
        slot.scheduled = kNever;
        emit(ev.index, slot.source->on_timer(now_));
        reschedule(ev.index);
        break;
      }
      case EventType::kStationArrive: station_arrive(ev.index, ev.dir, ev.pkt); break;
      case EventType::kStationDone: station_done(ev.index, ev.dir); break;
      case EventType::kMacArrive: mac_enqueue(ev.index, ev.pkt); break;
      case EventType::kMacAttempt:
        if (ev.token == mac_token_) {
          attempt_pending_ = false;
          begin_tx(pending_set_);
        }
        break;
      case EventType::kMacTxEnd: mac_tx_end(); break;
      case EventType::kMonitorArrive: monitor_arrive(ev.pkt); break;
      case EventType::kAckArrive: ack_arrive(ev.pkt); break;
    }
  }

  void reschedule(int index) {
    auto& slot = slots_[static_cast<std::size_t>(index)];
    const double next = slot.source->next_deadline();
    if (next == slot.scheduled) return;
    slot.scheduled = next;
    ++slot.token;
    if (next == kNever) return;
    Event ev;
    ev.time = std::max(next, now_);
    ev.type = EventType::kSourceTimer;
    ev.index = index;
    ev.token = slot.token;
    push(ev);
  }

  void emit(int source, const std::vector<UpdatePacket>& pkts) {
    auto& slot = slots_[static_cast<std::size_t>(source)];
    for (const auto& p : pkts) {
      Packet pkt;
      pkt.source = source;
      pkt.seq = p.seq;
      pkt.gen_ts_ns = p.gen_ts_ns;
      pkt.bits = cfg_.update_bits();
      ++slot.result.generated;
      fwd_change(slot, +1);
      record(source, TraceKind::kGenerated, p.seq, -1, false);
      if (cfg_.multiaccess)
        mac_enqueue(source, pkt);
      else
        station_arrive(0, 0, pkt);
    }
  }

  // Where a packet goes after leaving hop `hop` in direction `dir`.
  void forward_from(int hop, int dir, const Packet& pkt, double delay) {
    const int n = static_cast<int>(cfg_.stations.size());
    const double at = now_ + delay;
    if (dir == 0) {
      if (hop + 1 < n)
        schedule_packet(EventType::kStationArrive, at, hop + 1, 0, pkt);
      else
        schedule_packet(EventType::kMonitorArrive, at, 0, 0, pkt);
    } else {
      if (hop - 1 >= 0)
        schedule_packet(EventType::kStationArrive, at, hop - 1, 1, pkt);
      else if (cfg_.multiaccess && hop >= 0)
        schedule_packet(EventType::kMacArrive, at, cfg_.sources, 1, pkt);
      else
        schedule_packet(EventType::kAckArrive, at, 0, 1, pkt);
    }
  }

  void drop(const Packet& pkt, int hop) {
    record(pkt.source, TraceKind::kDropped, pkt.seq, hop, pkt.ack);
    if (!pkt.ack) {
      auto& slot = slots_[static_cast<std::size_t>(pkt.source)];
      ++slot.result.dropped;
      fwd_change(slot, -1);
    }
  }

  double service_time(const Station& st, StationQueue& q, std::size_t bits) {
    const double mean = st.mean_service_time(bits);
    return st.service == ServiceKind::kExponential ? q.rng.exponential(mean) : mean;
  }

  void start_service(int index, int dir) {
    auto& q = stations_[static_cast<std::size_t>(index)][static_cast<std::size_t>(dir)];
    const auto& st = cfg_.stations[static_cast<std::size_t>(index)];
    const Packet& head = q.queue.front();
    q.busy = true;
    record(head.source, TraceKind::kServiceStart, head.seq, index, head.ack);
    Event ev;
    ev.time = now_ + service_time(st, q, head.bits);
    ev.type = EventType::kStationDone;
    ev.index = index;
    ev.dir = dir;
    push(ev);
  }

  void station_arrive(int index, int dir, const Packet& pkt) {
    auto& q = stations_[static_cast<std::size_t>(index)][static_cast<std::size_t>(dir)];
    const auto& st = cfg_.stations[static_cast<std::size_t>(index)];
    if (st.buffer_capacity && q.queue.size() >= *st.buffer_capacity) {
      drop(pkt, index);
      return;
    }
    q.queue.push_back(pkt);
    record(pkt.source, TraceKind::kEnqueued, pkt.seq, index, pkt.ack);
    if (!q.busy) start_service(index, dir);
  }

  void station_done(int index, int dir) {
    auto& q = stations_[static_cast<std::size_t>(index)][static_cast<std::size_t>(dir)];
    const Packet pkt = q.queue.front();
    q.queue.pop_front();
    q.busy = false;
    forward_from(index, dir, pkt, cfg_.stations[static_cast<std::size_t>(index)].prop_delay);
    if (!q.queue.empty()) start_service(index, dir);
  }

  void monitor_arrive(const Packet& pkt) {
    auto& slot = slots_[static_cast<std::size_t>(pkt.source)];
    ++slot.result.reached_monitor;
    fwd_change(slot, -1);
    record(pkt.source, TraceKind::kDelivered, pkt.seq, endpoint_hop(), false);
    UpdatePacket up;
    up.seq = pkt.seq;
    up.gen_ts_ns = pkt.gen_ts_ns;
    const auto ack = slot.monitor.on_update(up, now_);
    if (!ack) return;
    Packet a;
    a.source = pkt.source;
    a.seq = ack->seq;
    a.gen_ts_ns = ack->gen_ts_ns;
    a.ack = true;
    a.bits = cfg_.ack_bits();
    if (cfg_.reverse == ReversePath::kInstantaneous) {
      schedule_packet(EventType::kAckArrive, now_, 0, 1, a);
    } else if (!cfg_.stations.empty()) {
      station_arrive(endpoint_hop() - 1, 1, a);
    } else {
      mac_enqueue(cfg_.sources, a);
    }
  }

  void ack_arrive(const Packet& pkt) {
    record(pkt.source, TraceKind::kAckDelivered, pkt.seq, endpoint_hop(), true);
    auto& slot = slots_[static_cast<std::size_t>(pkt.source)];
    AckPacket ack;
    ack.seq = pkt.seq;
    ack.gen_ts_ns = pkt.gen_ts_ns;
    auto res = slot.source->on_ack(ack, now_);
    emit(pkt.source, res.packets);
    reschedule(pkt.source);
  }

  // ----- shared multiaccess hop -------------------------------------------

  int ap() const { return cfg_.sources; }

  void mac_enqueue(int node, Packet pkt) {
    const auto& hop = *cfg_.multiaccess;
    auto& m = mac_[static_cast<std::size_t>(node)];
    if (hop.buffer_capacity && m.queue.size() >= *hop.buffer_capacity) {
      drop(pkt, -1);
      return;
    }
    pkt.hop_arrival = now_;
    m.queue.push_back(pkt);
    record(pkt.source, TraceKind::kEnqueued, pkt.seq, -1, pkt.ack);
    if (m.queue.size() > 1 || channel_busy_) return;
    if (attempt_pending_)
      schedule_contention();  // redraw including the newcomer (memoryless)
    else
      begin_tx({node});
  }

  void schedule_contention() {
    const auto& hop = *cfg_.multiaccess;
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    pending_set_.clear();
    for (std::size_t i = 0; i < mac_.size(); ++i) {
      auto& m = mac_[i];
      if (m.queue.empty()) continue;
      const double q = hop.persistence * std::ldexp(1.0, -m.stage);
      const std::uint64_t k = m.rng.geometric(q);
      if (k < best) {
        best = k;
        pending_set_.assign(1, static_cast<int>(i));
      } else if (k == best) {
        pending_set_.push_back(static_cast<int>(i));
      }
    }
    ++mac_token_;
    attempt_pending_ = !pending_set_.empty();
    if (!attempt_pending_) return;
    Event ev;
    ev.time = now_ + static_cast<double>(best) * hop.slot;
    ev.type = EventType::kMacAttempt;
    ev.token = mac_token_;
    push(ev);
  }

  void begin_tx(std::vector<int> nodes) {
    const auto& hop = *cfg_.multiaccess;
    channel_busy_ = true;
    ++mac_token_;
    tx_set_ = std::move(nodes);
    std::size_t bits = 0;
    for (int node : tx_set_) {
      const Packet& head = mac_[static_cast<std::size_t>(node)].queue.front();
      bits = std::max(bits, head.bits);
      record(head.source, TraceKind::kServiceStart, head.seq, -1, head.ack);
    }
    Event ev;
    ev.time = now_ + static_cast<double>(bits) / hop.link_rate_bps + hop.frame_overhead;
    ev.type = EventType::kMacTxEnd;
    push(ev);
  }

  void mac_failure(int node) {
    const auto& hop = *cfg_.multiaccess;
    auto& m = mac_[static_cast<std::size_t>(node)];
    ++m.retries;
    m.stage = std::min(m.stage + 1, hop.max_backoff_exp);
    if (m.retries > hop.retry_limit) {
      const Packet pkt = m.queue.front();
      m.queue.pop_front();
      m.stage = 0;
      m.retries = 0;
      drop(pkt, -1);
    }
  }

  void mac_tx_end() {
    const auto& hop = *cfg_.multiaccess;
    channel_busy_ = false;
    if (tx_set_.size() == 1) {
      const int node = tx_set_.front();
      auto& m = mac_[static_cast<std::size_t>(node)];
      // The loss draw belongs to the transmitter's stream for either direction.
      if (m.rng.bernoulli(hop.per_source_loss)) {
        mac_failure(node);
      } else {
        const Packet pkt = m.queue.front();
        m.queue.pop_front();
        m.stage = 0;
        m.retries = 0;
        if (pkt.ack) {
          schedule_packet(EventType::kAckArrive, now_ + hop.prop_delay, 0, 1, pkt);
        } else {
          auto& slot = slots_[static_cast<std::size_t>(pkt.source)];
          ++slot.result.access_samples;
          slot.access_sum += now_ - pkt.hop_arrival;
          forward_from(-1, 0, pkt, hop.prop_delay);
        }
      }
    } else {
      for (int node : tx_set_) {
        if (node != ap()) ++slots_[static_cast<std::size_t>(node)].result.collisions;
        mac_failure(node);
      }
    }
    tx_set_.clear();
    schedule_contention();
  }

  const SimConfig& cfg_;
  Horizon horizon_;
  double now_ = 0;
  std::uint64_t next_order_ = 0;
  std::uint64_t processed_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::vector<SourceSlot> slots_;
  std::vector<std::array<StationQueue, 2>> stations_;
  std::vector<MacNode> mac_;
  bool channel_busy_ = false;
  bool attempt_pending_ = false;
  std::uint64_t mac_token_ = 0;
  std::vector<int> pending_set_;
  std::vector<int> tx_set_;
  std::vector<TraceRecord> trace_;
};

}  // namespace

const char* to_string(TraceKind k) noexcept {
  switch (k) {
    case TraceKind::kGenerated: return "generated";
    case TraceKind::kEnqueued: return "enqueued";
    case TraceKind::kDropped: return "dropped";
    case TraceKind::kServiceStart: return "service_start";
    case TraceKind::kDelivered: return "delivered";
    case TraceKind::kAckDelivered: return "ack_delivered";
  }
  return "?";
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (sources < 1) fail("sources must be at least 1");
  if (!(duration > 0.0)) fail("duration must be positive");
  if (stations.empty()) fail("the path needs at least one station");
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const auto& st = stations[i];
    if (!(st.rate_bps > 0.0)) fail(fmt::format("station {}: rate must be positive", i));
    if (st.buffer_capacity && *st.buffer_capacity < 1) fail(fmt::format("station {}: buffer must be >= 1", i));
    if (!(st.prop_delay >= 0.0)) fail(fmt::format("station {}: negative propagation delay", i));
  }
  if (multiaccess) {
    const auto& m = *multiaccess;
    if (!(m.link_rate_bps > 0.0)) fail("multiaccess: link rate must be positive");
    if (!(m.slot > 0.0)) fail("multiaccess: slot must be positive");
    if (!(m.persistence > 0.0 && m.persistence <= 1.0)) fail("multiaccess: persistence must lie in (0,1]");
    if (m.max_backoff_exp < 0) fail("multiaccess: negative max backoff exponent");
    if (m.retry_limit < 0) fail("multiaccess: negative retry limit");
    if (!(m.per_source_loss >= 0.0 && m.per_source_loss < 1.0)) fail("multiaccess: loss must lie in [0,1)");
    if (!(m.frame_overhead >= 0.0) || !(m.prop_delay >= 0.0)) fail("multiaccess: negative timing");
    if (m.buffer_capacity && *m.buffer_capacity < 1) fail("multiaccess: buffer must be >= 1");
  }
  if (payload_bytes > kMaxPayload) fail("payload exceeds the datagram bound");
  if (!(start_spread >= 0.0)) fail("start_spread must be non-negative");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) fail("warmup_fraction must lie in [0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0,1)");
  SourceConfig::parse_mode(protocol);
}

SimResult run_simulation(const SimConfig& cfg) {
  Engine engine(cfg);
  return engine.run();
}

StationDelayStats simulate_station(const Station& station, std::size_t packet_bits,
                                   double arrival_rate, ArrivalProcess arrivals,
                                   std::uint64_t packets, std::uint64_t seed) {
  if (!(arrival_rate > 0.0)) throw Error(ErrorCode::kInvalidArgument, "arrival rate must be positive");
  if (packets == 0) throw Error(ErrorCode::kInvalidArgument, "need at least one packet");
  Rng arrival_rng(stream_seed(seed, 1));
  Rng service_rng(stream_seed(seed, 2));
  const double mean_service = station.mean_service_time(packet_bits);
  std::deque<double> departures;  // of packets still in the system
  double t = 0.0, last_departure = 0.0, sojourn_sum = 0.0;
  std::uint64_t accepted = 0, dropped = 0;
  for (std::uint64_t n = 0; n < packets; ++n) {
    t += arrivals == ArrivalProcess::kPoisson ? arrival_rng.exponential(1.0 / arrival_rate)
                                              : 1.0 / arrival_rate;
    while (!departures.empty() && departures.front() <= t) departures.pop_front();
    if (station.buffer_capacity && departures.size() >= *station.buffer_capacity) {
      ++dropped;
      continue;
    }
    const double service = station.service == ServiceKind::kExponential
                               ? service_rng.exponential(mean_service)
                               : mean_service;
    last_departure = std::max(t, last_departure) + service;
    departures.push_back(last_departure);
    sojourn_sum += last_departure - t;
    ++accepted;
  }
  StationDelayStats s;
  s.packets = packets;
  s.mean_sojourn = accepted ? sojourn_sum / static_cast<double>(accepted) : 0.0;
  s.mean_occupancy = sojourn_sum / std::max(t, last_departure);
  s.drop_fraction = static_cast<double>(dropped) / static_cast<double>(packets);
  return s;
}

std::vector<LoadPoint> rtt_vs_load_curve(const Station& station, double rtt_base,
                                         const std::vector<double>& loads,
                                         std::size_t packet_bits, CurveMethod method,
                                         std::uint64_t packets, std::uint64_t seed) {
  const double service = station.mean_service_time(packet_bits);
  const double mu = 1.0 / service;
  const bool deterministic = station.service == ServiceKind::kDeterministic;
  std::vector<LoadPoint> out;
  for (double load : loads) {
    if (!(load > 0.0)) throw Error(ErrorCode::kInvalidArgument, "loads must be positive");
    LoadPoint p;
    p.load = load;
    if (load >= mu && !station.buffer_capacity) {
      p.unstable = true;
      p.mean_rtt = std::numeric_limits<double>::infinity();
    } else if (method == CurveMethod::kSimulated) {
      const auto stats = simulate_station(station, packet_bits, load,
                                          deterministic ? ArrivalProcess::kPeriodic : ArrivalProcess::kPoisson,
                                          packets, seed);
      p.mean_rtt = rtt_base + stats.mean_sojourn - (deterministic ? service : 0.0);
    } else if (deterministic) {
      // Sub-capacity: no queueing. Overload: the buffer stays full.
      p.mean_rtt = load < mu ? rtt_base
                             : rtt_base + static_cast<double>(*station.buffer_capacity - 1) * service;
    } else if (!station.buffer_capacity) {
      p.mean_rtt = rtt_base + 1.0 / (mu - load);
    } else {
      // M/M/1/K sojourn from the truncated geometric occupancy distribution.
      const auto K = static_cast<double>(*station.buffer_capacity);
      const double rho = load / mu;
      double mean_n = 0.0, p_block = 0.0;
      if (std::abs(rho - 1.0) < 1e-12) {
        mean_n = K / 2.0;
        p_block = 1.0 / (K + 1.0);
      } else {
        const double rk1 = std::pow(rho, K + 1.0);
        mean_n = rho / (1.0 - rho) - (K + 1.0) * rk1 / (1.0 - rk1);
        p_block = (1.0 - rho) * std::pow(rho, K) / (1.0 - rk1);
      }
      p.mean_rtt = rtt_base + mean_n / (load * (1.0 - p_block));
    }
    out.push_back(p);
  }
  return out;
}

SweepResult sweep_min_age(const SimConfig& base, const std::vector<double>& rates, bool poisson) {
  if (rates.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one rate");
  SweepResult result;
  result.best_age = std::numeric_limits<double>::infinity();
  for (double rate : rates) {
    SimConfig cfg = base;
    cfg.sources = 1;
    cfg.protocol = fmt::format("{}:{:.17g}", poisson ? "poisson" : "constant", rate);
    cfg.reverse = ReversePath::kInstantaneous;
    cfg.record_trace = false;
    const SimResult sim = run_simulation(cfg);
    const auto& src = sim.sources.front();
    const auto stats = summarize(src.log, src.deliveries, sim.horizon, AgeSemantics::kOneWay);
    SweepPoint point{rate, stats.avg_age.value_or(std::numeric_limits<double>::infinity()),
                     src.forward_occupancy_avg};
    result.points.push_back(point);
    if (point.age < result.best_age) {
      result.best_age = point.age;
      result.best_rate = rate;
      result.backlog_at_best = point.backlog;
    }
  }
  return result;
}

std::vector<double> utilization_grid(const SimConfig& base, double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) throw Error(ErrorCode::kInvalidArgument, "bad utilization grid");
  double capacity = std::numeric_limits<double>::infinity();
  for (const auto& st : base.stations)
    capacity = std::min(capacity, st.rate_bps / static_cast<double>(base.update_bits()));
  if (base.multiaccess)
    capacity = std::min(capacity, base.multiaccess->link_rate_bps / static_cast<double>(base.update_bits()));
  std::vector<double> rates;
  for (int i = 0; i < n; ++i) {
    const double u = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    rates.push_back(u * capacity);
  }
  return rates;
}

}  // namespace agectl
