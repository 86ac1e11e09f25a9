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

// Protocol actors. Source and Monitor are single-threaded state machines
// driven by an external event loop (the simulator or the socket runtime):
// the driver asks for the next deadline, fires timers, and injects packets.

#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "agectl/controller.hpp"
#include "agectl/estimation.hpp"
#include "agectl/wire.hpp"

namespace agectl {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

enum class SourceMode { kAcpPlus, kLazy, kConstant };

struct SourceConfig {
  SourceMode mode = SourceMode::kAcpPlus;
  double constant_rate = 0.0;  // kConstant, updates per second
  bool poisson = false;        // kConstant: exponential instead of fixed gaps
  std::size_t payload_bytes = kDefaultPayloadBytes;
  double alpha = kDefaultEwmaAlpha;
  // Retransmit-free bootstrap: send period before the first RTT sample.
  double initial_rtt = 1.0;
  // Lazy sends a replacement when no ACK arrived within this many RTTs.
  double lazy_timeout_factor = 2.0;
  // Floor on that timeout, like a minimum retransmission timeout.
  double lazy_min_timeout = 0.2;
  std::uint64_t seed = 1;  // only used by poisson generation
  bool record_backlog = true;
  // When false, emitted packets carry an empty payload and payload_bytes is
  // only a size hint (the simulator tracks sizes, not bytes).
  bool materialize_payload = true;

  // "acp+", "lazy", "constant:<rate>", "poisson:<rate>". Throws kConfig.
  static SourceConfig parse_mode(const std::string& text);
  std::string mode_label() const;
};

struct AckRecord {
  double ack_time = 0;
  std::uint32_t seq = 0;
  double gen_time = 0;
  double rtt = 0;
};

enum class AckDisposition { kAccepted, kOutOfSequence, kProtocolViolation };

struct AckResult {
  AckDisposition disposition = AckDisposition::kAccepted;
  std::vector<UpdatePacket> packets;  // Lazy replies with a fresh update
};

struct SourceCounters {
  std::uint64_t sent = 0;
  std::uint64_t acked = 0;
  std::uint64_t superseded = 0;
  std::uint64_t out_of_sequence = 0;
  std::uint64_t violations = 0;
};

class Source {
 public:
  explicit Source(SourceConfig cfg);

  // Opens the session; every mode sends one update immediately.
  std::vector<UpdatePacket> start(double now);

  // Earliest pending timer (generation tick, epoch boundary, fallback), or kNever.
  double next_deadline() const;

  // Fires the single earliest timer due at or before `now`. Ticks win ties
  // with epoch boundaries. Returns the packets to transmit.
  std::vector<UpdatePacket> on_timer(double now);

  AckResult on_ack(const AckPacket& ack, double now);

  SourceMode mode() const { return cfg_.mode; }
  const SourceConfig& config() const { return cfg_; }
  int backlog() const { return static_cast<int>(outstanding_.size()); }
  double lambda() const { return ctl_.lambda; }
  bool bootstrapped() const { return bootstrapped_; }
  const ControllerState& controller() const { return ctl_; }
  const EstimatorState& estimators() const { return est_; }
  const SourceCounters& counters() const { return counters_; }
  const std::vector<EpochRecord>& epoch_log() const { return epochs_; }
  const std::vector<AckRecord>& ack_log() const { return acks_; }
  const std::vector<BacklogStep>& backlog_trace() const { return backlog_trace_; }
  const std::vector<std::string>& violation_log() const { return violation_log_; }

 private:
  struct Outstanding {
    std::uint32_t seq;
    std::uint64_t gen_ts_ns;
    double gen_time;
  };

  UpdatePacket generate(double now);
  void note_backlog(double now);
  void run_epoch(double now);
  void schedule_after_send(double now);
  double generation_gap();

  SourceConfig cfg_;
  bool started_ = false;
  bool bootstrapped_ = false;
  std::uint32_t next_seq_ = 0;
  std::optional<std::uint32_t> highest_acked_;
  std::deque<Outstanding> outstanding_;
  ControllerState ctl_;
  EstimatorState est_;
  EpochAccumulator acc_;
  double next_tick_ = kNever;
  double last_tick_ = 0.0;
  double next_epoch_ = kNever;
  double fallback_ = kNever;
  std::mt19937_64 rng_;
  SourceCounters counters_;
  std::vector<EpochRecord> epochs_;
  std::vector<AckRecord> acks_;
  std::vector<BacklogStep> backlog_trace_;
  std::vector<std::string> violation_log_;
};

struct Delivery {
  double receive_time = 0;
  std::uint32_t seq = 0;
  double gen_time = 0;
};

enum class DiscardReason { kDuplicate, kOutOfSequence, kMalformed };

const char* to_string(DiscardReason r) noexcept;

struct DiscardRecord {
  double receive_time = 0;
  std::uint32_t seq = 0;  // 0 for malformed datagrams
  DiscardReason reason = DiscardReason::kOutOfSequence;
};

class Monitor {
 public:
  // Out-of-sequence and duplicate updates produce no ACK and no delivery;
  // they land in the discard log instead.
  std::optional<AckPacket> on_update(const UpdatePacket& pkt, double now);
  // For transports: a datagram that failed to decode.
  void on_malformed(double now);

  std::optional<std::uint32_t> highest_seq_received() const { return highest_; }
  const std::vector<Delivery>& delivery_log() const { return log_; }
  const std::vector<DiscardRecord>& discard_log() const { return discards_; }
  std::uint64_t discarded() const { return discarded_; }
  std::uint64_t malformed() const { return malformed_; }

 private:
  std::optional<std::uint32_t> highest_;
  std::vector<Delivery> log_;
  std::vector<DiscardRecord> discards_;
  std::uint64_t discarded_ = 0;
  std::uint64_t malformed_ = 0;
};

}  // namespace agectl
