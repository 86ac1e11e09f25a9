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

// Offline evaluation of session logs: time-average age from the sawtooth,
// delay, throughput, inter-delivery statistics and Jain's fairness index.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agectl/endpoints.hpp"

namespace agectl {

struct Horizon {
  double start = 0;
  double end = 0;
  double length() const { return end - start; }
};

// An update observed at `receive_time` that was generated at `gen_time`.
struct Observation {
  double receive_time = 0;
  double gen_time = 0;
};

struct AgeBreakpoint {
  double time = 0;
  double age = 0;
};

// Piecewise-linear age: slope one between consecutive breakpoints with
// distinct times, vertical drops at pairs of breakpoints sharing a time.
struct AgeTrace {
  std::vector<AgeBreakpoint> breakpoints;

  double age_at(double t) const;
};

// Builds the sawtooth from time-ordered observations with increasing
// generation times. The trace starts at the first observation and extends
// to horizon.end. Throws kNoSamples on an empty log.
AgeTrace age_trace_from_observations(std::span<const Observation> log, const Horizon& horizon);

// Exact integral of the trace over the horizon divided by its length.
// Throws kInvalidArgument on an empty horizon or one the trace does not cover.
double time_average_age(const AgeTrace& trace, const Horizon& horizon);

// (sum x)^2 / (n sum x^2). Throws kInvalidArgument if no value is positive.
double jain_fairness(std::span<const double> values);

// Time-weighted mean of a backlog step function over the horizon.
double time_average_backlog(std::span<const BacklogStep> steps, const Horizon& horizon);

enum class AgeSemantics {
  kOneWay,     // monitor receive time minus generation time (simulation)
  kRoundTrip,  // source ACK time minus generation time (live sockets)
};

const char* to_string(AgeSemantics s) noexcept;

struct SummaryStats {
  AgeSemantics semantics = AgeSemantics::kOneWay;
  std::optional<double> avg_age;  // absent when nothing was delivered
  double avg_delay = 0;
  double avg_rtt = 0;
  double throughput_bps = 0;
  double avg_inter_delivery = 0;
  double avg_inter_ack = 0;
  double backlog_avg = 0;
  std::uint64_t delivered_count = 0;
  std::uint64_t sent_count = 0;
  double loss_fraction = 0;
};

// Everything metrics needs to know about one source's session.
struct SourceSessionLog {
  std::string protocol;
  std::uint64_t sent = 0;
  std::size_t payload_bytes = kDefaultPayloadBytes;
  std::vector<AckRecord> acks;
  std::vector<BacklogStep> backlog;
  std::vector<EpochRecord> epochs;
};

// Monitor deliveries within the horizon drive age, delay, throughput and
// inter-delivery time under kOneWay; the source's ACK log stands in for
// them under kRoundTrip. Warm-up traffic before horizon.start is excluded
// from counts but still seeds the age at horizon.start.
SummaryStats summarize(const SourceSessionLog& source, std::span<const Delivery> monitor,
                       const Horizon& horizon, AgeSemantics semantics);

// The default horizon drops the first `warmup_fraction` of [start, end].
Horizon trimmed_horizon(double start, double end, double warmup_fraction = 0.1);

}  // namespace agectl
