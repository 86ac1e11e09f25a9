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

// The endpoint state machines over UDP, plus an in-path proxy that adds
// delay and loss so a whole session can run on one machine. Each loop is
// single-threaded: datagram receipt and timer expiry are serialized.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "agectl/endpoints.hpp"
#include "agectl/metrics.hpp"

namespace agectl {

// Called once the socket is bound, with the local address ("host:port").
using ReadyFn = std::function<void(const std::string& local_address)>;

// "host:port", "[v6addr]:port". Throws kInvalidArgument.
std::pair<std::string, std::string> split_host_port(const std::string& address);

struct SourceRunOptions {
  std::string peer;  // monitor or proxy, "host:port"
  std::string bind;  // empty: any local port of the peer's family
  std::string mode = "acp+";
  double duration = 10.0;  // seconds
  std::size_t payload_bytes = kDefaultPayloadBytes;
  double initial_rtt = 1.0;
  std::uint64_t seed = 1;
  std::string out;  // source CSV log; empty: nothing written
  const std::atomic<bool>* stop = nullptr;
  ReadyFn on_ready;
};

struct LiveSourceResult {
  SourceSessionLog log;
  SourceCounters counters;
  double elapsed = 0;
  std::uint64_t malformed_acks = 0;
  std::uint64_t socket_errors = 0;  // e.g. ICMP port unreachable on a silent peer
};

// Throws Error(kIo) on socket setup failures, kConfig on a bad mode.
LiveSourceResult run_source(const SourceRunOptions& opts);

struct MonitorRunOptions {
  std::string listen = "127.0.0.1:0";
  double duration = 10.0;
  std::string out;  // monitor CSV; discards go to <stem>.discards.csv
  const std::atomic<bool>* stop = nullptr;
  ReadyFn on_ready;
};

struct LiveMonitorResult {
  std::vector<Delivery> deliveries;
  std::vector<DiscardRecord> discards;
  std::uint64_t datagrams = 0;
  std::uint64_t acks_sent = 0;
  std::uint64_t malformed = 0;
};

LiveMonitorResult run_monitor(const MonitorRunOptions& opts);

enum class DelayDist { kConstant, kExponential };

struct PathEmulation {
  DelayDist dist = DelayDist::kConstant;
  double delay = 0.0;  // seconds; the mean for kExponential
  double loss = 0.0;
};

struct ProxyConfig {
  std::string listen = "127.0.0.1:0";  // source-facing
  std::string forward;                 // monitor address
  PathEmulation upstream;              // source -> monitor
  PathEmulation downstream;            // monitor -> source
  bool reorder = false;
  std::uint64_t seed = 1;
  double duration = 10.0;
  const std::atomic<bool>* stop = nullptr;
  ReadyFn on_ready;

  // Throws kConfig.
  void validate() const;
};

struct ProxyDirectionStats {
  std::uint64_t received = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t dropped = 0;
  std::uint64_t pending_at_exit = 0;
};

struct ProxyStats {
  ProxyDirectionStats upstream;
  ProxyDirectionStats downstream;
};

ProxyStats run_proxy(const ProxyConfig& cfg);

// AGECTL_SEED when set and numeric, otherwise `fallback`.
std::uint64_t seed_from_env(std::uint64_t fallback);

}  // namespace agectl
