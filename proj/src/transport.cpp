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

#include "agectl/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <queue>
#include <random>

#include <fmt/format.h>

#include "agectl/error.hpp"
#include "agectl/logio.hpp"
#include "agectl/wire.hpp"

namespace agectl {
namespace {

constexpr double kStopPollInterval = 0.05;

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

struct Address {
  sockaddr_storage storage{};
  socklen_t len = 0;

  int family() const { return storage.ss_family; }
  const sockaddr* sa() const { return reinterpret_cast<const sockaddr*>(&storage); }
};

std::string errno_text() { return std::strerror(errno); }

Address resolve(const std::string& address, bool passive, int family = AF_UNSPEC) {
  const auto [host, port] = split_host_port(address);
  addrinfo hints{};
  hints.ai_family = family;
  hints.ai_socktype = SOCK_DGRAM;
  hints.ai_flags = AI_NUMERICSERV | (passive ? AI_PASSIVE : 0);
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0 || res == nullptr)
    throw Error(ErrorCode::kIo, fmt::format("cannot resolve {}: {}", address, ::gai_strerror(rc)));
  Address a;
  std::memcpy(&a.storage, res->ai_addr, res->ai_addrlen);
  a.len = static_cast<socklen_t>(res->ai_addrlen);
  ::freeaddrinfo(res);
  return a;
}

std::string to_string(const Address& a) {
  char host[NI_MAXHOST], port[NI_MAXSERV];
  if (::getnameinfo(a.sa(), a.len, host, sizeof host, port, sizeof port, NI_NUMERICHOST | NI_NUMERICSERV) != 0)
    return "?";
  return a.family() == AF_INET6 ? fmt::format("[{}]:{}", host, port) : fmt::format("{}:{}", host, port);
}

Fd open_socket(int family) {
  Fd fd(::socket(family, SOCK_DGRAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0));
  if (fd.get() < 0) throw Error(ErrorCode::kIo, fmt::format("socket: {}", errno_text()));
  return fd;
}

void bind_to(const Fd& fd, const Address& a, const std::string& text) {
  if (::bind(fd.get(), a.sa(), a.len) != 0)
    throw Error(ErrorCode::kIo, fmt::format("bind {}: {}", text, errno_text()));
}

void connect_to(const Fd& fd, const Address& a, const std::string& text) {
  if (::connect(fd.get(), a.sa(), a.len) != 0)
    throw Error(ErrorCode::kIo, fmt::format("connect {}: {}", text, errno_text()));
}

std::string local_address(const Fd& fd) {
  Address a;
  a.len = sizeof a.storage;
  if (::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&a.storage), &a.len) != 0) return "?";
  return to_string(a);
}

class Clock {
 public:
  Clock() : t0_(std::chrono::steady_clock::now()) {}
  double now() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

bool stopped(const std::atomic<bool>* stop) { return stop != nullptr && stop->load(); }

// Waits until one of `fds` is readable or `seconds` elapse. Returns the
// number of readable descriptors.
int wait_readable(pollfd* fds, nfds_t n, double seconds) {
  seconds = std::clamp(seconds, 0.0, kStopPollInterval);
  timespec ts;
  ts.tv_sec = static_cast<time_t>(seconds);
  ts.tv_nsec = static_cast<long>((seconds - static_cast<double>(ts.tv_sec)) * 1e9);
  for (nfds_t i = 0; i < n; ++i) fds[i].revents = 0;
  const int rc = ::ppoll(fds, n, &ts, nullptr);
  if (rc < 0 && errno != EINTR) throw Error(ErrorCode::kIo, fmt::format("ppoll: {}", errno_text()));
  return std::max(rc, 0);
}

std::string with_suffix(const std::string& csv, const std::string& suffix) {
  std::string stem = csv;
  if (stem.size() > 4 && stem.ends_with(".csv")) stem.resize(stem.size() - 4);
  return stem + suffix;
}

}  // namespace

std::pair<std::string, std::string> split_host_port(const std::string& address) {
  std::string host, port;
  if (!address.empty() && address.front() == '[') {
    const auto close = address.find(']');
    if (close == std::string::npos || close + 1 >= address.size() || address[close + 1] != ':')
      throw Error(ErrorCode::kInvalidArgument, fmt::format("bad address '{}'", address));
    host = address.substr(1, close - 1);
    port = address.substr(close + 2);
  } else {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::kInvalidArgument, fmt::format("address '{}' lacks a port", address));
    host = address.substr(0, colon);
    port = address.substr(colon + 1);
  }
  if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      std::stoul(port) > 65535)
    throw Error(ErrorCode::kInvalidArgument, fmt::format("bad port in '{}'", address));
  return {host, port};
}

LiveSourceResult run_source(const SourceRunOptions& opts) {
  SourceConfig sc = SourceConfig::parse_mode(opts.mode);
  sc.payload_bytes = opts.payload_bytes;
  sc.initial_rtt = opts.initial_rtt;
  sc.seed = opts.seed;
  if (opts.payload_bytes > kMaxPayload)
    throw Error(ErrorCode::kConfig, fmt::format("payload of {} bytes exceeds {}", opts.payload_bytes, kMaxPayload));
  if (!(opts.duration >= 0.0)) throw Error(ErrorCode::kConfig, "duration must be non-negative");
  Source src(sc);

  const Address peer = resolve(opts.peer, false);
  Fd fd = open_socket(peer.family());
  if (!opts.bind.empty()) bind_to(fd, resolve(opts.bind, true, peer.family()), opts.bind);
  connect_to(fd, peer, opts.peer);
  if (opts.on_ready) opts.on_ready(local_address(fd));

  LiveSourceResult result;
  const Clock clock;
  auto send_all = [&](const std::vector<UpdatePacket>& pkts) {
    for (const auto& p : pkts) {
      const auto bytes = encode_update(p);
      if (::send(fd.get(), bytes.data(), bytes.size(), 0) < 0) ++result.socket_errors;
    }
  };

  double now = 0.0;
  if (opts.duration > 0.0 && !stopped(opts.stop)) {
    send_all(src.start(clock.now()));
    std::vector<std::uint8_t> buf(kMaxDatagram + 1);
    pollfd pfd{fd.get(), POLLIN, 0};
    while (true) {
      now = clock.now();
      if (now >= opts.duration || stopped(opts.stop)) break;
      while (src.next_deadline() <= now) send_all(src.on_timer(now));
      const double deadline = std::min(src.next_deadline(), opts.duration);
      if (wait_readable(&pfd, 1, deadline - clock.now()) == 0) continue;
      while (true) {
        const ssize_t n = ::recv(fd.get(), buf.data(), buf.size(), 0);
        if (n < 0) {
          if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) ++result.socket_errors;
          break;
        }
        const auto ack = decode_ack({buf.data(), static_cast<std::size_t>(n)});
        if (!ack) {
          ++result.malformed_acks;
          continue;
        }
        send_all(src.on_ack(*ack.packet, clock.now()).packets);
      }
    }
  }
  result.elapsed = std::min(std::max(now, 0.0), opts.duration);
  result.counters = src.counters();
  result.log.protocol = sc.mode_label();
  result.log.sent = src.counters().sent;
  result.log.payload_bytes = opts.payload_bytes;
  result.log.acks = src.ack_log();
  result.log.backlog = src.backlog_trace();
  result.log.epochs = src.epoch_log();
  if (!opts.out.empty())
    write_source_session(opts.out, result.log, {result.log.sent, result.elapsed, AgeSemantics::kRoundTrip});
  return result;
}

LiveMonitorResult run_monitor(const MonitorRunOptions& opts) {
  if (!(opts.duration >= 0.0)) throw Error(ErrorCode::kConfig, "duration must be non-negative");
  const Address listen = resolve(opts.listen, true);
  Fd fd = open_socket(listen.family());
  bind_to(fd, listen, opts.listen);
  if (opts.on_ready) opts.on_ready(local_address(fd));

  Monitor monitor;
  LiveMonitorResult result;
  const Clock clock;
  std::vector<std::uint8_t> buf(kMaxDatagram + 1);
  pollfd pfd{fd.get(), POLLIN, 0};
  while (!stopped(opts.stop) && clock.now() < opts.duration) {
    if (wait_readable(&pfd, 1, opts.duration - clock.now()) == 0) continue;
    while (true) {
      Address from;
      from.len = sizeof from.storage;
      const ssize_t n = ::recvfrom(fd.get(), buf.data(), buf.size(), 0, reinterpret_cast<sockaddr*>(&from.storage),
                                   &from.len);
      if (n < 0) break;
      ++result.datagrams;
      const double now = clock.now();
      const auto pkt = decode_update({buf.data(), static_cast<std::size_t>(n)});
      if (!pkt) {
        monitor.on_malformed(now);
        continue;
      }
      const auto ack = monitor.on_update(*pkt.packet, now);
      if (!ack) continue;
      const auto bytes = encode_ack(*ack);
      if (::sendto(fd.get(), bytes.data(), bytes.size(), 0, from.sa(), from.len) >= 0) ++result.acks_sent;
    }
  }
  result.deliveries = monitor.delivery_log();
  result.discards = monitor.discard_log();
  result.malformed = monitor.malformed();
  if (!opts.out.empty()) {
    write_monitor_log(opts.out, result.deliveries);
    write_discard_log(with_suffix(opts.out, ".discards.csv"), result.discards);
  }
  return result;
}

void ProxyConfig::validate() const {
  for (const auto* p : {&upstream, &downstream}) {
    if (!(p->delay >= 0.0)) throw Error(ErrorCode::kConfig, "proxy delay must be non-negative");
    if (!(p->loss >= 0.0 && p->loss < 1.0)) throw Error(ErrorCode::kConfig, "proxy loss must lie in [0,1)");
  }
  if (forward.empty()) throw Error(ErrorCode::kConfig, "proxy needs a forward address");
  if (!(duration >= 0.0)) throw Error(ErrorCode::kConfig, "duration must be non-negative");
}

ProxyStats run_proxy(const ProxyConfig& cfg) {
  cfg.validate();
  const Address listen = resolve(cfg.listen, true);
  const Address forward = resolve(cfg.forward, false);
  Fd front = open_socket(listen.family());
  bind_to(front, listen, cfg.listen);
  Fd back = open_socket(forward.family());
  connect_to(back, forward, cfg.forward);
  if (cfg.on_ready) cfg.on_ready(local_address(front));

  struct Held {
    double release;
    std::uint64_t order;
    int dir;  // 0 upstream, 1 downstream
    std::vector<std::uint8_t> bytes;
  };
  struct Later {
    bool operator()(const Held& a, const Held& b) const {
      return a.release > b.release || (a.release == b.release && a.order > b.order);
    }
  };
  std::priority_queue<Held, std::vector<Held>, Later> held;
  std::uint64_t order = 0;
  const PathEmulation* path[2] = {&cfg.upstream, &cfg.downstream};
  std::mt19937_64 rng[2] = {std::mt19937_64(cfg.seed), std::mt19937_64(cfg.seed ^ 0x9E3779B97F4A7C15ULL)};
  double last_release[2] = {0.0, 0.0};
  ProxyStats stats;
  ProxyDirectionStats* dstats[2] = {&stats.upstream, &stats.downstream};
  std::optional<Address> client;

  const Clock clock;
  auto admit = [&](int dir, std::vector<std::uint8_t> bytes, double now) {
    ++dstats[dir]->received;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (path[dir]->loss > 0.0 && u(rng[dir]) < path[dir]->loss) {
      ++dstats[dir]->dropped;
      return;
    }
    double delay = path[dir]->delay;
    if (path[dir]->dist == DelayDist::kExponential && delay > 0.0)
      delay = std::exponential_distribution<double>(1.0 / delay)(rng[dir]);
    double release = now + delay;
    if (!cfg.reorder) release = std::max(release, last_release[dir]);
    last_release[dir] = release;
    held.push({release, order++, dir, std::move(bytes)});
  };

  std::vector<std::uint8_t> buf(kMaxDatagram + 1);
  pollfd pfds[2] = {{front.get(), POLLIN, 0}, {back.get(), POLLIN, 0}};
  while (!stopped(cfg.stop) && clock.now() < cfg.duration) {
    double now = clock.now();
    while (!held.empty() && held.top().release <= now) {
      const Held& h = held.top();
      ssize_t rc = -1;
      if (h.dir == 0)
        rc = ::send(back.get(), h.bytes.data(), h.bytes.size(), 0);
      else if (client)
        rc = ::sendto(front.get(), h.bytes.data(), h.bytes.size(), 0, client->sa(), client->len);
      if (rc >= 0) ++dstats[h.dir]->forwarded;
      else ++dstats[h.dir]->dropped;
      held.pop();
    }
    double wake = cfg.duration;
    if (!held.empty()) wake = std::min(wake, held.top().release);
    if (wait_readable(pfds, 2, wake - clock.now()) == 0) continue;
    now = clock.now();
    if (pfds[0].revents & (POLLIN | POLLERR)) {
      while (true) {
        Address from;
        from.len = sizeof from.storage;
        const ssize_t n = ::recvfrom(front.get(), buf.data(), buf.size(), 0,
                                     reinterpret_cast<sockaddr*>(&from.storage), &from.len);
        if (n < 0) break;
        client = from;
        admit(0, {buf.begin(), buf.begin() + n}, now);
      }
    }
    if (pfds[1].revents & (POLLIN | POLLERR)) {
      while (true) {
        const ssize_t n = ::recv(back.get(), buf.data(), buf.size(), 0);
        if (n < 0) break;
        admit(1, {buf.begin(), buf.begin() + n}, now);
      }
    }
  }
  while (!held.empty()) {
    ++dstats[held.top().dir]->pending_at_exit;
    held.pop();
  }
  return stats;
}

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* v = std::getenv("AGECTL_SEED");
  if (v == nullptr || *v == '\0') return fallback;
  char* end = nullptr;
  errno = 0;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (errno != 0 || *end != '\0') return fallback;
  return s;
}

}  // namespace agectl
