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

#include "agectl/endpoints.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace agectl {
namespace {

double parse_rate(const std::string& text, const std::string& whole) {
  double rate = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, rate);
  if (ec != std::errc() || ptr != end || !(rate > 0.0) || !std::isfinite(rate))
    throw Error(ErrorCode::kConfig, "bad rate in protocol mode '" + whole + "'");
  return rate;
}

}  // namespace

SourceConfig SourceConfig::parse_mode(const std::string& text) {
  SourceConfig cfg;
  if (text == "acp+" || text == "acp_plus" || text == "acpplus") {
    cfg.mode = SourceMode::kAcpPlus;
  } else if (text == "lazy") {
    cfg.mode = SourceMode::kLazy;
  } else if (text.rfind("constant:", 0) == 0) {
    cfg.mode = SourceMode::kConstant;
    cfg.constant_rate = parse_rate(text.substr(9), text);
  } else if (text.rfind("poisson:", 0) == 0) {
    cfg.mode = SourceMode::kConstant;
    cfg.poisson = true;
    cfg.constant_rate = parse_rate(text.substr(8), text);
  } else {
    throw Error(ErrorCode::kConfig, "unknown protocol mode '" + text + "'");
  }
  return cfg;
}

std::string SourceConfig::mode_label() const {
  switch (mode) {
    case SourceMode::kAcpPlus: return "acp+";
    case SourceMode::kLazy: return "lazy";
    case SourceMode::kConstant:
      return fmt::format("{}:{}", poisson ? "poisson" : "constant", constant_rate);
  }
  return "?";
}

Source::Source(SourceConfig cfg) : cfg_(std::move(cfg)), est_(cfg_.alpha), rng_(cfg_.seed) {
  if (cfg_.mode == SourceMode::kConstant && !(cfg_.constant_rate > 0.0))
    throw Error(ErrorCode::kConfig, "constant mode needs a positive rate");
  if (!(cfg_.initial_rtt > 0.0)) throw Error(ErrorCode::kConfig, "initial_rtt must be positive");
  if (!(cfg_.lazy_timeout_factor > 0.0))
    throw Error(ErrorCode::kConfig, "lazy_timeout_factor must be positive");
  if (!(cfg_.lazy_min_timeout >= 0.0))
    throw Error(ErrorCode::kConfig, "lazy_min_timeout must be non-negative");
  if (cfg_.payload_bytes > kMaxPayload)
    throw Error(ErrorCode::kOversize, "payload_bytes exceeds datagram bound");
  ctl_.lambda = cfg_.mode == SourceMode::kConstant ? cfg_.constant_rate : 1.0 / cfg_.initial_rtt;
  ctl_.epoch_length = epoch_length(ctl_.lambda);
}

UpdatePacket Source::generate(double now) {
  UpdatePacket pkt;
  pkt.seq = next_seq_++;
  pkt.gen_ts_ns = seconds_to_ns(now);
  if (cfg_.materialize_payload) pkt.payload.assign(cfg_.payload_bytes, 0);
  outstanding_.push_back({pkt.seq, pkt.gen_ts_ns, now});
  ++counters_.sent;
  note_backlog(now);
  return pkt;
}

void Source::note_backlog(double now) {
  const int b = backlog();
  if (bootstrapped_) acc_.set_backlog(now, b);
  if (!cfg_.record_backlog) return;
  if (!backlog_trace_.empty() && backlog_trace_.back().time == now)
    backlog_trace_.back().backlog = b;
  else
    backlog_trace_.push_back({now, b});
}

double Source::generation_gap() {
  if (cfg_.mode == SourceMode::kConstant && cfg_.poisson) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return -std::log1p(-u(rng_)) / cfg_.constant_rate;
  }
  return 1.0 / ctl_.lambda;
}

std::vector<UpdatePacket> Source::start(double now) {
  if (started_) throw Error(ErrorCode::kRuntime, "source already started");
  started_ = true;
  if (cfg_.record_backlog) backlog_trace_.push_back({now, 0});
  std::vector<UpdatePacket> out;
  out.push_back(generate(now));
  last_tick_ = now;
  switch (cfg_.mode) {
    case SourceMode::kConstant:
      next_tick_ = now + generation_gap();
      break;
    case SourceMode::kAcpPlus:
      // Bootstrap: probe at 1/initial_rtt until the first RTT sample arrives.
      next_tick_ = now + cfg_.initial_rtt;
      break;
    case SourceMode::kLazy:
      fallback_ = now + cfg_.initial_rtt;
      break;
  }
  return out;
}

double Source::next_deadline() const { return std::min({next_tick_, next_epoch_, fallback_}); }

std::vector<UpdatePacket> Source::on_timer(double now) {
  std::vector<UpdatePacket> out;
  if (next_tick_ <= now && next_tick_ <= next_epoch_) {
    out.push_back(generate(now));
    last_tick_ = next_tick_;
    next_tick_ = bootstrapped_ || cfg_.mode == SourceMode::kConstant
                     ? last_tick_ + generation_gap()
                     : last_tick_ + cfg_.initial_rtt;
  } else if (next_epoch_ <= now) {
    run_epoch(now);
  } else if (fallback_ <= now) {
    out.push_back(generate(now));
    schedule_after_send(now);
  }
  return out;
}

void Source::schedule_after_send(double now) {
  const double timeout = est_.rtt_bar()
                             ? std::max(cfg_.lazy_timeout_factor * *est_.rtt_bar(), cfg_.lazy_min_timeout)
                             : cfg_.initial_rtt;
  fallback_ = now + timeout;
}

void Source::run_epoch(double now) {
  const double end = next_epoch_;
  double age_avg = ctl_.prev_age_avg;
  double backlog_avg = ctl_.prev_backlog_avg;
  if (!acc_.acks().empty()) {
    age_avg = acc_.age_average(end);
    backlog_avg = acc_.backlog_average(end);
  }

  EpochRecord rec;
  rec.k = ctl_.epoch_index;
  rec.t_k = end;
  if (ctl_.epoch_index == 0) {
    rec.action = "NONE";  // first full epoch only establishes the baseline
  } else if (!est_.z_bar() || !(*est_.z_bar() > 0.0)) {
    rec.action = "HOLD";  // a single ACK so far gives no inter-ACK estimate
  } else {
    const ControlInputs in{backlog_avg - ctl_.prev_backlog_avg, age_avg - ctl_.prev_age_avg,
                           backlog_avg};
    const ControlStep step = control_step(ctl_, in);
    const double lambda = update_lambda(ctl_.lambda, *est_.z_bar(), *est_.rtt_bar(),
                                        step.action.target_backlog_change);
    ctl_ = step.state;
    ctl_.lambda = lambda;
    rec.action = step.action.label();
    rec.target = step.action.target_backlog_change;
    rec.backlog_change = in.backlog_change;
    rec.age_change = in.age_change;
  }
  ctl_.prev_age_avg = age_avg;
  ctl_.prev_backlog_avg = backlog_avg;
  ctl_.epoch_length = epoch_length(ctl_.lambda);
  ctl_.epoch_start = end;
  ++ctl_.epoch_index;
  rec.lambda = ctl_.lambda;
  rec.flag = ctl_.flag;
  rec.gamma = ctl_.gamma;
  epochs_.push_back(std::move(rec));

  acc_ = EpochAccumulator(end, acc_.age_at(end), backlog());
  next_epoch_ = end + ctl_.epoch_length;
  next_tick_ = std::max(now, last_tick_ + 1.0 / ctl_.lambda);
}

AckResult Source::on_ack(const AckPacket& ack, double now) {
  AckResult result;
  if (highest_acked_ && ack.seq <= *highest_acked_) {
    ++counters_.out_of_sequence;
    result.disposition = AckDisposition::kOutOfSequence;
    return result;
  }
  auto violation = [&](std::string why) {
    ++counters_.violations;
    violation_log_.push_back(fmt::format("t={:.6f} seq={}: {}", now, ack.seq, why));
    result.disposition = AckDisposition::kProtocolViolation;
    return result;
  };
  if (ack.seq >= next_seq_ || outstanding_.empty() || ack.seq < outstanding_.front().seq)
    return violation("ACK for an update that was never sent");

  // Outstanding sequence numbers form the contiguous range (highest_acked, next_seq).
  const std::size_t index = ack.seq - outstanding_.front().seq;
  const Outstanding acked = outstanding_[index];
  if (acked.gen_ts_ns != ack.gen_ts_ns) return violation("timestamp echo mismatch");
  if (now < acked.gen_time) return violation("ACK precedes generation time");

  const double rtt = now - acked.gen_time;
  est_.record_ack(now, acked.gen_time);
  counters_.superseded += index;
  ++counters_.acked;
  outstanding_.erase(outstanding_.begin(), outstanding_.begin() + static_cast<long>(index) + 1);
  highest_acked_ = ack.seq;
  acks_.push_back({now, ack.seq, acked.gen_time, rtt});

  switch (cfg_.mode) {
    case SourceMode::kAcpPlus:
      if (!bootstrapped_) {
        bootstrapped_ = true;
        ctl_.lambda = 1.0 / *est_.rtt_bar();
        ctl_.epoch_length = epoch_length(ctl_.lambda);
        ctl_.epoch_start = now;
        ctl_.epoch_index = 0;
        acc_ = EpochAccumulator(now, {now, rtt}, backlog());
        next_epoch_ = now + ctl_.epoch_length;
        last_tick_ = now;
        next_tick_ = now + 1.0 / ctl_.lambda;
      }
      acc_.add_ack(now, rtt);
      note_backlog(now);
      break;
    case SourceMode::kLazy:
      note_backlog(now);
      result.packets.push_back(generate(now));
      schedule_after_send(now);
      break;
    case SourceMode::kConstant:
      note_backlog(now);
      break;
  }
  return result;
}

std::optional<AckPacket> Monitor::on_update(const UpdatePacket& pkt, double now) {
  if (highest_ && pkt.seq <= *highest_) {
    ++discarded_;
    discards_.push_back({now, pkt.seq,
                         pkt.seq == *highest_ ? DiscardReason::kDuplicate : DiscardReason::kOutOfSequence});
    return std::nullopt;
  }
  highest_ = pkt.seq;
  log_.push_back({now, pkt.seq, ns_to_seconds(pkt.gen_ts_ns)});
  AckPacket ack;
  ack.seq = pkt.seq;
  ack.gen_ts_ns = pkt.gen_ts_ns;
  return ack;
}

void Monitor::on_malformed(double now) {
  ++malformed_;
  discards_.push_back({now, 0, DiscardReason::kMalformed});
}

const char* to_string(DiscardReason r) noexcept {
  switch (r) {
    case DiscardReason::kDuplicate: return "duplicate";
    case DiscardReason::kOutOfSequence: return "out_of_sequence";
    case DiscardReason::kMalformed: return "malformed";
  }
  return "?";
}

}  // namespace agectl
