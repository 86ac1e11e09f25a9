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

#include "agectl/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "agectl/error.hpp"

namespace agectl {

double AgeTrace::age_at(double t) const {
  if (breakpoints.empty() || t < breakpoints.front().time)
    throw Error(ErrorCode::kInvalidArgument, "time outside the age trace");
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t,
                             [](double v, const AgeBreakpoint& b) { return v < b.time; });
  const auto& b = *std::prev(it);
  return b.age + (t - b.time);
}

AgeTrace age_trace_from_observations(std::span<const Observation> log, const Horizon& horizon) {
  if (log.empty()) throw Error(ErrorCode::kNoSamples, "no deliveries to build an age trace from");
  AgeTrace trace;
  auto& bp = trace.breakpoints;
  bp.reserve(2 * log.size() + 1);
  bp.push_back({log.front().receive_time, log.front().receive_time - log.front().gen_time});
  for (std::size_t i = 1; i < log.size(); ++i) {
    const auto& obs = log[i];
    if (obs.receive_time > horizon.end) break;
    if (obs.receive_time < bp.back().time)
      throw Error(ErrorCode::kInvalidArgument, "deliveries must be time-ordered");
    const double before = bp.back().age + (obs.receive_time - bp.back().time);
    const double after = obs.receive_time - obs.gen_time;
    if (after < 0) throw Error(ErrorCode::kClockAnomaly, "delivery precedes generation");
    bp.push_back({obs.receive_time, before});
    bp.push_back({obs.receive_time, after});
  }
  if (horizon.end > bp.back().time)
    bp.push_back({horizon.end, bp.back().age + (horizon.end - bp.back().time)});
  return trace;
}

double time_average_age(const AgeTrace& trace, const Horizon& horizon) {
  if (!(horizon.end > horizon.start))
    throw Error(ErrorCode::kInvalidArgument, "empty averaging horizon");
  const auto& bp = trace.breakpoints;
  if (bp.empty() || bp.front().time > horizon.start || bp.back().time < horizon.end)
    throw Error(ErrorCode::kInvalidArgument, "age trace does not cover the horizon");

  double area = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const auto& a = bp[i];
    const auto& b = bp[i + 1];
    if (b.time <= a.time) continue;
    const double lo = std::max(a.time, horizon.start);
    const double hi = std::min(b.time, horizon.end);
    if (hi <= lo) continue;
    const double slope = (b.age - a.age) / (b.time - a.time);
    const double v_lo = a.age + slope * (lo - a.time);
    const double v_hi = a.age + slope * (hi - a.time);
    area += 0.5 * (v_lo + v_hi) * (hi - lo);
  }
  return area / horizon.length();
}

double jain_fairness(std::span<const double> values) {
  double sum = 0.0, sum_sq = 0.0;
  bool any_positive = false;
  for (double x : values) {
    if (x < 0 || !std::isfinite(x))
      throw Error(ErrorCode::kInvalidArgument, "fairness inputs must be finite and non-negative");
    any_positive |= x > 0;
    sum += x;
    sum_sq += x * x;
  }
  if (!any_positive)
    throw Error(ErrorCode::kInvalidArgument, "fairness needs at least one positive value");
  return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

double time_average_backlog(std::span<const BacklogStep> steps, const Horizon& horizon) {
  if (!(horizon.end > horizon.start))
    throw Error(ErrorCode::kInvalidArgument, "empty averaging horizon");
  double area = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double lo = std::max(steps[i].time, horizon.start);
    const double hi = i + 1 < steps.size() ? std::min(steps[i + 1].time, horizon.end) : horizon.end;
    if (hi > lo) area += (hi - lo) * steps[i].backlog;
  }
  return area / horizon.length();
}

const char* to_string(AgeSemantics s) noexcept {
  return s == AgeSemantics::kOneWay ? "one_way" : "round_trip";
}

namespace {

double mean_gap(const std::vector<double>& times) {
  if (times.size() < 2) return 0.0;
  return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

}  // namespace

SummaryStats summarize(const SourceSessionLog& source, std::span<const Delivery> monitor,
                       const Horizon& horizon, AgeSemantics semantics) {
  if (!(horizon.end > horizon.start))
    throw Error(ErrorCode::kInvalidArgument, "empty summary horizon");
  SummaryStats s;
  s.semantics = semantics;
  s.sent_count = source.sent;

  std::vector<Observation> obs;
  if (semantics == AgeSemantics::kOneWay) {
    obs.reserve(monitor.size());
    for (const auto& d : monitor) obs.push_back({d.receive_time, d.gen_time});
  } else {
    obs.reserve(source.acks.size());
    for (const auto& a : source.acks) obs.push_back({a.ack_time, a.gen_time});
  }

  std::vector<double> receive_times;
  double delay_sum = 0.0;
  for (const auto& o : obs) {
    if (o.receive_time < horizon.start || o.receive_time > horizon.end) continue;
    receive_times.push_back(o.receive_time);
    delay_sum += o.receive_time - o.gen_time;
  }
  s.delivered_count = receive_times.size();
  if (!receive_times.empty()) s.avg_delay = delay_sum / static_cast<double>(receive_times.size());
  s.avg_inter_delivery = mean_gap(receive_times);
  s.throughput_bps = static_cast<double>(s.delivered_count) *
                     static_cast<double>(source.payload_bytes) * 8.0 / horizon.length();

  std::vector<double> ack_times;
  double rtt_sum = 0.0;
  for (const auto& a : source.acks) {
    if (a.ack_time < horizon.start || a.ack_time > horizon.end) continue;
    ack_times.push_back(a.ack_time);
    rtt_sum += a.rtt;
  }
  if (!ack_times.empty()) s.avg_rtt = rtt_sum / static_cast<double>(ack_times.size());
  s.avg_inter_ack = mean_gap(ack_times);

  if (!source.backlog.empty()) s.backlog_avg = time_average_backlog(source.backlog, horizon);

  if (!obs.empty() && obs.front().receive_time < horizon.end) {
    const Horizon covered{std::max(horizon.start, obs.front().receive_time), horizon.end};
    if (covered.end > covered.start)
      s.avg_age = time_average_age(age_trace_from_observations(obs, covered), covered);
  }

  if (s.sent_count > 0) {
    const double delivered_total = static_cast<double>(obs.size());
    s.loss_fraction = std::clamp(1.0 - delivered_total / static_cast<double>(s.sent_count), 0.0, 1.0);
  }
  return s;
}

Horizon trimmed_horizon(double start, double end, double warmup_fraction) {
  if (!(end > start)) throw Error(ErrorCode::kInvalidArgument, "empty run interval");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "warm-up fraction must lie in [0,1)");
  return {start + warmup_fraction * (end - start), end};
}

}  // namespace agectl
