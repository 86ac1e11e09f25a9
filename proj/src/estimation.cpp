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

#include "agectl/estimation.hpp"

#include <algorithm>
#include <string>

namespace agectl {
namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error(ErrorCode::kInvalidArgument,
                "EWMA weight must lie in (0,1), got " + std::to_string(alpha));
}

}  // namespace

double ewma_update(double prev, double sample, double alpha) {
  check_alpha(alpha);
  if (!(sample >= 0.0))
    throw Error(ErrorCode::kInvalidArgument,
                "EWMA sample must be non-negative, got " + std::to_string(sample));
  return alpha * prev + (1.0 - alpha) * sample;
}

double ewma_update(std::optional<double> prev, double sample, double alpha) {
  if (!prev) {
    check_alpha(alpha);
    if (!(sample >= 0.0))
      throw Error(ErrorCode::kInvalidArgument, "EWMA sample must be non-negative");
    return sample;
  }
  return ewma_update(*prev, sample, alpha);
}

EstimatorState::EstimatorState(double alpha) : alpha_(alpha) { check_alpha(alpha); }

void EstimatorState::record_ack(double ack_time, double gen_time) {
  if (ack_time < gen_time)
    throw Error(ErrorCode::kClockAnomaly,
                "ACK received at " + std::to_string(ack_time) +
                    " before its update was generated at " + std::to_string(gen_time));
  if (last_ack_time_ && ack_time < *last_ack_time_)
    throw Error(ErrorCode::kClockAnomaly, "ACK times went backwards");
  rtt_bar_ = ewma_update(rtt_bar_, ack_time - gen_time, alpha_);
  if (last_ack_time_) z_bar_ = ewma_update(z_bar_, ack_time - *last_ack_time_, alpha_);
  last_ack_time_ = ack_time;
}

EpochAccumulator::EpochAccumulator(double epoch_start, AgePoint age_at_start,
                                   int backlog_at_start)
    : epoch_start_(epoch_start), start_age_(age_at_start) {
  steps_.push_back({epoch_start, backlog_at_start});
}

void EpochAccumulator::add_ack(double ack_time, double rtt_sample) {
  if (!acks_.empty() && ack_time < acks_.back().ack_time)
    throw Error(ErrorCode::kInvalidArgument, "ACK events must be time-ordered");
  acks_.push_back({ack_time, rtt_sample});
}

void EpochAccumulator::set_backlog(double time, int backlog) {
  if (backlog < 0) throw Error(ErrorCode::kInvalidArgument, "negative backlog");
  if (!steps_.empty() && time < steps_.back().time)
    throw Error(ErrorCode::kInvalidArgument, "backlog steps must be time-ordered");
  if (!steps_.empty() && steps_.back().time == time) {
    steps_.back().backlog = backlog;
    return;
  }
  steps_.push_back({time, backlog});
}

double EpochAccumulator::age_average(double epoch_end) const {
  if (!(epoch_end > epoch_start_))
    throw Error(ErrorCode::kInvalidArgument, "epoch must have positive length");
  if (acks_.empty()) throw Error(ErrorCode::kNoSamples, "no ACKs during epoch");

  double t = epoch_start_;
  double age = start_age_.age + (epoch_start_ - start_age_.time);
  double area = 0.0;
  for (const auto& ack : acks_) {
    const double until = std::min(ack.ack_time, epoch_end);
    if (until > t) {
      const double width = until - t;
      area += width * (age + 0.5 * width);
      age += width;
      t = until;
    }
    if (ack.ack_time > epoch_end) break;
    age = ack.rtt_sample;
  }
  if (epoch_end > t) {
    const double width = epoch_end - t;
    area += width * (age + 0.5 * width);
  }
  return area / (epoch_end - epoch_start_);
}

double EpochAccumulator::backlog_average(double epoch_end) const {
  if (!(epoch_end > epoch_start_))
    throw Error(ErrorCode::kInvalidArgument, "epoch must have positive length");
  if (steps_.empty())
    throw Error(ErrorCode::kInvalidArgument, "backlog step function is empty");
  double area = 0.0;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const double from = std::max(steps_[i].time, epoch_start_);
    const double to = i + 1 < steps_.size() ? std::min(steps_[i + 1].time, epoch_end) : epoch_end;
    if (to > from) area += (to - from) * steps_[i].backlog;
  }
  return area / (epoch_end - epoch_start_);
}

AgePoint EpochAccumulator::age_at(double time) const {
  if (acks_.empty()) return {time, start_age_.age + (time - start_age_.time)};
  const auto& last = acks_.back();
  return {time, last.rtt_sample + (time - last.ack_time)};
}

}  // namespace agectl
