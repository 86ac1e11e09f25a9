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

// Source-side network estimates: smoothed RTT, smoothed inter-ACK gap, and
// the per-epoch time averages of estimated age and backlog.

#pragma once

#include <optional>
#include <vector>

#include "agectl/error.hpp"

namespace agectl {

inline constexpr double kDefaultEwmaAlpha = 0.875;

// alpha * prev + (1 - alpha) * sample. Throws kInvalidArgument on a
// negative sample or alpha outside (0, 1).
double ewma_update(double prev, double sample, double alpha);

// Same, but an absent previous value takes the sample as-is.
double ewma_update(std::optional<double> prev, double sample, double alpha);

class EstimatorState {
 public:
  explicit EstimatorState(double alpha = kDefaultEwmaAlpha);

  // Feeds one in-sequence ACK. The RTT sample is ack_time - gen_time; the
  // inter-ACK sample is the gap since the previous recorded ACK.
  // Throws kClockAnomaly when ack_time < gen_time.
  void record_ack(double ack_time, double gen_time);

  std::optional<double> rtt_bar() const { return rtt_bar_; }
  std::optional<double> z_bar() const { return z_bar_; }
  std::optional<double> last_ack_time() const { return last_ack_time_; }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  std::optional<double> rtt_bar_;
  std::optional<double> z_bar_;
  std::optional<double> last_ack_time_;
};

struct AckEvent {
  double ack_time = 0;
  double rtt_sample = 0;
};

struct BacklogStep {
  double time = 0;
  int backlog = 0;
};

// Instantaneous estimated age at a given instant. Used to carry the sawtooth
// across an epoch boundary.
struct AgePoint {
  double time = 0;
  double age = 0;
};

// Measurements collected over one control epoch [epoch_start, epoch_end].
class EpochAccumulator {
 public:
  EpochAccumulator() = default;
  EpochAccumulator(double epoch_start, AgePoint age_at_start, int backlog_at_start);

  void add_ack(double ack_time, double rtt_sample);
  void set_backlog(double time, int backlog);

  // Time-average of the estimated-age sawtooth: resets to each ACK's RTT
  // sample and grows with slope one in between. Throws kNoSamples when the
  // epoch saw no ACK, kInvalidArgument when epoch_end <= epoch_start.
  double age_average(double epoch_end) const;

  // Time-weighted mean of the backlog step function.
  double backlog_average(double epoch_end) const;

  // Sawtooth value at `time` (>= last recorded ACK), for seeding the next epoch.
  AgePoint age_at(double time) const;

  double epoch_start() const { return epoch_start_; }
  int current_backlog() const { return steps_.empty() ? 0 : steps_.back().backlog; }
  const std::vector<AckEvent>& acks() const { return acks_; }
  const std::vector<BacklogStep>& backlog_steps() const { return steps_; }

 private:
  double epoch_start_ = 0;
  AgePoint start_age_{};
  std::vector<AckEvent> acks_;
  std::vector<BacklogStep> steps_;
};

}  // namespace agectl
