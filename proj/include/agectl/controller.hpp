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

// The ACP+ rate controller. Each control epoch maps the change in average
// backlog and average age to a target backlog change, then converts that
// target into a new update rate limited to +/-25% of the previous rate.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agectl {

inline constexpr double kEpochUpdates = 10.0;
inline constexpr double kLambdaMinFactor = 0.75;
inline constexpr double kLambdaMaxFactor = 1.25;

enum class ActionKind { kInc, kDec, kMdec };

std::string_view to_string(ActionKind kind) noexcept;

struct ControlAction {
  ActionKind kind = ActionKind::kInc;
  int gamma = 0;                        // meaningful for kMdec only
  double target_backlog_change = 0.0;  // b*_{k+1}

  std::string label() const;  // "INC", "DEC", "MDEC(2)"
};

struct ControlInputs {
  double backlog_change = 0.0;  // B_k - B_{k-1}
  double age_change = 0.0;      // Delta_k - Delta_{k-1}, seconds
  double backlog_avg = 0.0;     // B_k, scaled by MDEC
};

struct ControllerState {
  double lambda = 1.0;  // updates per second
  bool flag = false;
  int gamma = 0;
  double prev_age_avg = 0.0;
  double prev_backlog_avg = 0.0;
  std::int64_t epoch_index = 0;
  double epoch_length = kEpochUpdates;
  double epoch_start = 0.0;
};

struct ControlStep {
  ControlAction action;
  ControllerState state;
};

// Pure function of (state, inputs). A zero change in either backlog or age
// counts as a non-positive change.
ControlStep control_step(const ControllerState& state, const ControlInputs& in);

// clamp(1/z_bar + target/rtt_bar, 0.75 prev, 1.25 prev). Throws
// kInvalidArgument on non-positive inputs.
double update_lambda(double prev_lambda, double z_bar, double rtt_bar, double target);

// 10 / lambda: long enough for ten updates at the new rate.
double epoch_length(double lambda);

// One diagnostic row per control epoch.
struct EpochRecord {
  std::int64_t k = 0;
  double t_k = 0;
  double lambda = 0;
  std::string action;
  double target = 0;
  double backlog_change = 0;
  double age_change = 0;
  bool flag = false;
  int gamma = 0;
};

inline constexpr std::string_view kEpochCsvHeader =
    "k,t_k,lambda,action,target,b_k,delta_k,flag,gamma";

std::string to_csv_row(const EpochRecord& r);

}  // namespace agectl
