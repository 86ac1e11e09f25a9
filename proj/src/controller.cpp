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

#include "agectl/controller.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "agectl/error.hpp"

namespace agectl {

std::string_view to_string(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::kInc: return "INC";
    case ActionKind::kDec: return "DEC";
    case ActionKind::kMdec: return "MDEC";
  }
  return "?";
}

std::string ControlAction::label() const {
  if (kind == ActionKind::kMdec) return fmt::format("MDEC({})", gamma);
  return std::string(to_string(kind));
}

namespace {

ControlAction inc() { return {ActionKind::kInc, 0, 1.0}; }
ControlAction dec() { return {ActionKind::kDec, 0, -1.0}; }
// Beyond 52 halvings 1 - 2^-gamma rounds to exactly one in double precision.
constexpr int kMaxGamma = 52;

ControlAction mdec(int gamma, double backlog_avg) {
  return {ActionKind::kMdec, gamma, -(1.0 - std::ldexp(1.0, -gamma)) * backlog_avg};
}

}  // namespace

ControlStep control_step(const ControllerState& state, const ControlInputs& in) {
  ControlStep out{{}, state};
  ControllerState& next = out.state;
  const bool backlog_up = in.backlog_change > 0.0;
  const bool age_up = in.age_change > 0.0;

  if (backlog_up && age_up) {
    if (next.flag) {
      next.gamma = std::min(next.gamma + 1, kMaxGamma);
      out.action = mdec(next.gamma, in.backlog_avg);
    } else {
      out.action = dec();
    }
    next.flag = true;
  } else if (backlog_up != age_up) {
    out.action = inc();
    next.flag = false;
    next.gamma = 0;
  } else if (next.flag && next.gamma > 0) {
    // Both fell while a multiplicative decrease is in progress: repeat it
    // with the same gamma and keep the flag.
    out.action = mdec(next.gamma, in.backlog_avg);
  } else {
    out.action = dec();
    next.flag = false;
    next.gamma = 0;
  }
  return out;
}

double update_lambda(double prev_lambda, double z_bar, double rtt_bar, double target) {
  if (!(prev_lambda > 0.0) || !(z_bar > 0.0) || !(rtt_bar > 0.0))
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("update_lambda needs positive inputs (lambda={}, z_bar={}, rtt_bar={})",
                            prev_lambda, z_bar, rtt_bar));
  const double raw = 1.0 / z_bar + target / rtt_bar;
  if (raw < kLambdaMinFactor * prev_lambda) return kLambdaMinFactor * prev_lambda;
  if (raw > kLambdaMaxFactor * prev_lambda) return kLambdaMaxFactor * prev_lambda;
  return raw;
}

double epoch_length(double lambda) {
  if (!(lambda > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "epoch length needs a positive rate");
  return kEpochUpdates / lambda;
}

std::string to_csv_row(const EpochRecord& r) {
  return fmt::format("{},{:.9f},{:.6f},{},{:.6f},{:.6f},{:.9f},{},{}", r.k, r.t_k, r.lambda,
                     r.action, r.target, r.backlog_change, r.age_change, r.flag ? 1 : 0,
                     r.gamma);
}

}  // namespace agectl
