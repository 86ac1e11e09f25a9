#include "agectl/controller.hpp"
#include "agectl/error.hpp"

#include <random>

#include "doctest.h"

using namespace agectl;

namespace {

ControllerState with(bool flag, int gamma) {
  ControllerState s;
  s.lambda = 10.0;
  s.flag = flag;
  s.gamma = gamma;
  s.epoch_index = 3;
  return s;
}

}  // namespace

TEST_CASE("backlog and age both rising: DEC first, then MDEC") {
  auto step = control_step(with(false, 0), {0.4, 0.002, 4.0});
  CHECK(step.action.kind == ActionKind::kDec);
  CHECK(step.action.target_backlog_change == -1.0);
  CHECK(step.state.flag);
  CHECK(step.state.gamma == 0);

  step = control_step(with(true, 1), {0.4, 0.002, 4.0});
  CHECK(step.action.kind == ActionKind::kMdec);
  CHECK(step.action.gamma == 2);
  CHECK(step.action.target_backlog_change == doctest::Approx(-3.0));
  CHECK(step.action.label() == "MDEC(2)");
  CHECK(step.state.flag);
  CHECK(step.state.gamma == 2);
}

TEST_CASE("opposite signs increase") {
  auto step = control_step(with(true, 2), {-0.3, 0.001, 1.0});
  CHECK(step.action.kind == ActionKind::kInc);
  CHECK(step.action.target_backlog_change == 1.0);
  CHECK_FALSE(step.state.flag);
  CHECK(step.state.gamma == 0);

  step = control_step(with(true, 2), {0.3, -0.001, 1.0});
  CHECK(step.action.kind == ActionKind::kInc);
  CHECK_FALSE(step.state.flag);
  CHECK(step.state.gamma == 0);
}

TEST_CASE("both falling") {
  auto step = control_step(with(true, 0), {-0.3, -0.001, 2.0});
  CHECK(step.action.kind == ActionKind::kDec);
  CHECK_FALSE(step.state.flag);
  CHECK(step.state.gamma == 0);

  // Flag set with gamma > 0 repeats MDEC without touching flag or gamma.
  step = control_step(with(true, 3), {-0.3, -0.001, 8.0});
  CHECK(step.action.kind == ActionKind::kMdec);
  CHECK(step.action.target_backlog_change == doctest::Approx(-7.0));
  CHECK(step.state.flag);
  CHECK(step.state.gamma == 3);
}

TEST_CASE("zero differences count as non-positive") {
  auto step = control_step(with(false, 0), {0.0, 0.0, 1.0});
  CHECK(step.action.kind == ActionKind::kDec);
  step = control_step(with(false, 0), {0.0, 0.01, 1.0});
  CHECK(step.action.kind == ActionKind::kInc);
  step = control_step(with(false, 0), {0.5, 0.0, 1.0});
  CHECK(step.action.kind == ActionKind::kInc);
}

TEST_CASE("update_lambda") {
  CHECK(update_lambda(10, 0.1, 0.1, 1.0) == doctest::Approx(12.5));
  CHECK(update_lambda(10, 0.1, 0.1, 0.0) == doctest::Approx(10.0));
  CHECK(update_lambda(10, 0.2, 0.1, -1.0) == doctest::Approx(7.5));
  CHECK(update_lambda(10, 0.1, 0.5, 0.5) == doctest::Approx(11.0));
  CHECK_THROWS_AS(update_lambda(10, 0.0, 0.1, 1.0), Error);
  CHECK_THROWS_AS(update_lambda(10, 0.1, -0.1, 1.0), Error);
  CHECK_THROWS_AS(update_lambda(0, 0.1, 0.1, 1.0), Error);
}

TEST_CASE("epoch_length") {
  CHECK(epoch_length(10) == doctest::Approx(1.0));
  CHECK(epoch_length(100) == doctest::Approx(0.1));
  CHECK(epoch_length(3) > epoch_length(4));
  CHECK_THROWS_AS(epoch_length(0), Error);
}

TEST_CASE("MDEC never asks for more than the whole backlog") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> b(0.01, 50.0);
  for (int gamma = 0; gamma < 60; ++gamma) {
    const double backlog = b(rng);
    auto step = control_step(with(true, gamma), {1.0, 1.0, backlog});
    CHECK(std::abs(step.action.target_backlog_change) < backlog);
  }
}

TEST_CASE("control_step is replayable") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  ControllerState s = with(false, 0);
  for (int i = 0; i < 1000; ++i) {
    const ControlInputs in{d(rng), d(rng), 1.0 + d(rng)};
    const auto a = control_step(s, in);
    const auto b = control_step(s, in);
    CHECK(a.action.kind == b.action.kind);
    CHECK(a.action.target_backlog_change == b.action.target_backlog_change);
    CHECK(a.state.flag == b.state.flag);
    CHECK(a.state.gamma == b.state.gamma);
    CHECK((a.state.flag || a.state.gamma == 0));
    s = a.state;
  }
}

TEST_CASE("epoch CSV row") {
  EpochRecord r;
  r.k = 2;
  r.t_k = 1.5;
  r.lambda = 12.5;
  r.action = "INC";
  r.target = 1;
  r.backlog_change = -0.25;
  r.age_change = 0.001;
  r.flag = false;
  r.gamma = 0;
  CHECK(to_csv_row(r) == "2,1.500000000,12.500000,INC,1.000000,-0.250000,0.001000000,0,0");
}
