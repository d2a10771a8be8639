#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gaitsync/gait.hpp"
#include "oracles.hpp"

using namespace gaitsync;

namespace {

TrueTime sec(double s) { return TrueTime::from_seconds(s); }

MoteState armed(double ppm, GaitArm arm, NodeId id = 1) {
  MoteState m = make_child(id, 0, make_clock(ppm, 0, 0));
  m.gait = arm;
  return m;
}

Action t2_counterpart(Action a) {
  switch (a) {
    case Action::Down: return Action::Up;
    case Action::Up: return Action::Down;
    case Action::Back: return Action::Forward;
    case Action::Forward: return Action::Back;
  }
  return a;
}

// A random config that passes validation, with offsets on a 1/1000 grid.
GaitConfig random_config() {
  for (;;) {
    GaitConfig c;
    c.period_slots = static_cast<std::uint32_t>(2 * oracle::uniform_int(2, 200));
    c.period = TrueTime::from_us(2 * oracle::uniform_int(100'000, 2'000'000));
    if (oracle::uniform_int(0, 1) == 0) {
      c.period_slots = static_cast<std::uint32_t>(4 * oracle::uniform_int(1, 100));
    } else {
      const double o0 = static_cast<double>(oracle::uniform_int(0, 498)) / 1000.0;
      const double o1 = static_cast<double>(oracle::uniform_int(static_cast<std::int64_t>(o0 * 1000) + 1, 499)) / 1000.0;
      c.event_offsets = {o0, o1, o0 + 0.5, o1 + 0.5};
    }
    try {
      c.validate();
      return c;
    } catch (const ConfigError&) {
    }
  }
}

}  // namespace

TEST_CASE("default schedule has the dual tripod layout") {
  const auto s = build_schedule(GaitConfig{});
  REQUIRE(s.size() == 8);
  const std::vector<GaitEvent> expected{
      {0, Tripod::T1, JointGroup::Hip, Action::Down, 30.0},   {0, Tripod::T2, JointGroup::Hip, Action::Up, -30.0},
      {1, Tripod::T1, JointGroup::Knee, Action::Back, 25.0},  {1, Tripod::T2, JointGroup::Knee, Action::Forward, -25.0},
      {2, Tripod::T1, JointGroup::Hip, Action::Up, -30.0},    {2, Tripod::T2, JointGroup::Hip, Action::Down, 30.0},
      {3, Tripod::T1, JointGroup::Knee, Action::Forward, -25.0}, {3, Tripod::T2, JointGroup::Knee, Action::Back, 25.0},
  };
  CHECK(s == expected);
}

TEST_CASE("hip events sit at phases 0 and 1/2, knee events at 1/4 and 3/4") {
  const GaitConfig c;
  CHECK(c.slot_offset(0) == 0);
  CHECK(c.slot_offset(1) == 17);
  CHECK(c.slot_offset(2) == 34);
  CHECK(c.slot_offset(3) == 51);
  CHECK(c.time_offset(1) == sec(0.25));
  CHECK(c.time_offset(3) == sec(0.75));
  for (const auto& e : build_schedule(c))
    CHECK((e.joint_group == JointGroup::Hip) == (e.phase_index % 2 == 0));
}

TEST_CASE("minimal period places phases on consecutive slots") {
  GaitConfig c;
  c.period_slots = 4;
  for (int p = 0; p < 4; ++p) CHECK(c.slot_offset(p) == static_cast<std::uint32_t>(p));
  CHECK_NOTHROW(build_schedule(c));
}

TEST_CASE("invalid configs are rejected") {
  auto with = [](auto mutate) {
    GaitConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) { c.period_slots = 2; })), ConfigError);
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) { c.period_slots = 70; })), ConfigError);
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) { c.period_slots = 67; })), ConfigError);
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) { c.event_offsets = {0.0, 0.3, 0.2, 0.8}; })), ConfigError);
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) { c.event_offsets = {0.0, 0.2, 0.5, 0.8}; })), ConfigError);
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) { c.event_offsets = {0.0, 0.25, 0.5, 1.0}; })), ConfigError);
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) { c.period = TrueTime{}; })), ConfigError);
  // Two phases would share slot 0.
  CHECK_THROWS_AS(build_schedule(with([](GaitConfig& c) {
                    c.period_slots = 4;
                    c.event_offsets = {0.0, 0.1, 0.5, 0.6};
                  })),
                  ConfigError);
}

TEST_CASE("controller partition") {
  const auto s = build_schedule(GaitConfig{});
  const auto m1 = events_for_controller(s, Controller::M1);
  const auto m2 = events_for_controller(s, Controller::M2);
  CHECK(m1.size() == 4);
  CHECK(m2.size() == 4);
  for (const auto& e : m1) CHECK(e.joint_group == JointGroup::Hip);
  for (const auto& e : m2) {
    CHECK(e.joint_group == JointGroup::Knee);
    CHECK((e.phase_index == 1 || e.phase_index == 3));
  }
  CHECK(events_for_controller({}, Controller::M1).empty());
}

TEST_CASE("tripod antisymmetry and partition hold for random configs") {
  for (int i = 0; i < 500; ++i) {
    const GaitConfig c = random_config();
    const auto s = build_schedule(c);
    REQUIRE(s.size() == 8);
    for (const auto& e : s) {
      if (e.tripod != Tripod::T1) continue;
      const int shifted = (e.phase_index + 2) % 4;
      const auto match = std::find_if(s.begin(), s.end(), [&](const GaitEvent& o) {
        return o.tripod == Tripod::T2 && o.phase_index == shifted;
      });
      REQUIRE(match != s.end());
      REQUIRE(match->action == e.action);
      REQUIRE(match->joint_group == e.joint_group);
      // At the same phase the two tripods do opposite things.
      const auto same = std::find_if(s.begin(), s.end(), [&](const GaitEvent& o) {
        return o.tripod == Tripod::T2 && o.phase_index == e.phase_index;
      });
      REQUIRE(same->action == t2_counterpart(e.action));
    }
    for (int p = 0; p < 2; ++p) {
      REQUIRE(c.slot_offset(p + 2) - c.slot_offset(p) == c.period_slots / 2);
      REQUIRE((c.time_offset(p + 2) - c.time_offset(p)).ns() * 2 == c.period.ns());
    }
    const auto m1 = events_for_controller(s, Controller::M1);
    const auto m2 = events_for_controller(s, Controller::M2);
    REQUIRE(m1.size() + m2.size() == s.size());
    for (const auto& e : m1) REQUIRE(std::find(m2.begin(), m2.end(), e) == m2.end());
  }
}

TEST_CASE("open-loop period starts follow the free-running timer") {
  const GaitConfig c;
  const auto node = armed(0, GaitArm{0, 0});
  CHECK(period_start_true_time(node, c, 10, Scheme::OpenLoop) == sec(10.0));
  CHECK(phase_true_time(node, c, 10, 1, Scheme::OpenLoop) == sec(10.25));

  // 5 ppm apart: starts separate by 5 us per elapsed second.
  const auto m1 = armed(-5, GaitArm{0, 0}, 1);
  const auto m2 = armed(0, GaitArm{0, 0}, 2);
  for (std::uint64_t k : {1ULL, 100ULL, 400ULL}) {
    const double e = gait_sync_error(m1, m2, c, k, Scheme::OpenLoop);
    CHECK(std::fabs(e - oracle::linear_drift_us(-5.0, static_cast<double>(k))) < 2 * kTickUs);
  }
  CHECK(gait_sync_error(m2, m2, c, 77, Scheme::OpenLoop) == 0.0);
}

TEST_CASE("synchronized period starts follow the slot grid") {
  const GaitConfig c;
  const auto node = armed(0, GaitArm{68, 0});
  CHECK(period_start_true_time(node, c, 2, Scheme::Synchronized) == slot_boundary_true_time(node, 68 + 2 * 68));
  CHECK(phase_true_time(node, c, 0, 3, Scheme::Synchronized) == slot_boundary_true_time(node, 68 + 51));

  // Both children resynced at the same instant stay within the window bound.
  const auto root = make_root(0, make_clock(0, 0, 0));
  auto m1 = armed(-3, GaitArm{68, 0}, 1), m2 = armed(0, GaitArm{68, 0}, 2);
  resync_to_parent(m1, root, sec(0.5));
  resync_to_parent(m2, root, sec(0.5));
  for (std::uint64_t k = 0; k < 29; ++k)
    CHECK(std::fabs(gait_sync_error(m1, m2, c, k, Scheme::Synchronized)) < 121.0);

  MoteState unarmed = make_child(3, 0, make_clock(0, 0, 0));
  CHECK_THROWS_AS(period_start_true_time(unarmed, c, 0, Scheme::Synchronized), HarnessError);
}

TEST_CASE("classify_gait examples") {
  CHECK(classify_gait(2000, 1.0) == GaitHealth::InSync);
  CHECK(classify_gait(500000, 1.0) == GaitHealth::Opposed);
  CHECK(classify_gait(-500000, 1.0) == GaitHealth::Opposed);
  CHECK(classify_gait(0, 1.0) == GaitHealth::InSync);
  CHECK(classify_gait(200000, 1.0) == GaitHealth::Degraded);
  CHECK(classify_gait(1500000, 1.0) == GaitHealth::Opposed);
  CHECK(health_name(GaitHealth::Degraded) == "degraded");
}

TEST_CASE("scheme names round-trip") {
  for (Scheme s : {Scheme::Centralized, Scheme::OpenLoop, Scheme::Synchronized})
    CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK(parse_scheme("S1") == Scheme::OpenLoop);
  CHECK_THROWS_AS(parse_scheme("bogus"), ConfigError);
}

TEST_CASE("expanding events into servo setpoints") {
  const GaitConfig c;
  const auto s = build_schedule(c);
  const GaitEvent hip = s[0];   // T1 hip down
  const GaitEvent knee = s[2];  // T1 knee back

  const auto hips = expand_event(hip, c, Steering::Left, sec(1.0));
  REQUIRE(hips.size() == 3);
  for (const auto& sp : hips) {
    CHECK(sp.controller == Controller::M1);
    CHECK(sp.servo_id < 6);
    CHECK(sp.angle_deg == 30.0);  // turning leaves hips alone
  }

  const auto straight = expand_event(knee, c, Steering::Forward, sec(1.0));
  const auto left = expand_event(knee, c, Steering::Left, sec(1.0));
  const auto right = expand_event(knee, c, Steering::Right, sec(1.0));
  REQUIRE(left.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(left[i].controller == Controller::M2);
    CHECK(left[i].servo_id >= 6);
    const bool left_side = left[i].servo_id < 9;
    CHECK(straight[i].angle_deg == 25.0);
    CHECK(left[i].angle_deg == (left_side ? -25.0 : 25.0));
    CHECK(right[i].angle_deg == (left_side ? 25.0 : -25.0));
  }
}
