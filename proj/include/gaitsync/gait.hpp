#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gaitsync/tsch.hpp"

namespace gaitsync {

/// Gait control scheme: root-timed, free-running local clocks, or ASN-referenced.
enum class Scheme { Centralized, OpenLoop, Synchronized };

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

enum class Tripod { T1, T2 };
enum class JointGroup { Hip, Knee };
enum class Action { Down, Up, Back, Forward };
enum class Controller { M1, M2 };
enum class GaitHealth { InSync, Degraded, Opposed };

/// Turn state applied to the knee sweep.
enum class Steering { Forward, Left, Right };

struct GaitConfig {
  std::uint32_t period_slots = 68;  // 1.02 s at 15 ms/slot
  TrueTime period = TrueTime::from_us(1'000'000);
  std::array<double, 4> event_offsets{0.0, 0.25, 0.5, 0.75};
  double hip_down_deg = 30.0;
  double hip_up_deg = -30.0;
  double knee_back_deg = 25.0;
  double knee_forward_deg = -25.0;

  /// Throws ConfigError when the offsets or period cannot yield a half-period
  /// symmetric schedule.
  void validate() const;

  /// Slot offset of a phase within an ASN-referenced period.
  std::uint32_t slot_offset(int phase) const;

  /// Local-time offset of a phase within a clock-referenced period.
  TrueTime time_offset(int phase) const;
};

struct GaitEvent {
  int phase_index = 0;
  Tripod tripod = Tripod::T1;
  JointGroup joint_group = JointGroup::Hip;
  Action action = Action::Down;
  double target_angle_deg = 0.0;

  bool operator==(const GaitEvent&) const = default;
};

struct ServoSetpoint {
  TrueTime true_time;
  Controller controller = Controller::M1;
  int servo_id = 0;
  double angle_deg = 0.0;

  bool operator==(const ServoSetpoint&) const = default;
};

/// One gait synchronization measurement: start(M2) - start(M1) for period k.
/// Positive means M1 began the period first.
struct ErrorSample {
  TrueTime true_time;
  std::uint64_t period_index = 0;
  double error_us = 0.0;

  bool operator==(const ErrorSample&) const = default;
};

/// Legs are numbered left front/middle/rear (0-2) then right front/middle/rear (3-5).
/// Hip servo of leg i is servo i; knee servo is 6 + i.
constexpr std::array<int, 3> kTripodLegs[2] = {{0, 2, 4}, {3, 5, 1}};
inline bool is_left_leg(int leg) { return leg < 3; }
inline int hip_servo(int leg) { return leg; }
inline int knee_servo(int leg) { return 6 + leg; }

/// Eight events per period, ordered by phase then tripod.
std::vector<GaitEvent> build_schedule(const GaitConfig& config);

std::vector<GaitEvent> events_for_controller(const std::vector<GaitEvent>& schedule, Controller controller);

inline Controller controller_for(JointGroup g) { return g == JointGroup::Hip ? Controller::M1 : Controller::M2; }

/// Individual servo setpoints for one gait event under the current steering.
std::vector<ServoSetpoint> expand_event(const GaitEvent& event, const GaitConfig& config, Steering steering,
                                        TrueTime at);

/// True time at which phase `phase` of period k begins on a gait-armed node.
/// OpenLoop reads the node's free-running timer; Synchronized reads its ASN.
TrueTime phase_true_time(const MoteState& node, const GaitConfig& config, std::uint64_t k, int phase,
                         Scheme scheme);

TrueTime period_start_true_time(const MoteState& node, const GaitConfig& config, std::uint64_t k, Scheme scheme);

/// start(m2, k) - start(m1, k) in microseconds.
double gait_sync_error(const MoteState& m1, const MoteState& m2, const GaitConfig& config, std::uint64_t k,
                       Scheme scheme);

GaitHealth classify_gait(double error_us, double period_s);

std::string_view health_name(GaitHealth h);

}  // namespace gaitsync
