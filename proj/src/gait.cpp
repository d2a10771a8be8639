#include "gaitsync/gait.hpp"

#include <cmath>
#include <sstream>

namespace gaitsync {

namespace {

using i128 = __int128;

constexpr std::array<double, 4> kDefaultOffsets{0.0, 0.25, 0.5, 0.75};

// Tripod 1 action at each phase; tripod 2 runs the same cycle two phases later.
constexpr std::array<Action, 4> kT1Cycle{Action::Down, Action::Back, Action::Up, Action::Forward};

JointGroup group_of(Action a) { return (a == Action::Down || a == Action::Up) ? JointGroup::Hip : JointGroup::Knee; }

double angle_of(Action a, const GaitConfig& c) {
  switch (a) {
    case Action::Down: return c.hip_down_deg;
    case Action::Up: return c.hip_up_deg;
    case Action::Back: return c.knee_back_deg;
    case Action::Forward: return c.knee_forward_deg;
  }
  return 0.0;
}

// Tick during which `ns` of local time elapses.
Ticks local_ns_to_ticks(i128 ns) { return static_cast<Ticks>(ns * kNominalHz / 1'000'000'000); }

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Centralized: return "centralized";
    case Scheme::OpenLoop: return "open-loop";
    case Scheme::Synchronized: return "synchronized";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "centralized" || name == "S0") return Scheme::Centralized;
  if (name == "open-loop" || name == "S1") return Scheme::OpenLoop;
  if (name == "synchronized" || name == "S2") return Scheme::Synchronized;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

std::string_view health_name(GaitHealth h) {
  switch (h) {
    case GaitHealth::InSync: return "in-sync";
    case GaitHealth::Degraded: return "degraded";
    case GaitHealth::Opposed: return "opposed";
  }
  return "?";
}

void GaitConfig::validate() const {
  const auto& o = event_offsets;
  for (int i = 0; i < 4; ++i) {
    if (!(o[i] >= 0.0 && o[i] < 1.0)) throw ConfigError("gait offsets must lie in [0, 1)");
    if (i > 0 && !(o[i] > o[i - 1])) throw ConfigError("gait offsets must be strictly increasing");
  }
  if (std::fabs(o[2] - (o[0] + 0.5)) > 1e-12 || std::fabs(o[3] - (o[1] + 0.5)) > 1e-12)
    throw ConfigError("gait offsets 2 and 3 must trail offsets 0 and 1 by half a period");
  if (period_slots < 4 || period_slots % 2 != 0) throw ConfigError("period_slots must be even and at least 4");
  if (event_offsets == kDefaultOffsets && period_slots % 4 != 0)
    throw ConfigError("period_slots must be divisible by 4 with quarter-phase offsets");
  if (period.ns() <= 0 || period.ns() % 2 != 0) throw ConfigError("gait period must be a positive, even ns count");
  for (int i = 1; i < 4; ++i) {
    if (slot_offset(i) <= slot_offset(i - 1)) {
      std::ostringstream os;
      os << "period_slots=" << period_slots << " maps two gait phases onto one slot";
      throw ConfigError(os.str());
    }
  }
}

std::uint32_t GaitConfig::slot_offset(int phase) const {
  if (phase >= 2) return slot_offset(phase - 2) + period_slots / 2;
  return static_cast<std::uint32_t>(std::floor(event_offsets[phase] * period_slots));
}

TrueTime GaitConfig::time_offset(int phase) const {
  if (phase >= 2) return time_offset(phase - 2) + TrueTime::from_ns(period.ns() / 2);
  return TrueTime::from_ns(std::llround(event_offsets[phase] * static_cast<double>(period.ns())));
}

std::vector<GaitEvent> build_schedule(const GaitConfig& config) {
  config.validate();
  std::vector<GaitEvent> events;
  events.reserve(8);
  for (int phase = 0; phase < 4; ++phase) {
    for (Tripod tripod : {Tripod::T1, Tripod::T2}) {
      const Action a = kT1Cycle[(tripod == Tripod::T1 ? phase : phase + 2) % 4];
      events.push_back(GaitEvent{phase, tripod, group_of(a), a, angle_of(a, config)});
    }
  }
  return events;
}

std::vector<GaitEvent> events_for_controller(const std::vector<GaitEvent>& schedule, Controller controller) {
  std::vector<GaitEvent> out;
  for (const auto& e : schedule)
    if (controller_for(e.joint_group) == controller) out.push_back(e);
  return out;
}

std::vector<ServoSetpoint> expand_event(const GaitEvent& event, const GaitConfig& config, Steering steering,
                                        TrueTime at) {
  std::vector<ServoSetpoint> out;
  const auto& legs = kTripodLegs[event.tripod == Tripod::T1 ? 0 : 1];
  for (int leg : legs) {
    if (event.joint_group == JointGroup::Hip) {
      out.push_back({at, Controller::M1, hip_servo(leg), event.target_angle_deg});
      continue;
    }
    // A turn reverses the knee sweep on the inner side.
    const bool reversed = (steering == Steering::Left && is_left_leg(leg)) ||
                          (steering == Steering::Right && !is_left_leg(leg));
    double angle = event.target_angle_deg;
    if (reversed) angle = (event.action == Action::Back) ? config.knee_forward_deg : config.knee_back_deg;
    out.push_back({at, Controller::M2, knee_servo(leg), angle});
  }
  return out;
}

TrueTime phase_true_time(const MoteState& node, const GaitConfig& config, std::uint64_t k, int phase,
                         Scheme scheme) {
  if (!node.gait) throw HarnessError("gait not armed on node");
  const GaitArm& arm = *node.gait;
  if (scheme == Scheme::Synchronized)
    return slot_boundary_true_time(node, arm.start_asn + k * config.period_slots + config.slot_offset(phase));

  const i128 local_ns = static_cast<i128>(k) * config.period.ns() + config.time_offset(phase).ns();
  return node.free_timer.true_time_of_tick(arm.free_start_tick + local_ns_to_ticks(local_ns));
}

TrueTime period_start_true_time(const MoteState& node, const GaitConfig& config, std::uint64_t k, Scheme scheme) {
  return phase_true_time(node, config, k, 0, scheme);
}

double gait_sync_error(const MoteState& m1, const MoteState& m2, const GaitConfig& config, std::uint64_t k,
                       Scheme scheme) {
  return (period_start_true_time(m2, config, k, scheme) - period_start_true_time(m1, config, k, scheme)).micros();
}

GaitHealth classify_gait(double error_us, double period_s) {
  const double e = std::fabs(error_us) / 1e6;
  if (e < 0.05 * period_s) return GaitHealth::InSync;
  if (std::fabs(std::fmod(e, period_s) - period_s / 2) < 0.10 * period_s) return GaitHealth::Opposed;
  return GaitHealth::Degraded;
}

}  // namespace gaitsync
