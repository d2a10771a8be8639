#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "gaitsync/gait.hpp"
#include "gaitsync/tsch.hpp"

namespace gaitsync {

enum class EventKind { SlotBoundary, MessageDelivery, KeepAliveDue, GaitEvent, SamplePoint, CommandInjection };
enum class MessageKind { Command, KeepAlive, Ack, ServoCommand };
enum class Verb { Start, Stop, Forward, Left, Right };

struct CommandBody {
  Verb verb = Verb::Start;
  std::uint64_t start_asn = 0;  // Start only: network slot from which gait periods are counted
};

struct ServoBody {
  std::uint64_t period_index = 0;
  int phase = 0;
  std::vector<ServoSetpoint> setpoints;  // empty for a controller whose joints hold
};

struct Message {
  MessageKind kind = MessageKind::Command;
  NodeId src = 0;
  NodeId dst = 0;
  TrueTime sent;
  TrueTime delivered;
  std::uint64_t seq = 0;
  std::variant<std::monostate, CommandBody, ServoBody> body;
};

/// Application-layer link: latency is base + uniform jitter, drops retry one
/// slot later. Every draw is a pure function of (seed, message seq, attempt).
struct LinkModel {
  TrueTime base_latency;
  TrueTime jitter_bound = kSlotLength;
  double drop_probability = 0.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
  TrueTime sample_latency(std::uint64_t msg_seq) const;
  bool sample_drop(std::uint64_t msg_seq, std::uint32_t attempt) const;
};

struct NodeConfig {
  NodeId id = 0;
  Role role = Role::Child;
  std::optional<NodeId> parent;
  double ppm = 0.0;
  Ticks tick_offset = 0;
  double epoch_s = 0.0;  // must be <= 0: every crystal is running when the simulation starts
};

struct SimConfig {
  std::vector<NodeConfig> nodes;
  Scheme scheme = Scheme::Synchronized;
  GaitConfig gait;
  LinkModel link;
  TrueTime keepalive_period = TrueTime::from_us(30'000'000);
  double ppm_max = kDefaultPpmMax;

  /// Root plus two children (M1 = hips, M2 = knees) with the given crystal errors.
  static SimConfig three_node(double ppm_root, double ppm_m1, double ppm_m2);
};

struct ProcessedCount {
  std::size_t events = 0;
  std::size_t gait_events = 0;
  std::size_t samples = 0;
};

/// Deterministic three-node simulation of the gait network.
///
/// Events are ordered by (time, insertion seq). Node 0 in config order need not
/// be the root; the first child listed controls the hips (M1), the second the
/// knees (M2).
class Sim {
 public:
  Sim(SimConfig config, std::uint64_t seed);

  /// Queue msg for delivery on the receiver's first slot boundary at or after
  /// sent + latency. Root-to-child deliveries resync the child.
  void send(Message msg);

  ProcessedCount run_until(TrueTime t_end);

  /// Root broadcast of a driver command to both controllers at t.
  void inject_command(Verb verb, TrueTime t);

  TrueTime now() const { return now_; }
  const SimConfig& config() const { return config_; }
  const MoteState& node(NodeId id) const;
  const MoteState& root() const { return nodes_[root_]; }
  const MoteState& controller(Controller c) const { return nodes_[c == Controller::M1 ? m1_ : m2_]; }

  const std::vector<ServoSetpoint>& setpoints() const { return setpoints_; }
  const std::vector<ErrorSample>& samples() const { return samples_; }
  /// Every child resync (join excluded), in processing order.
  const std::vector<TrueTime>& resync_marks() const { return resync_marks_; }
  const std::vector<Message>& delivered() const { return delivered_; }

 private:
  struct GaitTick {
    std::size_t node;
    std::uint64_t generation;
    std::uint64_t period;
    int phase;
  };
  struct KeepAliveTick {
    std::size_t node;
    std::uint64_t generation;
  };
  struct Retry {
    Message msg;
    std::uint32_t attempt;
  };
  struct SampleTick {
    std::uint64_t period;
  };
  using Payload = std::variant<Message, GaitTick, KeepAliveTick, Retry, SampleTick, Verb>;

  struct Event {
    TrueTime time;
    std::uint64_t seq;
    EventKind kind;
    Payload payload;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  // Per-node gait controller bookkeeping (children for S1/S2, root for S0).
  struct ControllerState {
    bool active = false;
    std::uint64_t generation = 0;
    std::uint64_t next_period = 0;
    int next_phase = 0;
    Steering steering = Steering::Forward;
    std::optional<Steering> pending_steering;
  };

  void schedule(TrueTime t, EventKind kind, Payload payload);
  std::size_t index_of(NodeId id) const;
  TrueTime first_boundary_at_or_after(const MoteState& node, TrueTime t) const;
  TrueTime next_boundary_after(const MoteState& node, TrueTime t) const;
  bool is_mac_frame(MessageKind k) const { return k == MessageKind::KeepAlive || k == MessageKind::Ack; }
  void dispatch(const Message& msg);

  void handle_delivery(Message msg);
  void handle_command(std::size_t idx, const CommandBody& cmd);
  void handle_keepalive_due(const KeepAliveTick& tick);
  void handle_gait(const GaitTick& tick);
  void handle_injection(Verb verb);
  void handle_sample(const SampleTick& tick);

  void arm(std::size_t idx, std::uint64_t start_asn);
  void schedule_next_gait(std::size_t idx);
  void prime_keepalive(std::size_t idx);
  void record_start(std::size_t idx, std::uint64_t period);
  Scheme gait_scheme(std::size_t idx) const;
  Controller controller_of(std::size_t idx) const { return idx == m1_ ? Controller::M1 : Controller::M2; }

  SimConfig config_;
  std::vector<MoteState> nodes_;
  std::vector<ControllerState> controllers_;
  std::vector<std::uint64_t> keepalive_generation_;
  std::vector<GaitEvent> schedule_;
  std::size_t root_ = 0, m1_ = 0, m2_ = 0;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t next_event_seq_ = 0;
  std::uint64_t next_msg_seq_ = 0;
  TrueTime now_;

  std::vector<ServoSetpoint> setpoints_;
  std::vector<ErrorSample> samples_;
  std::vector<TrueTime> resync_marks_;
  std::vector<Message> delivered_;
  std::map<std::uint64_t, std::pair<std::optional<TrueTime>, std::optional<TrueTime>>> period_starts_;
};

/// Run the simulation to t_end and return every servo setpoint emitted so far.
std::vector<ServoSetpoint> servo_trace(Sim& sim, TrueTime t_end);

}  // namespace gaitsync
