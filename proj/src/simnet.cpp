#include "gaitsync/simnet.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace gaitsync {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based draw in [0, 1): no generator state, so replays and parallel
// runs cannot interfere.
double uniform01(std::uint64_t seed, std::uint64_t seq, std::uint64_t stream) {
  const std::uint64_t bits = splitmix64(splitmix64(seed ^ splitmix64(seq)) + stream);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::uint64_t round_up_to_multiple(std::uint64_t v, std::uint64_t m) { return (v + m - 1) / m * m; }

}  // namespace

void LinkModel::validate() const {
  if (base_latency < TrueTime{}) throw ConfigError("base latency must be non-negative");
  if (jitter_bound < TrueTime{}) throw ConfigError("jitter bound must be non-negative");
  if (!(drop_probability >= 0.0 && drop_probability < 1.0)) throw ConfigError("drop probability must be in [0, 1)");
}

TrueTime LinkModel::sample_latency(std::uint64_t msg_seq) const {
  const double u = uniform01(rng_seed, msg_seq, 0);
  return base_latency + TrueTime::from_ns(static_cast<std::int64_t>(u * static_cast<double>(jitter_bound.ns())));
}

bool LinkModel::sample_drop(std::uint64_t msg_seq, std::uint32_t attempt) const {
  if (drop_probability <= 0.0) return false;
  return uniform01(rng_seed, msg_seq, 1 + attempt) < drop_probability;
}

SimConfig SimConfig::three_node(double ppm_root, double ppm_m1, double ppm_m2) {
  SimConfig c;
  c.nodes = {
      NodeConfig{0, Role::Root, std::nullopt, ppm_root, 0, 0.0},
      NodeConfig{1, Role::Child, 0, ppm_m1, 0, 0.0},
      NodeConfig{2, Role::Child, 0, ppm_m2, 0, 0.0},
  };
  return c;
}

Sim::Sim(SimConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.link.rng_seed = seed;
  config_.link.validate();
  schedule_ = build_schedule(config_.gait);
  if (config_.keepalive_period <= TrueTime{}) throw ConfigError("keep-alive period must be positive");

  std::set<NodeId> ids;
  std::optional<std::size_t> root;
  std::vector<std::size_t> children;
  for (std::size_t i = 0; i < config_.nodes.size(); ++i) {
    const NodeConfig& nc = config_.nodes[i];
    if (!ids.insert(nc.id).second) throw ConfigError("duplicate node id " + std::to_string(nc.id));
    if (nc.epoch_s > 0.0) throw ConfigError("node epochs must not be after the simulation start");
    if (nc.role == Role::Root) {
      if (root) throw ConfigError("more than one root");
      root = i;
    } else {
      children.push_back(i);
    }
  }
  if (!root) throw ConfigError("topology has no root");
  if (children.size() != 2) throw ConfigError("topology needs exactly two child controllers");
  for (std::size_t c : children) {
    const NodeConfig& nc = config_.nodes[c];
    if (!nc.parent) throw ConfigError("child " + std::to_string(nc.id) + " has no parent");
    if (*nc.parent != config_.nodes[*root].id)
      throw ConfigError("child " + std::to_string(nc.id) + " must have the root as its parent");
  }
  root_ = *root;
  m1_ = children[0];
  m2_ = children[1];

  for (const NodeConfig& nc : config_.nodes) {
    const DriftingClock clock = make_clock(nc.ppm, nc.tick_offset, nc.epoch_s, config_.ppm_max);
    nodes_.push_back(nc.role == Role::Root ? make_root(nc.id, clock)
                                           : make_child(nc.id, *nc.parent, clock, config_.keepalive_period));
  }
  controllers_.resize(nodes_.size());
  keepalive_generation_.resize(nodes_.size(), 0);

  // Children have joined the network before the run starts.
  for (std::size_t c : children) {
    resync_to_parent(nodes_[c], nodes_[root_], TrueTime{});
    prime_keepalive(c);
  }
}

const MoteState& Sim::node(NodeId id) const { return nodes_[index_of(id)]; }

std::size_t Sim::index_of(NodeId id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  throw ConfigError("unknown node " + std::to_string(id));
}

void Sim::schedule(TrueTime t, EventKind kind, Payload payload) {
  queue_.push(Event{t, next_event_seq_++, kind, std::move(payload)});
}

TrueTime Sim::first_boundary_at_or_after(const MoteState& node, TrueTime t) const {
  const std::uint64_t asn = asn_at(node, t);
  // t is itself a boundary when the boundary tick begins exactly at t.
  const Ticks b = slot_boundary_tick(node, asn);
  const bool on_boundary = node.clock.ticks_at(t) == b &&
                           (t == node.clock.epoch() || node.clock.ticks_at(t - TrueTime::from_ns(1)) < b);
  return on_boundary ? t : slot_boundary_true_time(node, asn + 1);
}

TrueTime Sim::next_boundary_after(const MoteState& node, TrueTime t) const {
  return slot_boundary_true_time(node, asn_at(node, t) + 1);
}

void Sim::send(Message msg) {
  index_of(msg.src);
  const MoteState& dst = nodes_[index_of(msg.dst)];
  if (msg.sent < now_) throw HarnessError("message sent in the past");
  msg.seq = next_msg_seq_++;
  const TrueTime latency = is_mac_frame(msg.kind) ? TrueTime{} : config_.link.sample_latency(msg.seq);
  const TrueTime at = first_boundary_at_or_after(dst, msg.sent + latency);
  if (config_.link.sample_drop(msg.seq, 0)) {
    schedule(at, EventKind::SlotBoundary, Retry{std::move(msg), 1});
    return;
  }
  msg.delivered = at;
  schedule(at, EventKind::MessageDelivery, std::move(msg));
}

void Sim::inject_command(Verb verb, TrueTime t) {
  if (t < now_) throw HarnessError("command injected in the past");
  schedule(t, EventKind::CommandInjection, verb);
}

ProcessedCount Sim::run_until(TrueTime t_end) {
  if (t_end < now_) throw HarnessError("run_until target precedes current time");
  ProcessedCount count;
  while (!queue_.empty() && queue_.top().time <= t_end) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    ++count.events;
    switch (ev.kind) {
      case EventKind::MessageDelivery:
        handle_delivery(std::get<Message>(std::move(ev.payload)));
        break;
      case EventKind::SlotBoundary: {
        // A dropped frame is retried in the receiver's next slot.
        auto retry = std::get<Retry>(std::move(ev.payload));
        const TrueTime at = next_boundary_after(nodes_[index_of(retry.msg.dst)], now_);
        if (config_.link.sample_drop(retry.msg.seq, retry.attempt)) {
          schedule(at, EventKind::SlotBoundary, Retry{std::move(retry.msg), retry.attempt + 1});
        } else {
          retry.msg.delivered = at;
          schedule(at, EventKind::MessageDelivery, std::move(retry.msg));
        }
        break;
      }
      case EventKind::KeepAliveDue:
        handle_keepalive_due(std::get<KeepAliveTick>(ev.payload));
        break;
      case EventKind::GaitEvent: {
        const auto& tick = std::get<GaitTick>(ev.payload);
        const auto& ctrl = controllers_[tick.node];
        if (ctrl.active && ctrl.generation == tick.generation) {
          handle_gait(tick);
          ++count.gait_events;
        }
        break;
      }
      case EventKind::SamplePoint:
        handle_sample(std::get<SampleTick>(ev.payload));
        ++count.samples;
        break;
      case EventKind::CommandInjection:
        handle_injection(std::get<Verb>(ev.payload));
        break;
    }
  }
  now_ = t_end;
  return count;
}

Scheme Sim::gait_scheme(std::size_t idx) const {
  if (idx == root_ || config_.scheme == Scheme::Centralized) return Scheme::OpenLoop;
  return config_.scheme;
}

void Sim::prime_keepalive(std::size_t idx) {
  const std::uint64_t gen = ++keepalive_generation_[idx];
  schedule(next_keepalive_due(nodes_[idx]), EventKind::KeepAliveDue, KeepAliveTick{idx, gen});
}

void Sim::handle_keepalive_due(const KeepAliveTick& tick) {
  if (tick.generation != keepalive_generation_[tick.node]) return;
  Message ka;
  ka.kind = MessageKind::KeepAlive;
  ka.src = nodes_[tick.node].id;
  ka.dst = nodes_[root_].id;
  ka.sent = now_;
  send(std::move(ka));
}

void Sim::handle_delivery(Message msg) {
  const std::size_t dst = index_of(msg.dst);
  const std::size_t src = index_of(msg.src);
  delivered_.push_back(msg);

  if (src == root_ && dst != root_) {
    resync_to_parent(nodes_[dst], nodes_[root_], now_);
    resync_marks_.push_back(now_);
    prime_keepalive(dst);
    auto& ctrl = controllers_[dst];
    if (config_.scheme == Scheme::Synchronized && ctrl.active) {
      ++ctrl.generation;
      schedule_next_gait(dst);
    }
  }

  switch (msg.kind) {
    case MessageKind::Command:
      handle_command(dst, std::get<CommandBody>(msg.body));
      break;
    case MessageKind::KeepAlive: {
      // The parent acknowledges inside the same slot; the child times its
      // correction from the acknowledgement.
      Message ack;
      ack.kind = MessageKind::Ack;
      ack.src = msg.dst;
      ack.dst = msg.src;
      ack.sent = now_;
      ack.delivered = now_;
      ack.seq = next_msg_seq_++;
      schedule(now_, EventKind::MessageDelivery, std::move(ack));
      break;
    }
    case MessageKind::Ack:
      break;
    case MessageKind::ServoCommand: {
      if (!controllers_[dst].active) break;
      const auto& body = std::get<ServoBody>(msg.body);
      for (ServoSetpoint sp : body.setpoints) {
        sp.true_time = now_;
        setpoints_.push_back(sp);
      }
      if (body.phase == 0) record_start(dst, body.period_index);
      break;
    }
  }
}

void Sim::handle_command(std::size_t idx, const CommandBody& cmd) {
  auto& ctrl = controllers_[idx];
  switch (cmd.verb) {
    case Verb::Start:
      if (config_.scheme == Scheme::Centralized && idx != root_) {
        ctrl.active = true;  // applies whatever the root sends
      } else {
        arm(idx, cmd.start_asn);
      }
      break;
    case Verb::Stop:
      ctrl.active = false;
      ++ctrl.generation;
      break;
    case Verb::Forward: ctrl.pending_steering = Steering::Forward; break;
    case Verb::Left: ctrl.pending_steering = Steering::Left; break;
    case Verb::Right: ctrl.pending_steering = Steering::Right; break;
  }
}

void Sim::handle_injection(Verb verb) {
  const MoteState& root = nodes_[root_];
  CommandBody body{verb, 0};
  if (verb == Verb::Start) {
    const TrueTime worst = config_.link.base_latency + config_.link.jitter_bound;
    const auto lead = static_cast<std::uint64_t>((worst.ns() + kSlotLength.ns() - 1) / kSlotLength.ns()) + 2;
    body.start_asn = round_up_to_multiple(asn_at(root, now_) + lead, config_.gait.period_slots);
  }

  if (config_.scheme == Scheme::Centralized) handle_command(root_, body);

  for (std::size_t child : {m1_, m2_}) {
    Message m;
    m.kind = MessageKind::Command;
    m.src = root.id;
    m.dst = nodes_[child].id;
    m.sent = now_;
    m.body = body;
    send(std::move(m));
  }
}

void Sim::arm(std::size_t idx, std::uint64_t start_asn) {
  MoteState& node = nodes_[idx];
  const TrueTime start = slot_boundary_true_time(node, start_asn);
  node.gait = GaitArm{start_asn, node.free_timer.ticks_at(start)};

  auto& ctrl = controllers_[idx];
  ctrl.active = true;
  ++ctrl.generation;
  ctrl.next_phase = 0;
  ctrl.next_period = 0;
  // A late Start joins at the first period boundary still ahead.
  while (period_start_true_time(node, config_.gait, ctrl.next_period, gait_scheme(idx)) < now_) ++ctrl.next_period;
  schedule_next_gait(idx);
}

void Sim::schedule_next_gait(std::size_t idx) {
  const auto& ctrl = controllers_[idx];
  const TrueTime t = phase_true_time(nodes_[idx], config_.gait, ctrl.next_period, ctrl.next_phase, gait_scheme(idx));
  schedule(std::max(t, now_), EventKind::GaitEvent, GaitTick{idx, ctrl.generation, ctrl.next_period, ctrl.next_phase});
}

void Sim::handle_gait(const GaitTick& tick) {
  auto& ctrl = controllers_[tick.node];
  if (tick.phase == 0 && ctrl.pending_steering) {
    ctrl.steering = *ctrl.pending_steering;
    ctrl.pending_steering.reset();
  }

  if (tick.node == root_) {
    for (std::size_t child : {m1_, m2_}) {
      ServoBody body{tick.period, tick.phase, {}};
      for (const GaitEvent& e : schedule_) {
        if (e.phase_index != tick.phase || controller_for(e.joint_group) != controller_of(child)) continue;
        auto sps = expand_event(e, config_.gait, ctrl.steering, now_);
        body.setpoints.insert(body.setpoints.end(), sps.begin(), sps.end());
      }
      Message m;
      m.kind = MessageKind::ServoCommand;
      m.src = nodes_[root_].id;
      m.dst = nodes_[child].id;
      m.sent = now_;
      m.body = std::move(body);
      send(std::move(m));
    }
  } else {
    const Controller me = controller_of(tick.node);
    for (const GaitEvent& e : schedule_) {
      if (e.phase_index != tick.phase || controller_for(e.joint_group) != me) continue;
      auto sps = expand_event(e, config_.gait, ctrl.steering, now_);
      setpoints_.insert(setpoints_.end(), sps.begin(), sps.end());
    }
    if (tick.phase == 0) record_start(tick.node, tick.period);
  }

  if (++ctrl.next_phase == 4) {
    ctrl.next_phase = 0;
    ++ctrl.next_period;
  }
  schedule_next_gait(tick.node);
}

void Sim::record_start(std::size_t idx, std::uint64_t period) {
  auto& entry = period_starts_[period];
  (idx == m1_ ? entry.first : entry.second) = now_;
  if (entry.first && entry.second) schedule(now_, EventKind::SamplePoint, SampleTick{period});
}

void Sim::handle_sample(const SampleTick& tick) {
  auto it = period_starts_.find(tick.period);
  const TrueTime t1 = *it->second.first;
  const TrueTime t2 = *it->second.second;
  period_starts_.erase(it);
  const TrueTime at = std::max(t1, t2);
  samples_.push_back(ErrorSample{TrueTime::from_us(at.ns() / 1000), tick.period, (t2 - t1).micros()});
}

std::vector<ServoSetpoint> servo_trace(Sim& sim, TrueTime t_end) {
  if (t_end > sim.now()) sim.run_until(t_end);
  std::vector<ServoSetpoint> out = sim.setpoints();
  std::stable_sort(out.begin(), out.end(),
                   [](const ServoSetpoint& a, const ServoSetpoint& b) { return a.true_time < b.true_time; });
  return out;
}

}  // namespace gaitsync
