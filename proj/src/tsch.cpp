#include "gaitsync/tsch.hpp"

namespace gaitsync {

namespace {

// Slot n starts on the tick during which local time crosses n * 15 ms.
Ticks slot_ticks(std::uint64_t slots) { return static_cast<std::int64_t>(slots) * kSlotTicksNum / kSlotTicksDen; }

}  // namespace

MoteState make_root(NodeId id, const DriftingClock& clock) {
  MoteState m{id, Role::Root, clock, clock, {}, {}, std::nullopt};
  m.alignment = SlotAlignment{0, clock.ticks_at(TrueTime{})};
  return m;
}

MoteState make_child(NodeId id, NodeId parent, const DriftingClock& clock, TrueTime keepalive_period) {
  MoteState m{id, Role::Child, clock, clock, {}, {}, std::nullopt};
  m.alignment = SlotAlignment{0, clock.ticks_at(TrueTime{})};
  m.sync.parent = parent;
  m.sync.keepalive_period = keepalive_period;
  return m;
}

Ticks slot_boundary_tick(const MoteState& node, std::uint64_t asn) {
  if (asn < node.alignment.asn_origin) throw HarnessError("ASN precedes the node's alignment origin");
  return node.alignment.origin_tick + slot_ticks(asn - node.alignment.asn_origin);
}

TrueTime slot_boundary_true_time(const MoteState& node, std::uint64_t asn) {
  return node.clock.true_time_of_tick(slot_boundary_tick(node, asn));
}

std::uint64_t asn_at(const MoteState& node, TrueTime t) {
  const Ticks elapsed = node.clock.ticks_at(t) - node.alignment.origin_tick;
  if (elapsed < 0) throw HarnessError("time precedes the node's alignment origin");
  // Largest n with floor(n * 12288 / 25) <= elapsed.
  return node.alignment.asn_origin + static_cast<std::uint64_t>(((elapsed + 1) * kSlotTicksDen - 1) / kSlotTicksNum);
}

double resync_to_parent(MoteState& child, const MoteState& parent, TrueTime t) {
  if (child.is_root() || !child.sync.parent) throw HarnessError("resync called on a node without a parent");

  const std::uint64_t next_asn = asn_at(parent, t) + 1;
  const TrueTime parent_boundary = slot_boundary_true_time(parent, next_asn);
  const Ticks boundary_tick = slot_boundary_tick(parent, next_asn);

  // Adopt the parent's tick numbering at its next boundary. The child can only
  // land on its own tick edges, so its boundary ends up at or just before the
  // parent's.
  child.clock.adjust_offset(boundary_tick - child.clock.ticks_at(parent_boundary));
  child.alignment = parent.alignment;

  const TrueTime residual = parent_boundary - slot_boundary_true_time(child, next_asn);
  child.sync.last_resync = t;
  child.sync.last_residual = residual;
  return residual.micros();
}

double pairwise_sync_error(const MoteState& a, const MoteState& b, std::uint64_t asn) {
  return (slot_boundary_true_time(a, asn) - slot_boundary_true_time(b, asn)).micros();
}

TrueTime next_keepalive_due(const MoteState& node) {
  if (node.is_root()) throw HarnessError("the root has no keep-alive");
  return node.sync.last_resync + node.sync.keepalive_period;
}

}  // namespace gaitsync
