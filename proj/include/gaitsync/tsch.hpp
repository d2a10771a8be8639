#pragma once

#include <cstdint>
#include <optional>

#include "gaitsync/clock.hpp"

namespace gaitsync {

enum class Role { Root, Child };

/// Where ASN counting is anchored on a node's tick grid: slot boundary n lies at
/// local tick origin_tick + floor((n - asn_origin) * 491.52).
struct SlotAlignment {
  std::uint64_t asn_origin = 0;
  Ticks origin_tick = 0;
};

struct SyncState {
  std::optional<NodeId> parent;
  TrueTime last_resync;
  TrueTime keepalive_period = TrueTime::from_us(30'000'000);
  TrueTime last_residual;  // tick-phase misalignment left by the latest resync, < 1 tick
};

/// Gait reference captured when a controller is armed by a Start command.
struct GaitArm {
  std::uint64_t start_asn = 0;
  Ticks free_start_tick = 0;  // free-running timer reading at the start_asn boundary
};

/// One network node.
///
/// `clock` is the network timebase: its tick_offset is rewritten on every resync.
/// `free_timer` is the same crystal read through an independent timer that is
/// never corrected.
struct MoteState {
  NodeId id = 0;
  Role role = Role::Root;
  DriftingClock clock;
  DriftingClock free_timer;
  SlotAlignment alignment;
  SyncState sync;
  std::optional<GaitArm> gait;

  bool is_root() const { return role == Role::Root; }
};

MoteState make_root(NodeId id, const DriftingClock& clock);
MoteState make_child(NodeId id, NodeId parent, const DriftingClock& clock,
                     TrueTime keepalive_period = TrueTime::from_us(30'000'000));

/// Local tick at which slot `asn` begins on this node.
Ticks slot_boundary_tick(const MoteState& node, std::uint64_t asn);

/// True time of the start of slot `asn` according to the node's own clock.
TrueTime slot_boundary_true_time(const MoteState& node, std::uint64_t asn);

/// Largest ASN whose boundary is at or before t.
std::uint64_t asn_at(const MoteState& node, TrueTime t);

/// Realign the child onto its parent's next slot boundary at message instant t.
/// Returns the residual misalignment in microseconds, always in [0, one tick).
double resync_to_parent(MoteState& child, const MoteState& parent, TrueTime t);

/// boundary(a, asn) - boundary(b, asn), in microseconds.
double pairwise_sync_error(const MoteState& a, const MoteState& b, std::uint64_t asn);

TrueTime next_keepalive_due(const MoteState& node);

}  // namespace gaitsync
