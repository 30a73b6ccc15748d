// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fhemesh/sched/lower.hpp"

namespace fhemesh::sched {

inline constexpr u32 kNodeKinds = 8;  // one per NodeKind value
inline constexpr u32 kFuKinds = 5;    // one per FuKind value

// Lifetime of one flow node in the executed schedule.
struct NodeEvent {
  u32 node = 0;
  u64 start = 0;
  u64 done = 0;
};

struct SimReport {
  u64 total_cycles = 0;
  // Sum of (done - start) over nodes of each kind; phases overlap, so these
  // are aggregate node-active cycles, not a partition of total_cycles.
  std::array<u64, kNodeKinds> kind_cycles{};
  // Busy cycles summed over all cores, per functional-unit class.
  std::array<u64, kFuKinds> fu_busy{};

  // Work counters, each in its unit's own currency.
  u64 butterflies = 0;
  u64 macs = 0;
  u64 ew_ops = 0;
  u64 auto_elements = 0;
  u64 expanded_elements = 0;
  // Register-file accesses under the documented port model: a butterfly
  // costs 3 reads / 2 writes (two operands and a twiddle), a MAC 2 reads /
  // 1 write, a binary element-wise op 2 reads / 1 write, and permutation or
  // keystream elements 1 read / 1 write.
  u64 rf_reads = 0;
  u64 rf_writes = 0;

  u64 hbm_bytes = 0;  // streamed switching-key bytes (4 per element)
  u64 exchange_elements = 0;
  u64 permute_elements = 0;
  u64 hbm_elements = 0;
  keyswitch::TransferLedger ledger;
  std::vector<OpLedger> op_ledgers;

  nop::NopStats net;
  std::vector<nop::Completion> net_completions;  // delivery order
  std::vector<u32> packet_nodes;                 // packet id -> flow node
  std::vector<NodeEvent> events;                 // indexed by node id

  u64 core_to_core_elements() const {
    return ledger.core_to_core() + exchange_elements + permute_elements;
  }
  double utilization(FuKind fu, u32 cores) const {
    if (total_cycles == 0 || cores == 0) return 0.0;
    return double(fu_busy[size_t(fu)]) / (double(total_cycles) * cores);
  }
};

// Event-driven co-simulation of the lowered program and the package network.
//
// A node starts once every dependency has completed, its functional units are
// free on every core it touches, and its register-file footprint fits; its
// micro-instructions then occupy their units for the closed-form durations,
// and exchange nodes complete when the network delivers their last packet.
// The network is stepped cycle by cycle only while packets are in flight.
// Footprints are reserved per node (scratchpad for operand tiles, the
// auxiliary pool for switching-key tiles) and released when the last
// consumer completes; initial operands stay resident for the whole run.
// Ready nodes tie-break by lowest id, so the schedule is deterministic.
// Throws CapacityExceeded when no legal schedule fits the register files.
SimReport simulate(const Lowered& low, const nop::NetConfig& net_cfg);

// Per-event energy constants in joules. Required keys: hop_flit, butterfly,
// mac, ew_op, auto_element, expand_element, rf_read, rf_write, hbm_byte.
struct EnergyTable {
  std::map<std::string, double> joules;
};

const std::vector<std::string>& energy_keys();

struct EnergyBreakdown {
  std::map<std::string, double> terms;  // keyed like the table
  double total = 0.0;
  bool operator==(const EnergyBreakdown&) const = default;
};

// Linear combination of report counters and table constants; the breakdown
// sums to the total. Throws MissingConstant for an absent key.
EnergyBreakdown energy_account(const SimReport& rep, const EnergyTable& table);

// Post-hoc audit of the event log: dependency and arrival ordering, exclusive
// functional-unit occupancy, packet/ledger conservation. Throws InvalidPlan
// on any violation.
void audit_schedule(const Lowered& low, const SimReport& rep);

}  // namespace fhemesh::sched
