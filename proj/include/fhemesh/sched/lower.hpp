// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fhemesh/mapping/packets.hpp"
#include "fhemesh/nop/net.hpp"
#include "fhemesh/sched/flowgraph.hpp"

namespace fhemesh::sched {

enum class FuKind : u8 { Nttu, Bconvu, Efu, Autou, MemIf };

const char* fu_name(FuKind k);

// Per-core resources. Throughputs are element-level: the transform unit
// retires submodules x 16 butterflies per cycle, the base-conversion unit
// 12 multiply-accumulates per lane per cycle, and the element-wise,
// automorphism, and keystream paths one element per lane per cycle. The
// register file serves 6 reads and 6 writes per lane per cycle, which bounds
// butterfly issue at 2 lanes' worth per read port group.
struct CoreModel {
  u32 lanes = 64;
  u32 submodules = 4;  // composable transform units of 16 lanes each
  u64 rf_scratch_bytes = u64(256) << 20;  // package total, split over cores
  u64 rf_aux_bytes = u64(16) << 20;       // package total, split over cores
  u32 rf_reads_per_lane = 6;
  u32 rf_writes_per_lane = 6;

  u64 butterflies_per_cycle() const {
    const u64 raw = u64(submodules) * 16;
    const u64 port_bound = u64(lanes) * rf_reads_per_lane / 3;  // a, b, twiddle
    return std::min(raw, port_bound);
  }
  u64 macs_per_cycle() const { return u64(lanes) * 12; }
  u64 elems_per_cycle() const { return lanes; }

  void validate() const;
};

// One unit of FU occupancy on one core. `elements` is the register-file
// footprint the instruction touches (inputs plus outputs, 4 bytes each);
// `ops` counts work units in the unit's own currency (butterflies on the
// transform unit, multiply-accumulates on the conversion unit, elements
// elsewhere); `duration` is the closed-form busy time in cycles.
struct MicroInstr {
  u32 node = 0;
  u32 core = 0;
  FuKind fu = FuKind::Efu;
  u64 elements = 0;
  u64 ops = 0;
  u64 duration = 0;
};

// A packet bound to the flow node whose completion it gates.
struct WirePacket {
  u32 node = 0;
  nop::Endpoint src;
  nop::Endpoint dst;
  u64 elements = 0;
};

// Movement ledger of one trace op that performs a key switching.
struct OpLedger {
  u32 op = 0;
  OpKind kind = OpKind::HMult;
  u32 level = 0;
  keyswitch::TransferLedger ledger;
};

struct Lowered {
  FlowGraph graph;  // compile output plus appended Exchange nodes
  mapping::ClusterConfig cfg;
  CoreModel core;
  std::vector<MicroInstr> micro;     // ascending node id
  std::vector<WirePacket> packets;   // ascending node id
  keyswitch::TransferLedger ledger;  // all conversions, merged
  std::vector<OpLedger> op_ledgers;  // per key-switching op
  u64 exchange_elements = 0;         // mid-transform shuffles
  u64 permute_elements = 0;          // cross-core automorphism moves
  u64 hbm_elements = 0;              // streamed switching-key halves
  u64 input_bytes_per_core(u32 core_id) const;  // initial operand residency

  u64 core_to_core_elements() const {
    return ledger.core_to_core() + exchange_elements + permute_elements;
  }
};

// Assign every node's work to the owning cores, materialize Exchange nodes
// carrying the mapping module's packets (transform shuffles, conversion
// gathers/scatters/broadcasts, automorphism permutations, switching-key
// streams), and price all conversions into the ledger.
Lowered lower(const FlowGraph& g, const mapping::ClusterConfig& cfg, const CoreModel& core,
              keyswitch::DuplicationMode mode);

}  // namespace fhemesh::sched
