// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fhemesh/common.hpp"

namespace fhemesh::sched {

enum class OpKind : u8 { HAdd, HMult, PAdd, PMult, HRot, Rescale };

const char* op_name(OpKind k);

// One trace-level homomorphic operation over virtual ciphertext registers.
// `level` is the active limb count of the operands at issue; Rescale's result
// drops to level - 1, every other result keeps the operand level.
struct HeOp {
  OpKind kind = OpKind::HAdd;
  u32 dst = 0;
  u32 a = 0;
  u32 b = 0;    // second operand for hadd/hmult
  i64 rot = 0;  // hrot step count (signed)
  u32 level = 1;

  bool binary() const { return kind == OpKind::HAdd || kind == OpKind::HMult; }
};

// Text grammar, one op per line, '#' starts a comment:
//   hadd    %dst %a %b @level
//   hmult   %dst %a %b @level
//   padd    %dst %a    @level
//   pmult   %dst %a    @level
//   hrot    %dst %a <steps> @level
//   rescale %dst %a    @level
std::vector<HeOp> parse_trace(const std::string& text);
std::string emit_trace(const std::vector<HeOp>& ops);

// Registers read before any write; they enter the program as external inputs
// at their first-use level. Operands above the op level are aligned down for
// free; throws MalformedTrace when an operand sits below the op level or a
// rescale is issued at level 1.
std::vector<std::pair<u32, u32>> trace_inputs(const std::vector<HeOp>& ops);

enum class WorkloadKind { KsMicro, BootLike, SweepUnit };

WorkloadKind parse_workload_kind(const std::string& name);

// Deterministic generators.
//   KsMicro   — a single key-switching (one hmult).
//   SweepUnit — one hmult + hrot + rescale chain, the smallest mixed unit.
//   BootLike  — a key-switching-dominated segment shaped like bootstrapping:
//               rotation ladders and a squaring ladder at the top levels,
//               then a payload chain of multiply/rescale pairs (nine pairs
//               once enough levels are available).
std::vector<HeOp> gen_workload(WorkloadKind kind, u32 level, u64 seed);

}  // namespace fhemesh::sched
