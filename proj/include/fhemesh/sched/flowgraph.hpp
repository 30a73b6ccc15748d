// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fhemesh/keyswitch/keyswitch.hpp"
#include "fhemesh/rns/params.hpp"
#include "fhemesh/sched/workload.hpp"

namespace fhemesh::sched {

enum class NodeKind : u8 {
  Ntt,
  Intt,
  BConv,
  Automorphism,
  ElementWise,
  EvkExpand,  // keystream half of a switching-key digit, generated on-core
  EvkLoad,    // streamed half of a switching-key digit, fetched from memory
  Exchange,   // core-to-core movement phase, materialized during lowering
};

const char* node_kind_name(NodeKind k);

// One primitive-function instance. Limb ids index the owning op's polynomial
// (ciphertext base [0, level), auxiliary base from `aux_start` upward), so
// placement ownership follows from the id alone.
struct FlowNode {
  u32 id = 0;
  NodeKind kind = NodeKind::ElementWise;
  u32 op = 0;                      // originating trace position
  OpKind op_kind = OpKind::HAdd;   // kind of that op
  u32 level = 0;                   // op level at issue
  std::vector<u32> deps;
  std::vector<u32> limb_ids;   // rows touched (conversion inputs for BConv)
  std::vector<u32> out_limbs;  // conversion outputs (BConv only)
  i64 rot = 0;                 // Automorphism step count
};

struct FlowGraph {
  u32 n = 0;          // polynomial degree
  u32 aux_start = 0;  // first auxiliary limb id
  u32 aux = 0;        // auxiliary limbs engaged per key switching
  u32 digits = 0;
  std::vector<FlowNode> nodes;
  std::vector<std::pair<u32, u32>> input_regs;  // (register, first-use level)

  // Dependencies always point backward, so construction order is a
  // topological order.
  void check_acyclic() const;
};

// Expand a trace into primitive-function nodes. Per op at level l with
// g = min(digits, l) digit groups:
//   hadd/pmult -> 2 element-wise nodes (one per ciphertext half)
//   padd -> 1 element-wise node (plaintext folds into the first half)
//   rescale -> 2 x (intt + bconv + ntt + element-wise) = 8 nodes
//   hmult -> 4 tensor element-wise + key switching + 2 combines = 15 + 6g
//   hrot  -> 2 automorphisms + key switching + 1 combine = 12 + 6g
// where key switching = intt + per-group (bconv + ntt + evk-expand +
// evk-load + 2 multiply-accumulates) + 2 descents of 4 = 9 + 6g nodes.
FlowGraph compile(const std::vector<HeOp>& trace, const rns::CkksParams& params,
                  const keyswitch::KeySwitchParams& ks);

}  // namespace fhemesh::sched
