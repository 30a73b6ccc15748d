// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/sched/flowgraph.hpp"

#include <algorithm>
#include <map>

namespace fhemesh::sched {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Ntt: return "ntt";
    case NodeKind::Intt: return "intt";
    case NodeKind::BConv: return "bconv";
    case NodeKind::Automorphism: return "automorphism";
    case NodeKind::ElementWise: return "elementwise";
    case NodeKind::EvkExpand: return "evk-expand";
    case NodeKind::EvkLoad: return "evk-load";
    case NodeKind::Exchange: return "exchange";
  }
  return "?";
}

void FlowGraph::check_acyclic() const {
  for (const auto& n : nodes)
    for (const u32 d : n.deps)
      if (d >= n.id) throw InvalidPlan("flow-graph dependency does not point backward");
}

namespace {

constexpr u32 kNoDep = 0xffffffffu;

std::vector<u32> iota_ids(u32 count, u32 first = 0) {
  std::vector<u32> ids(count);
  for (u32 i = 0; i < count; ++i) ids[i] = first + i;
  return ids;
}

struct Builder {
  FlowGraph g;
  const std::vector<HeOp>* trace = nullptr;
  std::map<u32, std::pair<u32, u32>> reg;  // register -> producer node per half

  u32 add(NodeKind kind, u32 op, u32 level, std::vector<u32> deps, std::vector<u32> limbs,
          std::vector<u32> outs = {}, i64 rot = 0) {
    FlowNode n;
    n.id = u32(g.nodes.size());
    n.kind = kind;
    n.op = op;
    n.op_kind = (*trace)[op].kind;
    n.level = level;
    for (const u32 d : deps)
      if (d != kNoDep && std::find(n.deps.begin(), n.deps.end(), d) == n.deps.end())
        n.deps.push_back(d);
    n.limb_ids = std::move(limbs);
    n.out_limbs = std::move(outs);
    n.rot = rot;
    g.nodes.push_back(std::move(n));
    return g.nodes.back().id;
  }

  std::pair<u32, u32> operand(u32 r) {
    auto it = reg.find(r);
    return it == reg.end() ? std::pair<u32, u32>{kNoDep, kNoDep} : it->second;
  }

  // Digit-decomposed key switching of the polynomial produced by `d`.
  std::pair<u32, u32> keyswitch_nodes(u32 op, u32 level, u32 d) {
    const auto ids_q = iota_ids(level);
    const auto ids_aux = iota_ids(g.aux, g.aux_start);
    auto ext = ids_q;
    ext.insert(ext.end(), ids_aux.begin(), ids_aux.end());
    const auto groups = keyswitch::digit_groups(level, g.digits);

    const u32 intt0 = add(NodeKind::Intt, op, level, {d}, ids_q);
    u32 mac0 = kNoDep, mac1 = kNoDep;
    for (const auto& group : groups) {
      std::vector<u32> comp;
      for (const u32 id : ext)
        if (std::find(group.begin(), group.end(), id) == group.end()) comp.push_back(id);
      const u32 bc = add(NodeKind::BConv, op, level, {intt0}, group, comp);
      const u32 nt = add(NodeKind::Ntt, op, level, {bc}, comp);
      const u32 ex = add(NodeKind::EvkExpand, op, level, {}, ext);
      const u32 ld = add(NodeKind::EvkLoad, op, level, {}, ext);
      mac0 = add(NodeKind::ElementWise, op, level, {nt, ex, d, mac0}, ext);
      mac1 = add(NodeKind::ElementWise, op, level, {nt, ld, d, mac1}, ext);
    }
    const auto descend = [&](u32 acc) {
      const u32 it = add(NodeKind::Intt, op, level, {acc}, ids_aux);
      const u32 bc = add(NodeKind::BConv, op, level, {it}, ids_aux, ids_q);
      const u32 nt = add(NodeKind::Ntt, op, level, {bc}, ids_q);
      return add(NodeKind::ElementWise, op, level, {nt, acc}, ids_q);
    };
    const u32 u0 = descend(mac0);
    const u32 u1 = descend(mac1);
    return {u0, u1};
  }
};

}  // namespace

FlowGraph compile(const std::vector<HeOp>& trace, const rns::CkksParams& params,
                  const keyswitch::KeySwitchParams& ks) {
  if (ks.digits == 0) throw InvalidConfig("digit count must be positive");
  if (ks.aux == 0 || ks.aux > params.aux_count)
    throw InvalidConfig("auxiliary limb count must lie in [1, " +
                        std::to_string(params.aux_count) + "]");
  for (const auto& op : trace)
    if (op.level > params.max_level)
      throw MalformedTrace("op level " + std::to_string(op.level) + " exceeds the limb budget " +
                           std::to_string(params.max_level));

  Builder b;
  b.trace = &trace;
  b.g.n = params.n();
  b.g.aux_start = params.max_level;
  b.g.aux = ks.aux;
  b.g.digits = ks.digits;
  b.g.input_regs = trace_inputs(trace);  // validates levels and rescale depth

  for (u32 i = 0; i < u32(trace.size()); ++i) {
    const auto& op = trace[i];
    const u32 lv = op.level;
    const auto ids_q = iota_ids(lv);
    const auto [a0, a1] = b.operand(op.a);
    switch (op.kind) {
      case OpKind::HAdd: {
        const auto [b0, b1] = b.operand(op.b);
        const u32 c0 = b.add(NodeKind::ElementWise, i, lv, {a0, b0}, ids_q);
        const u32 c1 = b.add(NodeKind::ElementWise, i, lv, {a1, b1}, ids_q);
        b.reg[op.dst] = {c0, c1};
        break;
      }
      case OpKind::PAdd: {
        const u32 c0 = b.add(NodeKind::ElementWise, i, lv, {a0}, ids_q);
        b.reg[op.dst] = {c0, a1};
        break;
      }
      case OpKind::PMult: {
        const u32 c0 = b.add(NodeKind::ElementWise, i, lv, {a0}, ids_q);
        const u32 c1 = b.add(NodeKind::ElementWise, i, lv, {a1}, ids_q);
        b.reg[op.dst] = {c0, c1};
        break;
      }
      case OpKind::HMult: {
        const auto [b0, b1] = b.operand(op.b);
        const u32 d0 = b.add(NodeKind::ElementWise, i, lv, {a0, b0}, ids_q);
        const u32 t1 = b.add(NodeKind::ElementWise, i, lv, {a0, b1}, ids_q);
        const u32 d1 = b.add(NodeKind::ElementWise, i, lv, {a1, b0, t1}, ids_q);
        const u32 d2 = b.add(NodeKind::ElementWise, i, lv, {a1, b1}, ids_q);
        const auto [u0, u1] = b.keyswitch_nodes(i, lv, d2);
        const u32 c0 = b.add(NodeKind::ElementWise, i, lv, {d0, u0}, ids_q);
        const u32 c1 = b.add(NodeKind::ElementWise, i, lv, {d1, u1}, ids_q);
        b.reg[op.dst] = {c0, c1};
        break;
      }
      case OpKind::HRot: {
        const u32 r0 = b.add(NodeKind::Automorphism, i, lv, {a0}, ids_q, {}, op.rot);
        const u32 r1 = b.add(NodeKind::Automorphism, i, lv, {a1}, ids_q, {}, op.rot);
        const auto [u0, u1] = b.keyswitch_nodes(i, lv, r1);
        const u32 c0 = b.add(NodeKind::ElementWise, i, lv, {r0, u0}, ids_q);
        b.reg[op.dst] = {c0, u1};
        break;
      }
      case OpKind::Rescale: {
        const auto out_ids = iota_ids(lv - 1);
        u32 halves[2];
        for (u32 h = 0; h < 2; ++h) {
          const u32 src = h == 0 ? a0 : a1;
          const u32 it = b.add(NodeKind::Intt, i, lv, {src}, {lv - 1});
          const u32 bc = b.add(NodeKind::BConv, i, lv, {it}, {lv - 1}, out_ids);
          const u32 nt = b.add(NodeKind::Ntt, i, lv, {bc}, out_ids);
          halves[h] = b.add(NodeKind::ElementWise, i, lv, {nt, src}, out_ids);
        }
        b.reg[op.dst] = {halves[0], halves[1]};
        break;
      }
    }
  }
  b.g.check_acyclic();
  return b.g;
}

}  // namespace fhemesh::sched
