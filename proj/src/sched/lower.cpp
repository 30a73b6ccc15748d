// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/sched/lower.hpp"

#include <algorithm>
#include <map>

#include "fhemesh/transform/automorphism.hpp"

namespace fhemesh::sched {

const char* fu_name(FuKind k) {
  switch (k) {
    case FuKind::Nttu: return "nttu";
    case FuKind::Bconvu: return "bconvu";
    case FuKind::Efu: return "efu";
    case FuKind::Autou: return "autou";
    case FuKind::MemIf: return "memif";
  }
  return "?";
}

void CoreModel::validate() const {
  if (lanes == 0 || submodules == 0) throw InvalidConfig("core lanes and submodules must be positive");
  if (rf_reads_per_lane == 0 || rf_writes_per_lane == 0)
    throw InvalidConfig("register-file ports must be positive");
  if (rf_scratch_bytes == 0) throw InvalidConfig("scratchpad capacity must be positive");
}

namespace {

using keyswitch::DuplicationMode;
using mapping::BConvStrategy;
using mapping::PacketPhase;
using mapping::Placement;

// Resident limb count at `offset`-independent granularity: ids owned by block.
u32 limbs_on_block(const std::vector<u32>& ids, u32 block, u32 blocks) {
  u32 c = 0;
  for (const u32 id : ids) c += (id % blocks == block) ? 1 : 0;
  return c;
}

struct Lowerer {
  const FlowGraph& in;
  Lowered out;
  Placement pl;
  u32 blocks, c_lb, c_cf, chunk, slice;
  std::vector<u32> repr;  // original node id -> lowered id consumers must use
  // per-galois cross-offset move counts: matrix[src_off * c_lb + dst_off]
  std::map<u32, std::vector<u64>> permute_counts;

  Lowerer(const FlowGraph& g, const mapping::ClusterConfig& cfg, const CoreModel& core)
      : in(g) {
    out.cfg = cfg;
    out.core = core;
    out.graph.n = g.n;
    out.graph.aux_start = g.aux_start;
    out.graph.aux = g.aux;
    out.graph.digits = g.digits;
    out.graph.input_regs = g.input_regs;
    pl = mapping::place_polynomial(g.n, g.aux_start + g.aux, cfg);
    blocks = cfg.limb_cluster_count();
    c_lb = cfg.limb_cluster_size();
    c_cf = cfg.coeff_cluster_size();
    chunk = pl.chunk_elems();
    slice = pl.slice_elems();
    repr.assign(g.nodes.size(), 0);
  }

  u32 append(FlowNode n) {
    n.id = u32(out.graph.nodes.size());
    out.graph.nodes.push_back(std::move(n));
    return out.graph.nodes.back().id;
  }

  std::vector<u32> remap_deps(const std::vector<u32>& deps) {
    std::vector<u32> d;
    d.reserve(deps.size());
    for (const u32 x : deps) d.push_back(repr[x]);
    return d;
  }

  void add_micro(u32 node, u32 core_id, FuKind fu, u64 elements, u64 ops, u64 duration) {
    if (elements == 0) return;
    out.micro.push_back({node, core_id, fu, elements, ops, duration});
  }

  u32 add_exchange(const FlowNode& src_node, std::vector<u32> deps,
                   const std::vector<mapping::LogicalPacket>& pkts) {
    FlowNode x;
    x.kind = NodeKind::Exchange;
    x.op = src_node.op;
    x.level = src_node.level;
    x.deps = std::move(deps);
    const u32 id = append(std::move(x));
    for (const auto& p : pkts)
      out.packets.push_back(
          {id, nop::Endpoint::core(p.src_core), nop::Endpoint::core(p.dst_core), p.elements});
    return id;
  }

  // ---- per-kind lowering ----

  void lower_transform(const FlowNode& v) {
    const u32 id = append_compute(v);
    const u64 bpc = out.core.butterflies_per_cycle();
    const u32 stages = log2_exact(in.n);
    const u64 per_limb = u64(stages) * ceil_div(u64(chunk) / 2, bpc);
    for (u32 b = 0; b < blocks; ++b) {
      const u32 lb = limbs_on_block(v.limb_ids, b, blocks);
      if (lb == 0) continue;
      const u64 flies = u64(lb) * stages * (u64(chunk) / 2);
      for (u32 off = 0; off < c_lb; ++off)
        add_micro(id, pl.cfg.core_at(b, off), FuKind::Nttu, u64(lb) * chunk, flies,
                  u64(lb) * per_limb);
    }
    if (c_lb > 1) {
      const auto pkts = mapping::ntt_exchange_packets(pl, v.limb_ids);
      out.exchange_elements += mapping::total_elements(pkts);
      repr[v.id] = add_exchange(v, {id}, pkts);
    } else {
      repr[v.id] = id;
    }
  }

  void lower_bconv(const FlowNode& v, keyswitch::TransferLedger& op_led, DuplicationMode mode) {
    keyswitch::price_conversion(op_led, pl, v.limb_ids, v.out_limbs, mode);
    const auto strategy = op_led.conversions.back().strategy;
    const auto pkts = mapping::bconv_packets(pl, v.limb_ids, v.out_limbs, strategy);
    std::vector<mapping::LogicalPacket> to_peers, from_peers;
    for (const auto& p : pkts)
      (p.phase == PacketPhase::BconvScatter ? from_peers : to_peers).push_back(p);

    auto deps = remap_deps(v.deps);
    if (!to_peers.empty()) deps = {add_exchange(v, std::move(deps), to_peers)};
    const u32 id = append_compute(v, std::move(deps));

    const u64 mpc = out.core.macs_per_cycle();
    const u64 n_in = v.limb_ids.size(), n_out = v.out_limbs.size();
    if (strategy == BConvStrategy::Duplicate) {
      // every cluster member holds whole input chunks and computes only the
      // output limbs its own block owns (prescale work is duplicated)
      for (u32 b = 0; b < blocks; ++b) {
        const u64 ob = limbs_on_block(v.out_limbs, b, blocks);
        const u64 macs = u64(chunk) * n_in * ob + u64(chunk) * n_in;
        for (u32 off = 0; off < c_lb; ++off)
          add_micro(id, pl.cfg.core_at(b, off), FuKind::Bconvu, u64(chunk) * (n_in + ob), macs,
                    ceil_div(macs, mpc));
      }
    } else {
      // inputs sliced evenly; every core computes every output limb over its
      // own slice, then scatters
      const u64 macs = u64(slice) * n_in * n_out + u64(slice) * n_in;
      const u64 dur = ceil_div(macs, mpc);
      for (u32 core_id = 0; core_id < pl.cfg.cores(); ++core_id)
        add_micro(id, core_id, FuKind::Bconvu, u64(slice) * (n_in + n_out), macs, dur);
    }
    repr[v.id] = from_peers.empty() ? id : add_exchange(v, {id}, from_peers);
  }

  void lower_automorphism(const FlowNode& v) {
    const u32 id = append_compute(v);
    per_core_elems(v, id, FuKind::Autou, out.core.elems_per_cycle());
    const u32 g = transform::galois_element(v.rot, in.n);
    const auto& counts = permute_matrix(g);
    std::vector<mapping::LogicalPacket> pkts;
    u64 cross_per_limb = 0;
    for (u32 so = 0; so < c_lb; ++so)
      for (u32 dof = 0; dof < c_lb; ++dof) {
        if (so == dof || counts[so * c_lb + dof] == 0) continue;
        cross_per_limb += counts[so * c_lb + dof];
      }
    if (cross_per_limb == 0) {
      repr[v.id] = id;
      return;
    }
    for (const u32 limb : v.limb_ids) {
      const u32 b = limb % blocks;
      for (u32 so = 0; so < c_lb; ++so)
        for (u32 dof = 0; dof < c_lb; ++dof) {
          const u64 cnt = counts[so * c_lb + dof];
          if (so == dof || cnt == 0) continue;
          pkts.push_back({pl.cfg.core_at(b, so), pl.cfg.core_at(b, dof), cnt,
                          PacketPhase::Permute, limb});
        }
    }
    out.permute_elements += cross_per_limb * v.limb_ids.size();
    repr[v.id] = add_exchange(v, {id}, pkts);
  }

  void lower_evk_load(const FlowNode& v, keyswitch::TransferLedger& op_led) {
    FlowNode n = v;
    n.deps = remap_deps(v.deps);
    const u32 id = append(std::move(n));
    for (u32 b = 0; b < blocks; ++b) {
      const u64 lb = limbs_on_block(v.limb_ids, b, blocks);
      if (lb == 0) continue;
      for (u32 off = 0; off < c_lb; ++off)
        out.packets.push_back({id, nop::Endpoint::hbm_nearest(),
                               nop::Endpoint::core(pl.cfg.core_at(b, off)), lb * chunk});
    }
    const u64 total = u64(v.limb_ids.size()) * in.n;
    out.hbm_elements += total;
    op_led.hbm_elements += total;
    repr[v.id] = id;
  }

  // ---- helpers ----

  u32 append_compute(const FlowNode& v) { return append_compute(v, remap_deps(v.deps)); }

  u32 append_compute(const FlowNode& v, std::vector<u32> deps) {
    FlowNode n = v;
    n.deps = std::move(deps);
    return append(std::move(n));
  }

  void per_core_elems(const FlowNode& v, u32 id, FuKind fu, u64 rate) {
    for (u32 b = 0; b < blocks; ++b) {
      const u64 lb = limbs_on_block(v.limb_ids, b, blocks);
      if (lb == 0) continue;
      const u64 elems = lb * chunk;
      for (u32 off = 0; off < c_lb; ++off)
        add_micro(id, pl.cfg.core_at(b, off), fu, elems, elems, ceil_div(elems, rate));
    }
  }

  const std::vector<u64>& permute_matrix(u32 g) {
    auto it = permute_counts.find(g);
    if (it != permute_counts.end()) return it->second;
    std::vector<u64> m(size_t(c_lb) * c_lb, 0);
    for (u32 k = 0; k < in.n; ++k) {
      const u32 src = transform::automorphism_eval_source(k, g, in.n);
      ++m[size_t(src / chunk) * c_lb + k / chunk];
    }
    return permute_counts.emplace(g, std::move(m)).first->second;
  }

  void run(DuplicationMode mode) {
    // per-op conversion ledgers, folded into the global one at the end
    std::map<u32, OpLedger> per_op;
    for (const auto& v : in.nodes) {
      switch (v.kind) {
        case NodeKind::Ntt:
        case NodeKind::Intt: lower_transform(v); break;
        case NodeKind::BConv: {
          auto& ol = op_entry(per_op, v);
          lower_bconv(v, ol.ledger, mode);
          break;
        }
        case NodeKind::Automorphism: lower_automorphism(v); break;
        case NodeKind::EvkLoad: {
          auto& ol = op_entry(per_op, v);
          lower_evk_load(v, ol.ledger);
          break;
        }
        case NodeKind::EvkExpand: {
          const u32 id = append_compute(v);
          per_core_elems(v, id, FuKind::Efu, out.core.elems_per_cycle());
          repr[v.id] = id;
          break;
        }
        case NodeKind::ElementWise: {
          const u32 id = append_compute(v);
          per_core_elems(v, id, FuKind::Efu, out.core.elems_per_cycle());
          repr[v.id] = id;
          break;
        }
        case NodeKind::Exchange:
          throw InvalidPlan("exchange nodes only appear after lowering");
      }
    }
    for (auto& [op, ol] : per_op) {
      out.ledger.merge(ol.ledger);
      out.op_ledgers.push_back(std::move(ol));
    }
    out.graph.check_acyclic();
  }

  OpLedger& op_entry(std::map<u32, OpLedger>& per_op, const FlowNode& v) {
    auto [it, fresh] = per_op.try_emplace(v.op);
    if (fresh) {
      it->second.op = v.op;
      it->second.kind = v.op_kind;
      it->second.level = v.level;
    }
    return it->second;
  }
};

}  // namespace

u64 Lowered::input_bytes_per_core(u32 core_id) const {
  const u32 blocks = cfg.limb_cluster_count();
  const u32 chunk = graph.n / cfg.limb_cluster_size();
  const u32 block = cfg.block_of_core(core_id);
  u64 elems = 0;
  for (const auto& [reg, level] : graph.input_regs) {
    u32 resident = 0;
    for (u32 l = 0; l < level; ++l) resident += (l % blocks == block) ? 1 : 0;
    elems += 2ull * resident * chunk;  // both ciphertext halves
  }
  return elems * 4;
}

Lowered lower(const FlowGraph& g, const mapping::ClusterConfig& cfg, const CoreModel& core,
              keyswitch::DuplicationMode mode) {
  cfg.validate();
  core.validate();
  if (g.n % (u64(cfg.limb_cluster_size()) * cfg.coeff_cluster_size()) != 0)
    throw PlacementMismatch("degree not splittable over the configured blocks");
  Lowerer lw(g, cfg, core);
  lw.run(mode);
  return lw.out;
}

}  // namespace fhemesh::sched
