// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/sched/simulate.hpp"

#include <algorithm>
#include <map>

namespace fhemesh::sched {

namespace {

constexpr u64 kInf = ~u64(0);

struct Engine {
  const Lowered& low;
  nop::NopSim net;
  SimReport rep;

  u32 total_nodes;
  u64 scratch_pool, aux_pool;
  std::vector<u64> base_bytes, scratch_used, aux_used;       // per core
  std::vector<std::vector<u32>> node_micro, node_pkts;       // indices
  std::vector<std::vector<u32>> dependents;
  std::vector<u32> pending, consumers_left;
  std::vector<std::vector<std::pair<u32, u64>>> footprint;   // node -> (core, bytes)
  std::vector<u8> in_aux, started, done_flag, freed;
  std::vector<u64> fu_free;  // [core * kFuKinds + fu] -> next free cycle
  std::map<u64, std::vector<u32>> ready_at, finish_at;
  std::vector<u32> blocked;                  // waiting on register-file space
  std::vector<u32> pkt_left, packet_node;    // per node / per packet id
  std::vector<u64> pkt_last;                 // latest delivery per node
  size_t cursor = 0;                         // into net completions
  u32 nodes_done = 0;

  Engine(const Lowered& l, const nop::NetConfig& net_cfg) : low(l), net(net_cfg) {
    const auto& nodes = low.graph.nodes;
    total_nodes = u32(nodes.size());
    const u32 cores = low.cfg.cores();
    scratch_pool = low.core.rf_scratch_bytes / cores;
    aux_pool = low.core.rf_aux_bytes / cores;

    base_bytes.resize(cores);
    for (u32 c = 0; c < cores; ++c) {
      base_bytes[c] = low.input_bytes_per_core(c);
      if (base_bytes[c] > scratch_pool)
        throw CapacityExceeded("initial operands need " + std::to_string(base_bytes[c]) +
                               " bytes on core " + std::to_string(c) + " but the scratchpad holds " +
                               std::to_string(scratch_pool));
    }
    scratch_used = base_bytes;
    aux_used.assign(cores, 0);

    node_micro.resize(total_nodes);
    node_pkts.resize(total_nodes);
    dependents.resize(total_nodes);
    pending.resize(total_nodes);
    consumers_left.assign(total_nodes, 0);
    footprint.resize(total_nodes);
    in_aux.assign(total_nodes, 0);
    started.assign(total_nodes, 0);
    done_flag.assign(total_nodes, 0);
    freed.assign(total_nodes, 0);
    fu_free.assign(size_t(cores) * kFuKinds, 0);
    pkt_left.assign(total_nodes, 0);
    pkt_last.assign(total_nodes, 0);
    rep.events.resize(total_nodes);

    for (u32 i = 0; i < u32(low.micro.size()); ++i) node_micro[low.micro[i].node].push_back(i);
    for (u32 i = 0; i < u32(low.packets.size()); ++i) node_pkts[low.packets[i].node].push_back(i);

    std::vector<std::map<u32, u64>> bytes(total_nodes);
    for (const auto& m : low.micro) bytes[m.node][m.core] += m.elements * 4;
    for (const auto& p : low.packets)
      if (p.dst.kind == nop::Endpoint::Kind::Core) bytes[p.node][p.dst.idx] += p.elements * 4;
    for (const auto& v : nodes) {
      rep.events[v.id].node = v.id;
      in_aux[v.id] = (v.kind == NodeKind::EvkLoad || v.kind == NodeKind::EvkExpand) ? 1 : 0;
      footprint[v.id].assign(bytes[v.id].begin(), bytes[v.id].end());
      if (!node_micro[v.id].empty() && !node_pkts[v.id].empty())
        throw InvalidPlan("a node may own compute or packets, not both");
      pending[v.id] = u32(v.deps.size());
      for (const u32 d : v.deps) {
        dependents[d].push_back(v.id);
        ++consumers_left[d];
      }
    }
  }

  u64 next_event() const {
    u64 t = kInf;
    if (!ready_at.empty()) t = std::min(t, ready_at.begin()->first);
    if (!finish_at.empty()) t = std::min(t, finish_at.begin()->first);
    return t;
  }

  bool has_events_at(u64 t) const {
    return ready_at.count(t) != 0 || finish_at.count(t) != 0;
  }

  void run() {
    for (u32 i = 0; i < total_nodes; ++i)
      if (pending[i] == 0) ready_at[0].push_back(i);
    while (nodes_done < total_nodes) {
      drain_completions();
      const u64 t = next_event();
      if (net.idle()) {
        if (t == kInf) stall();
        net.advance_idle(t);
        process_cycle(t);
        continue;
      }
      if (t > net.now()) {
        net.step(1);
        drain_completions();
      }
      if (has_events_at(net.now())) process_cycle(net.now());
    }
    for (const auto& ev : rep.events) rep.total_cycles = std::max(rep.total_cycles, ev.done);
  }

  [[noreturn]] void stall() {
    if (!blocked.empty())
      throw CapacityExceeded("register files cannot hold the working set of " +
                             std::to_string(blocked.size()) + " pending node(s)");
    throw InvalidPlan("schedule stalled with unfinished nodes");
  }

  void process_cycle(u64 t) {
    auto fit = finish_at.find(t);
    if (fit != finish_at.end()) {
      std::vector<u32> batch = std::move(fit->second);
      finish_at.erase(fit);
      std::sort(batch.begin(), batch.end());
      for (const u32 nid : batch) complete_node(nid, t);
    }
    while (true) {
      auto rit = ready_at.find(t);
      if (rit == ready_at.end()) break;
      std::vector<u32> batch = std::move(rit->second);
      ready_at.erase(rit);
      std::sort(batch.begin(), batch.end());
      batch.erase(std::unique(batch.begin(), batch.end()), batch.end());
      for (const u32 nid : batch) try_start(nid, t);
    }
  }

  void try_start(u32 nid, u64 t) {
    if (started[nid]) throw InvalidPlan("node scheduled twice");
    u64 s = t;
    for (const u32 mi : node_micro[nid]) {
      const auto& m = low.micro[mi];
      s = std::max(s, fu_free[size_t(m.core) * kFuKinds + size_t(m.fu)]);
    }
    if (s > t) {  // one of its functional units is still busy
      ready_at[s].push_back(nid);
      return;
    }
    const u64 pool = in_aux[nid] ? aux_pool : scratch_pool;
    auto& used = in_aux[nid] ? aux_used : scratch_used;
    for (const auto& [core, b] : footprint[nid]) {
      const u64 floor = in_aux[nid] ? 0 : base_bytes[core];
      if (floor + b > pool)
        throw CapacityExceeded("node " + std::to_string(nid) + " needs " + std::to_string(b) +
                               " bytes on core " + std::to_string(core) + " but only " +
                               std::to_string(pool - floor) + " can ever be free");
      if (used[core] + b > pool) {
        blocked.push_back(nid);
        return;
      }
    }
    for (const auto& [core, b] : footprint[nid]) used[core] += b;
    rep.events[nid].start = t;
    started[nid] = 1;

    u64 span = 0;
    for (const u32 mi : node_micro[nid]) {
      const auto& m = low.micro[mi];
      fu_free[size_t(m.core) * kFuKinds + size_t(m.fu)] = t + m.duration;
      rep.fu_busy[size_t(m.fu)] += m.duration;
      span = std::max(span, m.duration);
    }
    u32 live = 0;
    for (const u32 pi : node_pkts[nid]) {
      const auto& p = low.packets[pi];
      if (p.elements == 0) continue;
      nop::PacketDesc d;
      d.src = p.src;
      d.dst = p.dst;
      d.elements = p.elements;
      d.tag = nid;
      const u64 id = net.inject(d);
      if (id != packet_node.size()) throw InvalidPlan("packet id drift");
      packet_node.push_back(nid);
      ++live;
    }
    if (live > 0) {
      pkt_left[nid] = live;  // completion lands with the last delivery
      return;
    }
    if (span == 0) complete_node(nid, t);
    else finish_at[t + span].push_back(nid);
  }

  void complete_node(u32 nid, u64 t) {
    auto& ev = rep.events[nid];
    ev.done = t;
    done_flag[nid] = 1;
    ++nodes_done;
    rep.kind_cycles[size_t(low.graph.nodes[nid].kind)] += t - ev.start;
    if (consumers_left[nid] == 0) free_node(nid, t);
    for (const u32 d : low.graph.nodes[nid].deps)
      if (--consumers_left[d] == 0) free_node(d, t);
    for (const u32 m : dependents[nid])
      if (--pending[m] == 0) ready_at[t].push_back(m);
  }

  void free_node(u32 nid, u64 t) {
    if (freed[nid]) return;
    freed[nid] = 1;
    auto& used = in_aux[nid] ? aux_used : scratch_used;
    for (const auto& [core, b] : footprint[nid]) used[core] -= b;
    if (!footprint[nid].empty()) retry_blocked(t);
  }

  void retry_blocked(u64 t) {
    if (blocked.empty()) return;
    std::vector<u32> list = std::move(blocked);
    blocked.clear();
    for (const u32 nid : list) ready_at[t].push_back(nid);
  }

  // Completion records carry future delivery cycles (the final traversal is
  // still in the pipeline when the last flit crosses), so deliveries become
  // finish events rather than immediate completions.
  void drain_completions() {
    const auto& cs = net.completions();
    for (; cursor < cs.size(); ++cursor) {
      const auto& c = cs[cursor];
      const u32 nid = packet_node[c.id];
      pkt_last[nid] = std::max(pkt_last[nid], c.deliver_cycle);
      if (--pkt_left[nid] == 0) finish_at[pkt_last[nid]].push_back(nid);
    }
  }

  void finalize() {
    rep.hbm_bytes = low.hbm_elements * 4;
    rep.exchange_elements = low.exchange_elements;
    rep.permute_elements = low.permute_elements;
    rep.hbm_elements = low.hbm_elements;
    rep.ledger = low.ledger;
    rep.op_ledgers = low.op_ledgers;
    for (const auto& m : low.micro) {
      switch (m.fu) {
        case FuKind::Nttu: rep.butterflies += m.ops; break;
        case FuKind::Bconvu: rep.macs += m.ops; break;
        case FuKind::Autou: rep.auto_elements += m.ops; break;
        case FuKind::Efu:
          (low.graph.nodes[m.node].kind == NodeKind::EvkExpand ? rep.expanded_elements
                                                               : rep.ew_ops) += m.ops;
          break;
        case FuKind::MemIf: break;
      }
    }
    rep.rf_reads = 3 * rep.butterflies + 2 * rep.macs + 2 * rep.ew_ops + rep.auto_elements +
                   rep.expanded_elements;
    rep.rf_writes = 2 * rep.butterflies + rep.macs + rep.ew_ops + rep.auto_elements +
                    rep.expanded_elements;
    rep.net = net.stats();
    rep.net_completions = net.completions();
    rep.packet_nodes = packet_node;
  }
};

}  // namespace

SimReport simulate(const Lowered& low, const nop::NetConfig& net_cfg) {
  if (net_cfg.mesh_x != low.cfg.mesh_x || net_cfg.mesh_y != low.cfg.mesh_y)
    throw InvalidConfig("network mesh must match the mapping mesh");
  Engine eng(low, net_cfg);
  eng.run();
  eng.finalize();
  return eng.rep;
}

const std::vector<std::string>& energy_keys() {
  static const std::vector<std::string> keys = {"hop_flit",     "butterfly",      "mac",
                                                "ew_op",        "auto_element",   "expand_element",
                                                "rf_read",      "rf_write",       "hbm_byte"};
  return keys;
}

EnergyBreakdown energy_account(const SimReport& rep, const EnergyTable& table) {
  auto constant = [&](const std::string& key) {
    auto it = table.joules.find(key);
    if (it == table.joules.end()) throw MissingConstant("energy constant '" + key + "' missing");
    return it->second;
  };
  EnergyBreakdown b;
  b.terms["hop_flit"] = constant("hop_flit") * double(rep.net.flit_hops);
  b.terms["butterfly"] = constant("butterfly") * double(rep.butterflies);
  b.terms["mac"] = constant("mac") * double(rep.macs);
  b.terms["ew_op"] = constant("ew_op") * double(rep.ew_ops);
  b.terms["auto_element"] = constant("auto_element") * double(rep.auto_elements);
  b.terms["expand_element"] = constant("expand_element") * double(rep.expanded_elements);
  b.terms["rf_read"] = constant("rf_read") * double(rep.rf_reads);
  b.terms["rf_write"] = constant("rf_write") * double(rep.rf_writes);
  b.terms["hbm_byte"] = constant("hbm_byte") * double(rep.hbm_bytes);
  for (const auto& [key, v] : b.terms) b.total += v;
  return b;
}

void audit_schedule(const Lowered& low, const SimReport& rep) {
  const auto& nodes = low.graph.nodes;
  if (rep.events.size() != nodes.size()) throw InvalidPlan("event log does not cover the graph");
  for (const auto& v : nodes) {
    const auto& ev = rep.events[v.id];
    if (ev.node != v.id || ev.done < ev.start) throw InvalidPlan("malformed node event");
    for (const u32 d : v.deps)
      if (rep.events[d].done > ev.start) throw InvalidPlan("node started before its dependency");
  }
  std::map<std::pair<u32, u32>, std::vector<std::pair<u64, u64>>> occupancy;
  for (const auto& m : low.micro) {
    const u64 s = rep.events[m.node].start;
    occupancy[{m.core, u32(m.fu)}].push_back({s, s + m.duration});
  }
  for (auto& [unit, spans] : occupancy) {
    std::sort(spans.begin(), spans.end());
    for (size_t i = 1; i < spans.size(); ++i)
      if (spans[i].first < spans[i - 1].second) throw InvalidPlan("functional unit double-booked");
  }
  std::map<u32, u64> want, got, last;
  for (const auto& p : low.packets)
    if (p.elements != 0) ++want[p.node];
  for (const auto& c : rep.net_completions) {
    const u32 nid = rep.packet_nodes[c.id];
    if (c.inject_cycle != rep.events[nid].start)
      throw InvalidPlan("packet injected away from its node start");
    ++got[nid];
    last[nid] = std::max(last[nid], c.deliver_cycle);
  }
  if (want != got) throw InvalidPlan("packet deliveries diverge from the lowered plan");
  for (const auto& [nid, t] : last)
    if (t != rep.events[nid].done) throw InvalidPlan("exchange completed away from last delivery");
  u64 core_to_core = 0, hbm = 0;
  for (const auto& p : low.packets) {
    const bool memory = p.src.kind == nop::Endpoint::Kind::Hbm ||
                        p.dst.kind == nop::Endpoint::Kind::Hbm;
    (memory ? hbm : core_to_core) += p.elements;
  }
  if (core_to_core != rep.core_to_core_elements())
    throw InvalidPlan("wire totals diverge from the transfer ledgers");
  if (hbm != rep.hbm_elements) throw InvalidPlan("memory totals diverge from the ledgers");
  if (rep.net.flits_injected != rep.net.flits_delivered)
    throw InvalidPlan("network did not deliver every injected flit");
  if (rep.hbm_bytes != rep.hbm_elements * 4) throw InvalidPlan("memory byte accounting is off");
}

}  // namespace fhemesh::sched
