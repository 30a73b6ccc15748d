// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fhemesh/keyswitch/keyswitch.hpp"
#include "fhemesh/mapping/packets.hpp"
#include "fhemesh/rns/basis.hpp"
#include "fhemesh/sched/exec.hpp"
#include "fhemesh/sched/flowgraph.hpp"
#include "fhemesh/sched/lower.hpp"
#include "fhemesh/sched/simulate.hpp"
#include "fhemesh/sched/workload.hpp"
#include "fhemesh/transform/ntt.hpp"
#include "oracles.hpp"

using namespace fhemesh;
using namespace fhemesh::sched;
namespace ks = fhemesh::keyswitch;

namespace {

rns::CkksParams small_params() {
  rns::CkksParams p;
  p.log_n = 8;
  p.max_level = 8;
  p.aux_count = 3;
  return p;
}

ks::KeySwitchParams ks_params(u32 digits, u32 aux = 2) {
  ks::KeySwitchParams p;
  p.digits = digits;
  p.aux = aux;
  return p;
}

std::map<NodeKind, u32> kind_counts(const FlowGraph& g) {
  std::map<NodeKind, u32> c;
  for (const auto& v : g.nodes) ++c[v.kind];
  return c;
}

// Structure fingerprint: node-kind multiset plus (dep kind, node kind) edge
// multiset. Isomorphic graphs agree on both.
std::pair<std::vector<u8>, std::vector<std::pair<u8, u8>>> shape(const FlowGraph& g) {
  std::vector<u8> kinds;
  std::vector<std::pair<u8, u8>> edges;
  for (const auto& v : g.nodes) {
    kinds.push_back(u8(v.kind));
    for (const u32 d : v.deps) edges.push_back({u8(g.nodes[d].kind), u8(v.kind)});
  }
  std::sort(kinds.begin(), kinds.end());
  std::sort(edges.begin(), edges.end());
  return {kinds, edges};
}

mapping::ClusterConfig cluster(u32 mx, u32 my, u32 bh, u32 bw) {
  mapping::ClusterConfig c;
  c.mesh_x = mx;
  c.mesh_y = my;
  c.block_h = bh;
  c.block_w = bw;
  return c;
}

nop::NetConfig net_for(const mapping::ClusterConfig& c) {
  nop::NetConfig n;
  n.mesh_x = c.mesh_x;
  n.mesh_y = c.mesh_y;
  return n;
}

using PacketKey = std::tuple<u32, u32, u64>;  // (src core, dst core, elements)

std::multiset<PacketKey> exchange_packets_of(const Lowered& low, u32 node) {
  std::multiset<PacketKey> out;
  for (const auto& p : low.packets)
    if (p.node == node) out.insert({p.src.idx, p.dst.idx, p.elements});
  return out;
}

bool ledgers_equal(const ks::TransferLedger& a, const ks::TransferLedger& b) {
  if (a.input_elements != b.input_elements || a.output_elements != b.output_elements ||
      a.hbm_elements != b.hbm_elements || a.limbs_broadcast != b.limbs_broadcast ||
      a.limbs_redistributed != b.limbs_redistributed ||
      a.conversions.size() != b.conversions.size())
    return false;
  for (size_t i = 0; i < a.conversions.size(); ++i) {
    const auto& x = a.conversions[i];
    const auto& y = b.conversions[i];
    if (x.inputs != y.inputs || x.outputs != y.outputs || x.strategy != y.strategy ||
        x.benefit != y.benefit || x.redistribute_elements != y.redistribute_elements ||
        x.duplicate_elements != y.duplicate_elements || x.moved_elements != y.moved_elements)
      return false;
  }
  return true;
}

FlowGraph lone_transform_graph(u32 log_n) {
  FlowGraph g;
  g.n = u32(1) << log_n;
  g.aux_start = 1;
  g.aux = 0;
  g.digits = 1;
  FlowNode v;
  v.id = 0;
  v.kind = NodeKind::Ntt;
  v.level = 1;
  v.limb_ids = {0};
  g.nodes.push_back(v);
  return g;
}

}  // namespace

TEST_CASE("trace text round-trips and rejects malformed lines") {
  const std::string text =
      "# mixed header comment\n"
      "hmult %2 %0 %1 @6\n"
      "\n"
      "hrot %3 %2 -5 @6\n"
      "padd %4 %3 @6\n"
      "pmult %5 %4 @6\n"
      "hadd %6 %5 %2 @6\n"
      "rescale %7 %6 @6\n";
  const auto ops = parse_trace(text);
  REQUIRE(ops.size() == 6);
  CHECK(ops[0].kind == OpKind::HMult);
  CHECK(ops[1].kind == OpKind::HRot);
  CHECK(ops[1].rot == -5);
  CHECK(ops[5].kind == OpKind::Rescale);
  CHECK(ops[3].level == 6);

  // the emitted text is a fixed point of parse∘emit
  const std::string canon = emit_trace(ops);
  CHECK(emit_trace(parse_trace(canon)) == canon);

  CHECK_THROWS_AS(parse_trace("hadd %1 %2 @3\n"), MalformedTrace);        // missing operand
  CHECK_THROWS_AS(parse_trace("frobnicate %1 %2 %3 @3\n"), MalformedTrace);
  CHECK_THROWS_AS(parse_trace("hadd %1 %2 %3\n"), MalformedTrace);        // missing level
  CHECK_THROWS_AS(parse_trace("hadd %1 %2 %3 @4 junk\n"), MalformedTrace);
  CHECK_THROWS_AS(parse_trace("hrot %1 %2 @4\n"), MalformedTrace);        // missing steps
  CHECK_THROWS_AS(parse_trace("hadd 1 2 3 @4\n"), MalformedTrace);        // bare registers
}

TEST_CASE("operand levels validate with free down-alignment only") {
  // %0 first used at 6, read again lower: fine (limbs drop for free)
  const auto down = parse_trace("hmult %2 %0 %1 @6\nhadd %3 %2 %0 @4\n");
  const auto inputs = trace_inputs(down);
  REQUIRE(inputs.size() == 2);
  CHECK(inputs[0] == std::pair<u32, u32>{0, 6});
  CHECK(inputs[1] == std::pair<u32, u32>{1, 6});

  // reading a level-4 result at level 6 is malformed
  CHECK_THROWS_AS(trace_inputs(parse_trace("hadd %2 %0 %1 @4\nhmult %3 %2 %0 @6\n")),
                  MalformedTrace);
  // rescale at the last limb is malformed
  CHECK_THROWS_AS(trace_inputs(parse_trace("rescale %1 %0 @1\n")), MalformedTrace);
  // rescale result sits one level down
  const auto chain = parse_trace("rescale %1 %0 @3\nhadd %2 %1 %1 @2\n");
  CHECK(trace_inputs(chain).size() == 1);
}

TEST_CASE("workload generators are deterministic and shaped as documented") {
  const auto micro = gen_workload(WorkloadKind::KsMicro, 6, 1);
  REQUIRE(micro.size() == 1);
  CHECK(micro[0].kind == OpKind::HMult);
  CHECK(micro[0].level == 6);

  const auto unit = gen_workload(WorkloadKind::SweepUnit, 5, 3);
  std::map<OpKind, u32> unit_kinds;
  for (const auto& op : unit) ++unit_kinds[op.kind];
  CHECK(unit_kinds[OpKind::HMult] == 1);
  CHECK(unit_kinds[OpKind::HRot] == 1);
  CHECK(unit_kinds[OpKind::Rescale] == 1);

  const auto boot = gen_workload(WorkloadKind::BootLike, 48, 7);
  u32 rescales = 0, hmults = 0, hrots = 0;
  for (const auto& op : boot) {
    rescales += op.kind == OpKind::Rescale;
    hmults += op.kind == OpKind::HMult;
    hrots += op.kind == OpKind::HRot;
    CHECK(op.level >= 1);
    CHECK(op.level <= 48);
  }
  CHECK(rescales == 9);  // payload cadence at a 48-limb budget
  CHECK(hmults > 9);
  CHECK(hrots >= 18);

  CHECK(emit_trace(gen_workload(WorkloadKind::BootLike, 48, 7)) == emit_trace(boot));
  CHECK(emit_trace(gen_workload(WorkloadKind::BootLike, 48, 8)) != emit_trace(boot));
  // the whole generated trace passes its own validation
  CHECK_NOTHROW(trace_inputs(boot));

  CHECK(parse_workload_kind("ks-micro") == WorkloadKind::KsMicro);
  CHECK(parse_workload_kind("boot-like") == WorkloadKind::BootLike);
  CHECK(parse_workload_kind("sweep-unit") == WorkloadKind::SweepUnit);
  CHECK_THROWS_AS(parse_workload_kind("bootstrap"), InvalidConfig);
}

TEST_CASE("compile expands ops into the documented node recipes") {
  const auto params = small_params();

  // additive op: element-wise only
  const auto add_graph = compile(parse_trace("hadd %2 %0 %1 @4\n"), params, ks_params(2));
  REQUIRE(add_graph.nodes.size() == 2);
  for (const auto& v : add_graph.nodes) CHECK(v.kind == NodeKind::ElementWise);

  // hand expansion at level 6 with one digit: 4 tensor products feed one
  // key switching (intt, then bconv/ntt/expand/load/mac0/mac1 for the single
  // group, then two 4-node descents), and two combines close the op
  const auto trace = parse_trace("hmult %2 %0 %1 @6\n");
  const auto g1 = compile(trace, params, ks_params(1));
  CHECK(g1.nodes.size() == 21);
  auto c1 = kind_counts(g1);
  CHECK(c1[NodeKind::Intt] == 3);
  CHECK(c1[NodeKind::BConv] == 3);
  CHECK(c1[NodeKind::Ntt] == 3);
  CHECK(c1[NodeKind::EvkExpand] == 1);
  CHECK(c1[NodeKind::EvkLoad] == 1);
  CHECK(c1[NodeKind::ElementWise] == 10);
  CHECK(c1[NodeKind::Exchange] == 0);

  // two digits: one more group of six nodes
  const auto g2 = compile(trace, params, ks_params(2));
  CHECK(g2.nodes.size() == 27);
  auto c2 = kind_counts(g2);
  CHECK(c2[NodeKind::BConv] == 4);
  CHECK(c2[NodeKind::EvkExpand] == 2);
  CHECK(c2[NodeKind::ElementWise] == 12);

  // rotation swaps the tensor stage for two automorphisms
  const auto rot = compile(parse_trace("hrot %2 %0 3 @6\n"), params, ks_params(1));
  CHECK(rot.nodes.size() == 18);  // 12 + 6
  CHECK(kind_counts(rot)[NodeKind::Automorphism] == 2);
  for (const auto& v : rot.nodes)
    if (v.kind == NodeKind::Automorphism) CHECK(v.rot == 3);

  // rescale: intt + lift + ntt + subtract-scale per half
  const auto rs = compile(parse_trace("rescale %1 %0 @4\n"), params, ks_params(1));
  CHECK(rs.nodes.size() == 8);
  auto cr = kind_counts(rs);
  CHECK(cr[NodeKind::Intt] == 2);
  CHECK(cr[NodeKind::BConv] == 2);
  CHECK(cr[NodeKind::Ntt] == 2);
  CHECK(cr[NodeKind::ElementWise] == 2);
  for (const auto& v : rs.nodes)
    if (v.kind == NodeKind::BConv) {
      CHECK(v.limb_ids == std::vector<u32>{3});
      CHECK(v.out_limbs.size() == 3);
    }

  // node production is a deterministic function of (level, digits)
  CHECK(compile(trace, params, ks_params(1)).nodes.size() == g1.nodes.size());

  // malformed requests fail closed
  CHECK_THROWS_AS(compile(trace, params, ks_params(0)), InvalidConfig);
  CHECK_THROWS_AS(compile(trace, params, ks_params(1, 0)), InvalidConfig);
  CHECK_THROWS_AS(compile(trace, params, ks_params(1, 9)), InvalidConfig);
  CHECK_THROWS_AS(compile(parse_trace("hmult %2 %0 %1 @9\n"), params, ks_params(1)),
                  MalformedTrace);

  // inputs recorded at first-use levels
  REQUIRE(g1.input_regs.size() == 2);
  CHECK(g1.input_regs[0] == std::pair<u32, u32>{0, 6});
}

TEST_CASE("independent ops compile to isomorphic graphs") {
  const auto params = small_params();
  const auto ab = compile(parse_trace("hmult %10 %0 %1 @5\nhrot %11 %2 7 @4\n"), params,
                          ks_params(2));
  const auto ba = compile(parse_trace("hrot %11 %2 7 @4\nhmult %10 %0 %1 @5\n"), params,
                          ks_params(2));
  CHECK(ab.nodes.size() == ba.nodes.size());
  CHECK(shape(ab) == shape(ba));
}

TEST_CASE("lowering a single-core mapping stays local") {
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));
  const auto low = lower(g, cluster(1, 1, 1, 1), CoreModel{}, ks::DuplicationMode::Auto);
  for (const auto& p : low.packets) {
    const bool core_to_core = p.src.kind == nop::Endpoint::Kind::Core &&
                              p.dst.kind == nop::Endpoint::Kind::Core;
    CHECK_FALSE(core_to_core);  // only memory streams remain
  }
  CHECK(low.ledger.core_to_core() == 0);
  CHECK(low.exchange_elements == 0);
  CHECK(low.permute_elements == 0);
  CHECK(low.hbm_elements > 0);
  CHECK_FALSE(low.micro.empty());
  for (const auto& m : low.micro) CHECK(m.core == 0);
}

TEST_CASE("transform exchanges match the mapping generators") {
  const auto cfg = cluster(4, 4, 2, 2);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));
  const auto low = lower(g, cfg, CoreModel{}, ks::DuplicationMode::Auto);
  const auto pl = mapping::place_polynomial(g.n, g.aux_start + g.aux, cfg);

  u32 checked = 0;
  for (const auto& v : low.graph.nodes) {
    if (v.kind != NodeKind::Ntt && v.kind != NodeKind::Intt) continue;
    // the shuffle phase is the exchange node gated by this transform alone
    for (const auto& x : low.graph.nodes) {
      if (x.kind != NodeKind::Exchange || x.deps != std::vector<u32>{v.id}) continue;
      std::multiset<PacketKey> expect;
      for (const auto& p : mapping::ntt_exchange_packets(pl, v.limb_ids))
        expect.insert({p.src_core, p.dst_core, p.elements});
      if (expect != exchange_packets_of(low, x.id)) continue;
      ++checked;
      break;
    }
  }
  // every transform in the graph found its generator-exact exchange
  u32 transforms = 0;
  for (const auto& v : low.graph.nodes)
    transforms += (v.kind == NodeKind::Ntt || v.kind == NodeKind::Intt) ? 1 : 0;
  CHECK(checked == transforms);
  CHECK(transforms > 0);
}

TEST_CASE("duplication mode switches conversion packet shapes") {
  const auto cfg = cluster(4, 4, 2, 2);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));
  const auto off = lower(g, cfg, CoreModel{}, ks::DuplicationMode::Off);
  const auto on = lower(g, cfg, CoreModel{}, ks::DuplicationMode::On);

  auto post_bconv_exchanges = [](const Lowered& low) {
    u32 count = 0;
    for (const auto& x : low.graph.nodes) {
      if (x.kind != NodeKind::Exchange || x.deps.size() != 1) continue;
      if (low.graph.nodes[x.deps[0]].kind == NodeKind::BConv) ++count;
    }
    return count;
  };
  // redistribution scatters outputs after computing; duplication owns its
  // outputs in place and only broadcasts inputs beforehand
  CHECK(post_bconv_exchanges(off) > 0);
  CHECK(post_bconv_exchanges(on) == 0);
  CHECK(off.ledger.limbs_broadcast == 0);
  CHECK(on.ledger.limbs_redistributed == 0);
  for (const auto& c : off.ledger.conversions)
    CHECK(c.strategy == mapping::BConvStrategy::Redistribute);
  for (const auto& c : on.ledger.conversions)
    CHECK(c.strategy == mapping::BConvStrategy::Duplicate);
  CHECK(off.ledger.core_to_core() != on.ledger.core_to_core());
}

TEST_CASE("per-op ledgers reproduce the key-switching account") {
  const auto cfg = cluster(4, 4, 2, 2);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));
  const auto pl = mapping::place_polynomial(g.n, g.aux_start + g.aux, cfg);

  for (const auto mode : {ks::DuplicationMode::Auto, ks::DuplicationMode::Off,
                          ks::DuplicationMode::On}) {
    const auto low = lower(g, cfg, CoreModel{}, mode);
    REQUIRE(low.op_ledgers.size() == 1);
    CHECK(low.op_ledgers[0].kind == OpKind::HMult);
    CHECK(low.op_ledgers[0].level == 6);

    ks::KeySwitchParams p = ks_params(2);
    p.level = 6;
    ks::KeySwitchOptions opt;
    opt.placement = pl;
    opt.mode = mode;
    const auto want = ks::keyswitch_ledger(p, opt, g.n, g.aux_start);
    CHECK(ledgers_equal(low.op_ledgers[0].ledger, want));
    CHECK(ledgers_equal(low.ledger, want));  // single op: global account equal
  }
}

TEST_CASE("lowering rejects meshes that cannot split the ring") {
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 4, 1), small_params(), ks_params(1));
  CHECK_THROWS_AS(lower(g, cluster(3, 1, 1, 1), CoreModel{}, ks::DuplicationMode::Auto),
                  PlacementMismatch);
}

TEST_CASE("an empty program simulates to zero cycles") {
  const auto g = compile({}, small_params(), ks_params(1));
  const auto cfg = cluster(2, 2, 1, 1);
  const auto low = lower(g, cfg, CoreModel{}, ks::DuplicationMode::Auto);
  const auto rep = simulate(low, net_for(cfg));
  CHECK(rep.total_cycles == 0);
  CHECK(rep.net.packets_injected == 0);
  CHECK_NOTHROW(audit_schedule(low, rep));
}

TEST_CASE("a lone transform runs for its closed-form duration") {
  // 12 stages x ceil((4096/2) / min(8*16, 128*6/3)) = 12 * 16 = 192 cycles
  const auto g = lone_transform_graph(12);
  CoreModel core;
  core.lanes = 128;
  core.submodules = 8;
  const auto cfg = cluster(1, 1, 1, 1);
  const auto low = lower(g, cfg, core, ks::DuplicationMode::Auto);
  REQUIRE(low.micro.size() == 1);
  CHECK(low.micro[0].duration == 192);

  const auto rep = simulate(low, net_for(cfg));
  CHECK(rep.total_cycles == 192);
  CHECK(rep.fu_busy[size_t(FuKind::Nttu)] == 192);
  CHECK(rep.kind_cycles[size_t(NodeKind::Ntt)] == 192);
  CHECK(rep.butterflies == u64(4096 / 2) * 12);
  CHECK(rep.net.packets_injected == 0);
  CHECK_NOTHROW(audit_schedule(low, rep));

  // halving the submodules halves the butterfly rate: twice the cycles
  CoreModel slow = core;
  slow.submodules = 4;
  const auto rep2 = simulate(lower(g, cfg, slow, ks::DuplicationMode::Auto), net_for(cfg));
  CHECK(rep2.total_cycles == 384);
}

TEST_CASE("simulation is deterministic") {
  const auto cfg = cluster(4, 4, 2, 2);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));
  const auto low = lower(g, cfg, CoreModel{}, ks::DuplicationMode::Auto);
  const auto a = simulate(low, net_for(cfg));
  const auto b = simulate(low, net_for(cfg));
  CHECK(a.total_cycles == b.total_cycles);
  CHECK(a.fu_busy == b.fu_busy);
  CHECK(a.kind_cycles == b.kind_cycles);
  CHECK(a.net.flit_hops == b.net.flit_hops);
  CHECK(a.net.packets_delivered == b.net.packets_delivered);
  REQUIRE(a.events.size() == b.events.size());
  for (size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].start == b.events[i].start);
    CHECK(a.events[i].done == b.events[i].done);
  }
}

TEST_CASE("a full key switching schedules, audits, and balances its books") {
  const auto cfg = cluster(4, 4, 2, 2);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));

  for (const auto mode : {ks::DuplicationMode::Off, ks::DuplicationMode::On}) {
    const auto low = lower(g, cfg, CoreModel{}, mode);
    const auto rep = simulate(low, net_for(cfg));
    CHECK(rep.total_cycles > 0);
    CHECK(rep.net.packets_injected > 0);  // distributed phases must hit the wire
    CHECK_NOTHROW(audit_schedule(low, rep));

    u64 wire = 0, mem = 0;
    for (const auto& p : low.packets) {
      const bool memory = p.src.kind == nop::Endpoint::Kind::Hbm ||
                          p.dst.kind == nop::Endpoint::Kind::Hbm;
      (memory ? mem : wire) += p.elements;
    }
    CHECK(wire == rep.core_to_core_elements());
    CHECK(mem == rep.hbm_elements);
    CHECK(rep.hbm_bytes == mem * 4);
    CHECK(rep.net.flits_injected == rep.net.flits_delivered);

    // the audit is not a rubber stamp: a corrupted log must fail
    auto bad = rep;
    bad.events[bad.events.size() / 2].start += 1;
    CHECK_THROWS_AS(audit_schedule(low, bad), InvalidPlan);
  }
}

TEST_CASE("more resources never slow the program") {
  const auto cfg = cluster(4, 4, 2, 2);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));

  CoreModel base;
  base.lanes = 64;
  CoreModel fat = base;
  fat.lanes = 128;
  fat.submodules = 8;
  const auto slow_rep = simulate(lower(g, cfg, base, ks::DuplicationMode::Auto), net_for(cfg));
  const auto fast_rep = simulate(lower(g, cfg, fat, ks::DuplicationMode::Auto), net_for(cfg));
  CHECK(fast_rep.total_cycles <= slow_rep.total_cycles);

  auto wide = net_for(cfg);
  wide.bisection_gbps *= 2;
  const auto wide_rep = simulate(lower(g, cfg, base, ks::DuplicationMode::Auto), wide);
  CHECK(wide_rep.total_cycles <= slow_rep.total_cycles);
}

TEST_CASE("schedules that cannot fit the register files are rejected") {
  // a 16 KiB transform tile can never fit a 1 KiB scratchpad
  const auto g = lone_transform_graph(12);
  CoreModel tiny;
  tiny.rf_scratch_bytes = 1024;
  const auto cfg = cluster(1, 1, 1, 1);
  const auto low = lower(g, cfg, tiny, ks::DuplicationMode::Auto);
  CHECK_THROWS_AS(simulate(low, net_for(cfg)), CapacityExceeded);

  // switching-key tiles overflow a starved auxiliary pool
  const auto cfg4 = cluster(4, 4, 2, 2);
  const auto ksg = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(),
                           ks_params(2));
  CoreModel aux_tiny;
  aux_tiny.rf_aux_bytes = 256;
  const auto low4 = lower(ksg, cfg4, aux_tiny, ks::DuplicationMode::Auto);
  CHECK_THROWS_AS(simulate(low4, net_for(cfg4)), CapacityExceeded);

  // initial operands alone can exceed residency
  CoreModel sc_tiny;
  sc_tiny.rf_scratch_bytes = 16 * 64;  // 64 bytes per core on the 4x4 mesh
  const auto low5 = lower(ksg, cfg4, sc_tiny, ks::DuplicationMode::Auto);
  CHECK_THROWS_AS(simulate(low5, net_for(cfg4)), CapacityExceeded);
}

TEST_CASE("energy accounting is a linear function of the counters") {
  const auto cfg = cluster(4, 4, 2, 2);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));
  const auto rep = simulate(lower(g, cfg, CoreModel{}, ks::DuplicationMode::Auto), net_for(cfg));

  EnergyTable zero;
  for (const auto& k : energy_keys()) zero.joules[k] = 0.0;
  const auto z = energy_account(rep, zero);
  CHECK(z.total == 0.0);
  for (const auto& [k, v] : z.terms) CHECK(v == 0.0);

  EnergyTable ones = zero;
  for (const auto& k : energy_keys()) ones.joules[k] = 1.0;
  const auto o = energy_account(rep, ones);
  const double counter_sum = double(rep.net.flit_hops) + double(rep.butterflies) +
                             double(rep.macs) + double(rep.ew_ops) + double(rep.auto_elements) +
                             double(rep.expanded_elements) + double(rep.rf_reads) +
                             double(rep.rf_writes) + double(rep.hbm_bytes);
  CHECK(o.total == doctest::Approx(counter_sum));

  // doubling one constant doubles exactly that term
  EnergyTable hop = zero;
  hop.joules["hop_flit"] = 2.0;
  const auto h = energy_account(rep, hop);
  CHECK(h.terms.at("hop_flit") == doctest::Approx(2.0 * double(rep.net.flit_hops)));
  CHECK(h.total == doctest::Approx(h.terms.at("hop_flit")));

  EnergyTable missing = zero;
  missing.joules.erase("mac");
  CHECK_THROWS_AS(energy_account(rep, missing), MissingConstant);
}

TEST_CASE("duplication's wire savings land in the network term exactly") {
  // two adjacent cores, one block each: every conversion packet crosses one
  // mesh link and is a whole number of flits, and both memory ports sit on
  // their own corner, so mesh flit-hops divide out to the ledger ratio
  const auto cfg = cluster(2, 1, 1, 1);
  const auto g = compile(gen_workload(WorkloadKind::KsMicro, 6, 1), small_params(), ks_params(2));

  auto run = [&](ks::DuplicationMode mode) {
    return simulate(lower(g, cfg, CoreModel{}, mode), net_for(cfg));
  };
  const auto off = run(ks::DuplicationMode::Off);
  const auto on = run(ks::DuplicationMode::On);

  auto hbm_flits = [](const SimReport& rep) {
    u64 total = 0;
    for (const auto& c : rep.net_completions)
      if (c.desc.src.kind == nop::Endpoint::Kind::Hbm ||
          c.desc.dst.kind == nop::Endpoint::Kind::Hbm)
        total += c.flits;
    return total;
  };
  const u64 hbm_off = hbm_flits(off), hbm_on = hbm_flits(on);
  CHECK(hbm_off == hbm_on);  // switching-key streams are mode-independent

  const u64 mesh_off = off.net.flit_hops - hbm_off;
  const u64 mesh_on = on.net.flit_hops - hbm_on;
  const u64 moved_off = off.ledger.core_to_core();
  const u64 moved_on = on.ledger.core_to_core();
  CHECK(moved_off != moved_on);
  CHECK(mesh_off * moved_on == mesh_on * moved_off);  // exact ratio tracking

  // and the energy hook scales with the hop counter alone
  EnergyTable hop;
  for (const auto& k : energy_keys()) hop.joules[k] = 0.0;
  hop.joules["hop_flit"] = 1.0;
  CHECK(energy_account(off, hop).total == doctest::Approx(double(off.net.flit_hops)));
  CHECK(energy_account(on, hop).total == doctest::Approx(double(on.net.flit_hops)));
}

TEST_CASE("rescale matches the residue-division oracle") {
  rns::CkksParams p;
  p.log_n = 5;
  p.max_level = 5;
  p.aux_count = 1;
  const auto basis = rns::generate_basis(p, 0);
  const u32 n = p.n(), lv = 5;

  std::vector<std::vector<u32>> rows(lv, std::vector<u32>(n));
  for (u32 l = 0; l < lv; ++l) oracle::fill_random(rows[l], basis->primes[l].q, 900 + l);

  rns::RnsPolynomial x(basis, lv, rns::Domain::Coefficient);
  for (u32 l = 0; l < lv; ++l) std::copy(rows[l].begin(), rows[l].end(), x.limb(l).begin());
  transform::ntt_poly(x);
  auto out = rescale_poly(x);
  transform::intt_poly(out);
  REQUIRE(out.limb_count() == lv - 1);

  const u32 q_last = basis->primes[lv - 1].q;
  for (u32 l = 0; l + 1 < lv; ++l) {
    const u32 q = basis->primes[l].q;
    const u32 inv = oracle::modpow(q_last % q, q - 2, q);
    for (u32 c = 0; c < n; ++c) {
      // (x - lift(x mod q_last)) / q_last, all in residue arithmetic
      const u32 rep = rows[lv - 1][c] % q;
      const u32 diff = u32((u64(rows[l][c]) + q - rep) % q);
      CHECK(out.at(l, c) == oracle::modmul(diff, inv, q));
    }
  }

  CHECK_THROWS_AS(rescale_poly(out), DomainMismatch);  // coefficient form rejected
  rns::RnsPolynomial one(basis, 1, rns::Domain::Evaluation);
  CHECK_THROWS_AS(rescale_poly(one), InvalidPlan);
}

TEST_CASE("the executor is a pure function of trace, basis, and seed") {
  rns::CkksParams p;
  p.log_n = 6;
  p.max_level = 6;
  p.aux_count = 2;
  const auto basis = rns::generate_basis(p, 0);
  ExecOptions opt;
  opt.digits = 2;
  opt.seed = 7;

  const auto trace = gen_workload(WorkloadKind::SweepUnit, 5, 3);
  const auto r1 = execute_trace(trace, basis, opt);
  const auto r2 = execute_trace(trace, basis, opt);
  REQUIRE(r1.size() == r2.size());
  for (const auto& [reg, ct] : r1) {
    REQUIRE(r2.count(reg) == 1);
    CHECK(ciphertext_digest(ct) == ciphertext_digest(r2.at(reg)));
  }

  ExecOptions other = opt;
  other.seed = 8;
  const auto r3 = execute_trace(trace, basis, other);
  bool any_diff = false;
  for (const auto& [reg, ct] : r1)
    any_diff |= ciphertext_digest(ct) != ciphertext_digest(r3.at(reg));
  CHECK(any_diff);

  // operand order cannot matter for commutative ops
  const auto ab = execute_trace(parse_trace("hadd %2 %0 %1 @4\n"), basis, opt);
  const auto ba = execute_trace(parse_trace("hadd %2 %1 %0 @4\n"), basis, opt);
  CHECK(ciphertext_digest(ab.at(2)) == ciphertext_digest(ba.at(2)));
  const auto mab = execute_trace(parse_trace("hmult %2 %0 %1 @4\n"), basis, opt);
  const auto mba = execute_trace(parse_trace("hmult %2 %1 %0 @4\n"), basis, opt);
  CHECK(ciphertext_digest(mab.at(2)) == ciphertext_digest(mba.at(2)));

  // rescale drops exactly one level; down-alignment reads stay consistent
  const auto chain = execute_trace(
      parse_trace("hmult %2 %0 %1 @5\nrescale %3 %2 @5\nhadd %4 %3 %0 @4\n"), basis, opt);
  CHECK(chain.at(2).level == 5);
  CHECK(chain.at(3).level == 4);
  CHECK(chain.at(4).level == 4);

  // rotations keep both halves at the op level and actually move data
  const auto rot = execute_trace(parse_trace("hrot %2 %0 3 @4\n"), basis, opt);
  CHECK(rot.at(2).level == 4);
  CHECK(ciphertext_digest(rot.at(2)) != ciphertext_digest(rot.at(0)));
}
