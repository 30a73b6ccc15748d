// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/cli/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <boost/rational.hpp>

#include "fhemesh/sched/flowgraph.hpp"

namespace fhemesh::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidConfig("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double ratio(const Rational& r) { return boost::rational_cast<double>(r); }

// Integer sqrt when exact, 0 otherwise.
u32 exact_sqrt(u32 v) {
  const u32 r = u32(std::lround(std::sqrt(double(v))));
  return r * r == v ? r : 0;
}

SimSummary summarize(const sched::SimReport& sim) {
  SimSummary s;
  s.total_cycles = sim.total_cycles;
  for (u32 i = 0; i < sched::kFuKinds; ++i)
    s.fu_busy[sched::fu_name(sched::FuKind(i))] = sim.fu_busy[i];
  for (u32 i = 0; i < sched::kNodeKinds; ++i)
    s.kind_cycles[sched::node_kind_name(sched::NodeKind(i))] = sim.kind_cycles[i];
  s.butterflies = sim.butterflies;
  s.macs = sim.macs;
  s.ew_ops = sim.ew_ops;
  s.auto_elements = sim.auto_elements;
  s.expanded_elements = sim.expanded_elements;
  s.rf_reads = sim.rf_reads;
  s.rf_writes = sim.rf_writes;
  s.hbm_bytes = sim.hbm_bytes;
  s.exchange_elements = sim.exchange_elements;
  s.permute_elements = sim.permute_elements;
  s.hbm_elements = sim.hbm_elements;
  s.conversion_input_elements = sim.ledger.input_elements;
  s.conversion_output_elements = sim.ledger.output_elements;
  s.limbs_broadcast = sim.ledger.limbs_broadcast;
  s.limbs_redistributed = sim.ledger.limbs_redistributed;
  s.core_to_core_elements = sim.core_to_core_elements();
  for (const auto& c : sim.ledger.conversions) {
    ConversionRow row;
    row.inputs = c.inputs;
    row.outputs = c.outputs;
    row.strategy =
        c.strategy == mapping::BConvStrategy::Duplicate ? "duplicate" : "redistribute";
    row.benefit_num = c.benefit.numerator();
    row.benefit_den = c.benefit.denominator();
    row.redistribute_elements = c.redistribute_elements;
    row.duplicate_elements = c.duplicate_elements;
    row.moved_elements = c.moved_elements;
    s.conversions.push_back(row);
  }
  for (const auto& ol : sim.op_ledgers) {
    OpRow row;
    row.op = ol.op;
    row.kind = sched::op_name(ol.kind);
    row.level = ol.level;
    row.core_to_core = ol.ledger.core_to_core();
    const Rational b = ol.ledger.total_benefit();
    row.benefit_num = b.numerator();
    row.benefit_den = b.denominator();
    s.ops.push_back(row);
  }
  s.net.cycles = sim.net.cycles;
  s.net.packets_injected = sim.net.packets_injected;
  s.net.packets_delivered = sim.net.packets_delivered;
  s.net.flits_injected = sim.net.flits_injected;
  s.net.flits_delivered = sim.net.flits_delivered;
  s.net.flit_hops = sim.net.flit_hops;
  s.net.link_flits = sim.net.link_flits;
  s.net.link_busy_cycles = sim.net.link_busy_cycles;
  for (const auto& ev : sim.events) s.events.push_back({u64(ev.node), ev.start, ev.done});
  return s;
}

}  // namespace

WorkloadRef resolve_workload(const RunSpec& spec, const std::string& name_or_path, u64 seed) {
  WorkloadRef wl;
  wl.name = name_or_path;
  wl.seed = seed;
  try {
    const auto kind = sched::parse_workload_kind(name_or_path);
    wl.level = spec.workload_level();
    wl.ops = sched::gen_workload(kind, wl.level, seed);
    return wl;
  } catch (const InvalidConfig&) {
    // not a registry name; fall through to the trace-file path
  }
  std::string text;
  try {
    text = read_file(name_or_path);
  } catch (const InvalidConfig&) {
    throw InvalidConfig("workload '" + name_or_path +
                        "' is neither a registry name (ks-micro, boot-like, sweep-unit) "
                        "nor a readable trace file");
  }
  wl.ops = sched::parse_trace(text);
  for (const auto& op : wl.ops) wl.level = std::max(wl.level, op.level);
  return wl;
}

RunOutput execute_run(const RunSpec& spec, const WorkloadRef& wl, const std::string& name) {
  RunOutput out;
  RunReport& r = out.report;
  r.name = name;
  r.workload = wl.name;
  r.level = wl.level;
  r.seed = wl.seed;
  r.trace_ops = u32(wl.ops.size());
  r.config = spec.canonical_config();
  try {
    spec.validate();
    keyswitch::KeySwitchParams kp;
    kp.digits = spec.digits;
    kp.aux = spec.keyswitch_aux();
    const auto graph = sched::compile(wl.ops, spec.ckks, kp);
    out.lowered = sched::lower(graph, spec.cluster(), spec.core_model(), spec.duplication);
    out.sim = sched::simulate(out.lowered, spec.net_config());
    const auto energy = sched::energy_account(out.sim, spec.energy);

    r.sim = summarize(out.sim);
    r.energy_terms = energy.terms;
    r.energy_total = energy.total;
    r.elements_moved = r.sim.core_to_core_elements;
    r.seconds = double(out.sim.total_cycles) / (spec.clock_ghz * 1e9);
    r.eq2_benefit_total = ratio(out.sim.ledger.total_benefit());
    if (!out.sim.op_ledgers.empty()) {
      Rational per_ks{0};
      for (const auto& ol : out.sim.op_ledgers) per_ks += ol.ledger.total_benefit();
      r.eq2_benefit_per_ks = ratio(per_ks) / double(out.sim.op_ledgers.size());
    }
  } catch (const Error& e) {
    r.status = "failed";
    r.error = e.what();
  }
  return out;
}

std::vector<SweepPoint> expand_sweep(const RunSpec& base) {
  std::vector<std::string> maps = base.sweep_mappings;
  if (maps.empty()) maps = {base.mapping};
  std::vector<std::string> dups = base.sweep_duplications;
  if (dups.empty()) dups = {duplication_name(base.duplication)};
  std::vector<u32> cores = base.sweep_cores;
  if (cores.empty()) cores = {base.cluster().cores()};
  std::sort(cores.begin(), cores.end());
  cores.erase(std::unique(cores.begin(), cores.end()), cores.end());

  std::vector<SweepPoint> points;
  for (const auto& map_text : maps) {
    const auto base_cluster = mapping::parse_mapping(map_text);
    for (const auto& dup : dups) {
      for (const u32 c : cores) {
        SweepPoint pt;
        pt.spec = base;
        pt.spec.mapping = map_text;
        pt.spec.duplication = parse_duplication(dup);
        pt.spec.sweep_mappings.clear();
        pt.spec.sweep_duplications.clear();
        pt.spec.sweep_cores.clear();

        auto scaled = base_cluster;
        const u32 bc = base_cluster.cores();
        u32 lanes = base.lanes;
        bool ok = true;
        std::string why;
        if (c != bc) {
          // grow or shrink every dimension by the exact square-root factor
          u32 up = 0, down = 0;
          if (c % bc == 0) up = exact_sqrt(c / bc);
          if (bc % c == 0) down = exact_sqrt(bc / c);
          if (up > 0) {
            scaled.mesh_x *= up;
            scaled.mesh_y *= up;
            scaled.block_h *= up;
            scaled.block_w *= up;
          } else if (down > 0 && scaled.mesh_x % down == 0 && scaled.mesh_y % down == 0 &&
                     scaled.block_h % down == 0 && scaled.block_w % down == 0) {
            scaled.mesh_x /= down;
            scaled.mesh_y /= down;
            scaled.block_h /= down;
            scaled.block_w /= down;
          } else {
            ok = false;
            why = "core count " + std::to_string(c) + " is not an exact square scaling of " +
                  map_text;
          }
          const u64 total_lanes = u64(base.lanes) * bc;
          if (ok && (total_lanes % c != 0 || total_lanes / c == 0)) {
            ok = false;
            why = "total lane budget " + std::to_string(total_lanes) +
                  " does not split over " + std::to_string(c) + " cores";
          }
          if (ok) {
            lanes = u32(total_lanes / c);
            const u64 subs = u64(base.submodules) * lanes;
            if (subs % base.lanes != 0 || subs / base.lanes == 0) {
              ok = false;
              why = "submodule count does not scale with " + std::to_string(lanes) +
                    " lanes per core";
            } else {
              pt.spec.submodules = u32(subs / base.lanes);
            }
          }
        }
        if (ok) {
          pt.spec.mapping = mapping::mapping_to_string(scaled);
          pt.spec.lanes = lanes;
        } else {
          pt.invalid = why;
        }
        pt.name = pt.spec.mapping + "_" + dup;
        points.push_back(std::move(pt));
      }
    }
  }
  return points;
}

std::vector<RunReport> run_sweep(const RunSpec& base, const std::string& workload, u64 seed,
                                 u32 jobs, const std::string& out_dir) {
  const auto points = expand_sweep(base);
  const auto wl = resolve_workload(base, workload, seed);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + out_dir + "': " + ec.message());

  std::vector<RunReport> reports(points.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      const auto& pt = points[i];
      if (!pt.invalid.empty()) {
        RunReport r;
        r.name = pt.name;
        r.status = "failed";
        r.error = pt.invalid;
        r.config = pt.spec.canonical_config();
        r.workload = wl.name;
        r.level = wl.level;
        r.seed = wl.seed;
        r.trace_ops = u32(wl.ops.size());
        reports[i] = std::move(r);
      } else {
        reports[i] = execute_run(pt.spec, wl, pt.name).report;
      }
    }
  };
  const u32 n_threads = std::max<u32>(1, std::min<u32>(std::max<u32>(jobs, 1),
                                                       u32(points.size() == 0 ? 1 : points.size())));
  std::vector<std::thread> pool;
  for (u32 t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // first surviving point anchors the speedup column
  size_t baseline = reports.size();
  for (size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].status == "ok") {
      baseline = i;
      break;
    }
  }
  if (baseline < reports.size()) {
    const auto& name = reports[baseline].name;
    const u64 base_cycles = reports[baseline].sim.total_cycles;
    for (auto& r : reports) {
      r.baseline = name;
      if (r.status == "ok" && r.sim.total_cycles > 0)
        r.speedup = double(base_cycles) / double(r.sim.total_cycles);
    }
  }

  for (size_t i = 0; i < reports.size(); ++i) {
    const std::string path =
        out_dir + "/point_" + std::to_string(i) + "_" + reports[i].name + ".json";
    write_file(path, report_to_json(reports[i]));
  }
  write_summary_csv(out_dir + "/summary.csv", reports);
  return reports;
}

}  // namespace fhemesh::cli
