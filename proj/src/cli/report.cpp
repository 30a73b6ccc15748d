// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <fstream>

#include <json.hpp>

#include "fhemesh/cli/driver.hpp"

namespace fhemesh::cli {

using json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

// Quote a CSV field only when it needs it; quotes double inside quotes.
std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

json conversions_json(const std::vector<ConversionRow>& rows) {
  json arr = json::array();
  for (const auto& c : rows) {
    arr.push_back(json{{"inputs", c.inputs},
                       {"outputs", c.outputs},
                       {"strategy", c.strategy},
                       {"benefit", json::array({c.benefit_num, c.benefit_den})},
                       {"redistribute_elements", c.redistribute_elements},
                       {"duplicate_elements", c.duplicate_elements},
                       {"moved_elements", c.moved_elements}});
  }
  return arr;
}

std::vector<ConversionRow> conversions_from(const json& arr) {
  std::vector<ConversionRow> rows;
  for (const auto& j : arr) {
    ConversionRow c;
    c.inputs = j.at("inputs").get<u32>();
    c.outputs = j.at("outputs").get<u32>();
    c.strategy = j.at("strategy").get<std::string>();
    c.benefit_num = j.at("benefit").at(0).get<i64>();
    c.benefit_den = j.at("benefit").at(1).get<i64>();
    c.redistribute_elements = j.at("redistribute_elements").get<u64>();
    c.duplicate_elements = j.at("duplicate_elements").get<u64>();
    c.moved_elements = j.at("moved_elements").get<u64>();
    rows.push_back(c);
  }
  return rows;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  json ops = json::array();
  for (const auto& o : r.sim.ops) {
    ops.push_back(json{{"op", o.op},
                       {"kind", o.kind},
                       {"level", o.level},
                       {"core_to_core", o.core_to_core},
                       {"benefit", json::array({o.benefit_num, o.benefit_den})}});
  }

  const json j{
      {"schema_version", r.schema_version},
      {"status", r.status},
      {"error", r.error},
      {"name", r.name},
      {"baseline", r.baseline},
      {"speedup", r.speedup},
      {"workload", json{{"name", r.workload},
                        {"level", r.level},
                        {"seed", r.seed},
                        {"ops", r.trace_ops}}},
      {"config", r.config},
      {"sim",
       json{{"total_cycles", r.sim.total_cycles},
            {"fu_busy", r.sim.fu_busy},
            {"kind_cycles", r.sim.kind_cycles},
            {"counters", json{{"butterflies", r.sim.butterflies},
                              {"macs", r.sim.macs},
                              {"ew_ops", r.sim.ew_ops},
                              {"auto_elements", r.sim.auto_elements},
                              {"expanded_elements", r.sim.expanded_elements},
                              {"rf_reads", r.sim.rf_reads},
                              {"rf_writes", r.sim.rf_writes},
                              {"hbm_bytes", r.sim.hbm_bytes}}},
            {"transfers", json{{"exchange_elements", r.sim.exchange_elements},
                               {"permute_elements", r.sim.permute_elements},
                               {"hbm_elements", r.sim.hbm_elements},
                               {"conversion_input_elements", r.sim.conversion_input_elements},
                               {"conversion_output_elements", r.sim.conversion_output_elements},
                               {"limbs_broadcast", r.sim.limbs_broadcast},
                               {"limbs_redistributed", r.sim.limbs_redistributed},
                               {"core_to_core_elements", r.sim.core_to_core_elements}}},
            {"conversions", conversions_json(r.sim.conversions)},
            {"ops", ops},
            {"net", json{{"cycles", r.sim.net.cycles},
                         {"packets_injected", r.sim.net.packets_injected},
                         {"packets_delivered", r.sim.net.packets_delivered},
                         {"flits_injected", r.sim.net.flits_injected},
                         {"flits_delivered", r.sim.net.flits_delivered},
                         {"flit_hops", r.sim.net.flit_hops},
                         {"link_flits", r.sim.net.link_flits},
                         {"link_busy_cycles", r.sim.net.link_busy_cycles}}},
            {"events", r.sim.events}}},
      {"energy", json{{"total", r.energy_total}, {"terms", r.energy_terms}}},
      {"derived", json{{"elements_moved", r.elements_moved},
                       {"seconds", r.seconds},
                       {"eq2_benefit_total", r.eq2_benefit_total},
                       {"eq2_benefit_per_ks", r.eq2_benefit_per_ks}}},
  };
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidConfig(std::string("report is not valid json: ") + e.what());
  }
  try {
    RunReport r;
    r.schema_version = j.at("schema_version").get<u32>();
    if (r.schema_version != 1)
      throw InvalidConfig("unsupported report schema_version " +
                          std::to_string(r.schema_version));
    r.status = j.at("status").get<std::string>();
    r.error = j.at("error").get<std::string>();
    r.name = j.at("name").get<std::string>();
    r.baseline = j.at("baseline").get<std::string>();
    r.speedup = j.at("speedup").get<double>();
    const auto& wl = j.at("workload");
    r.workload = wl.at("name").get<std::string>();
    r.level = wl.at("level").get<u32>();
    r.seed = wl.at("seed").get<u64>();
    r.trace_ops = wl.at("ops").get<u32>();
    r.config = j.at("config").get<std::map<std::string, std::string>>();

    const auto& s = j.at("sim");
    r.sim.total_cycles = s.at("total_cycles").get<u64>();
    r.sim.fu_busy = s.at("fu_busy").get<std::map<std::string, u64>>();
    r.sim.kind_cycles = s.at("kind_cycles").get<std::map<std::string, u64>>();
    const auto& c = s.at("counters");
    r.sim.butterflies = c.at("butterflies").get<u64>();
    r.sim.macs = c.at("macs").get<u64>();
    r.sim.ew_ops = c.at("ew_ops").get<u64>();
    r.sim.auto_elements = c.at("auto_elements").get<u64>();
    r.sim.expanded_elements = c.at("expanded_elements").get<u64>();
    r.sim.rf_reads = c.at("rf_reads").get<u64>();
    r.sim.rf_writes = c.at("rf_writes").get<u64>();
    r.sim.hbm_bytes = c.at("hbm_bytes").get<u64>();
    const auto& t = s.at("transfers");
    r.sim.exchange_elements = t.at("exchange_elements").get<u64>();
    r.sim.permute_elements = t.at("permute_elements").get<u64>();
    r.sim.hbm_elements = t.at("hbm_elements").get<u64>();
    r.sim.conversion_input_elements = t.at("conversion_input_elements").get<u64>();
    r.sim.conversion_output_elements = t.at("conversion_output_elements").get<u64>();
    r.sim.limbs_broadcast = t.at("limbs_broadcast").get<u64>();
    r.sim.limbs_redistributed = t.at("limbs_redistributed").get<u64>();
    r.sim.core_to_core_elements = t.at("core_to_core_elements").get<u64>();
    r.sim.conversions = conversions_from(s.at("conversions"));
    for (const auto& oj : s.at("ops")) {
      OpRow o;
      o.op = oj.at("op").get<u32>();
      o.kind = oj.at("kind").get<std::string>();
      o.level = oj.at("level").get<u32>();
      o.core_to_core = oj.at("core_to_core").get<u64>();
      o.benefit_num = oj.at("benefit").at(0).get<i64>();
      o.benefit_den = oj.at("benefit").at(1).get<i64>();
      r.sim.ops.push_back(o);
    }
    const auto& n = s.at("net");
    r.sim.net.cycles = n.at("cycles").get<u64>();
    r.sim.net.packets_injected = n.at("packets_injected").get<u64>();
    r.sim.net.packets_delivered = n.at("packets_delivered").get<u64>();
    r.sim.net.flits_injected = n.at("flits_injected").get<u64>();
    r.sim.net.flits_delivered = n.at("flits_delivered").get<u64>();
    r.sim.net.flit_hops = n.at("flit_hops").get<u64>();
    r.sim.net.link_flits = n.at("link_flits").get<std::vector<u64>>();
    r.sim.net.link_busy_cycles = n.at("link_busy_cycles").get<std::vector<u64>>();
    r.sim.events = s.at("events").get<std::vector<std::array<u64, 3>>>();

    const auto& e = j.at("energy");
    r.energy_total = e.at("total").get<double>();
    r.energy_terms = e.at("terms").get<std::map<std::string, double>>();
    const auto& d = j.at("derived");
    r.elements_moved = d.at("elements_moved").get<u64>();
    r.seconds = d.at("seconds").get<double>();
    r.eq2_benefit_total = d.at("eq2_benefit_total").get<double>();
    r.eq2_benefit_per_ks = d.at("eq2_benefit_per_ks").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("report json is missing fields: ") + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

void write_packet_csv(const std::string& path, const RunOutput& out) {
  std::string csv =
      "packet,node,node_kind,src_kind,src,dst_kind,dst,elements,bytes,flits,vc,"
      "inject_cycle,deliver_cycle\n";
  auto endpoint_kind = [](const nop::Endpoint& e) {
    return e.kind == nop::Endpoint::Kind::Hbm ? "hbm" : "core";
  };
  for (const auto& c : out.sim.net_completions) {
    const u32 node = out.sim.packet_nodes.at(size_t(c.id));
    const auto kind = sched::node_kind_name(out.lowered.graph.nodes.at(node).kind);
    csv += std::to_string(c.id) + ',' + std::to_string(node) + ',' + kind + ',' +
           endpoint_kind(c.desc.src) + ',' + std::to_string(c.desc.src.idx) + ',' +
           endpoint_kind(c.desc.dst) + ',' + std::to_string(c.desc.dst.idx) + ',' +
           std::to_string(c.desc.elements) + ',' + std::to_string(c.desc.elements * 4) + ',' +
           std::to_string(c.flits) + ',' + std::to_string(c.vc) + ',' +
           std::to_string(c.inject_cycle) + ',' + std::to_string(c.deliver_cycle) + '\n';
  }
  write_file(path, csv);
}

void write_summary_csv(const std::string& path, const std::vector<RunReport>& reports) {
  std::string csv =
      "point,name,status,mapping,duplication,cores,lanes,workload,level,seed,trace_ops,"
      "cycles,seconds,elements_moved,exchange_elements,permute_elements,"
      "conversion_elements,hbm_bytes,energy_total,eq2_benefit_total,eq2_benefit_per_ks,"
      "speedup,error\n";
  for (size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    const u64 cores = std::stoull(r.config.at("package.mesh_x")) *
                      std::stoull(r.config.at("package.mesh_y"));
    const u64 conversion_elements =
        r.sim.conversion_input_elements + r.sim.conversion_output_elements;
    csv += std::to_string(i) + ',' + csv_escape(r.name) + ',' + r.status + ',' +
           r.config.at("package.mapping") + ',' + r.config.at("package.duplication") + ',' +
           std::to_string(cores) + ',' + r.config.at("package.lanes") + ',' +
           csv_escape(r.workload) + ',' + std::to_string(r.level) + ',' +
           std::to_string(r.seed) + ',' + std::to_string(r.trace_ops) + ',' +
           std::to_string(r.sim.total_cycles) + ',' + format_double(r.seconds) + ',' +
           std::to_string(r.elements_moved) + ',' + std::to_string(r.sim.exchange_elements) +
           ',' + std::to_string(r.sim.permute_elements) + ',' +
           std::to_string(conversion_elements) + ',' + std::to_string(r.sim.hbm_bytes) + ',' +
           format_double(r.energy_total) + ',' + format_double(r.eq2_benefit_total) + ',' +
           format_double(r.eq2_benefit_per_ks) + ',' + format_double(r.speedup) + ',' +
           csv_escape(r.error) + '\n';
  }
  write_file(path, csv);
}

}  // namespace fhemesh::cli
