// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "fhemesh/cli/config.hpp"
#include "fhemesh/sched/simulate.hpp"
#include "fhemesh/sched/workload.hpp"

namespace fhemesh::cli {

// A workload resolved to concrete ops: either a registry generator
// (ks-micro, boot-like, sweep-unit) or a trace file in the documented
// one-op-per-line grammar.
struct WorkloadRef {
  std::string name;  // registry name or file path, as given
  u32 level = 0;     // top level of the resolved trace
  u64 seed = 0;
  std::vector<sched::HeOp> ops;
};

WorkloadRef resolve_workload(const RunSpec& spec, const std::string& name_or_path, u64 seed);

// --- Serializable run report (JSON schema version 1) ---------------------
// Every field below round-trips losslessly through report_to_json /
// report_from_json; raw packet logs are emitted separately as CSV.

struct ConversionRow {
  u32 inputs = 0;
  u32 outputs = 0;
  std::string strategy;  // "redistribute" | "duplicate"
  i64 benefit_num = 0;   // duplication benefit in limbs, exact fraction
  i64 benefit_den = 1;
  u64 redistribute_elements = 0;
  u64 duplicate_elements = 0;
  u64 moved_elements = 0;
  bool operator==(const ConversionRow&) const = default;
};

struct OpRow {
  u32 op = 0;
  std::string kind;
  u32 level = 0;
  u64 core_to_core = 0;
  i64 benefit_num = 0;
  i64 benefit_den = 1;
  bool operator==(const OpRow&) const = default;
};

struct NetSummary {
  u64 cycles = 0;
  u64 packets_injected = 0;
  u64 packets_delivered = 0;
  u64 flits_injected = 0;
  u64 flits_delivered = 0;
  u64 flit_hops = 0;
  std::vector<u64> link_flits;
  std::vector<u64> link_busy_cycles;
  bool operator==(const NetSummary&) const = default;
};

struct SimSummary {
  u64 total_cycles = 0;
  std::map<std::string, u64> fu_busy;      // keyed by unit name
  std::map<std::string, u64> kind_cycles;  // keyed by node kind name
  u64 butterflies = 0;
  u64 macs = 0;
  u64 ew_ops = 0;
  u64 auto_elements = 0;
  u64 expanded_elements = 0;
  u64 rf_reads = 0;
  u64 rf_writes = 0;
  u64 hbm_bytes = 0;
  u64 exchange_elements = 0;
  u64 permute_elements = 0;
  u64 hbm_elements = 0;
  u64 conversion_input_elements = 0;
  u64 conversion_output_elements = 0;
  u64 limbs_broadcast = 0;
  u64 limbs_redistributed = 0;
  u64 core_to_core_elements = 0;
  std::vector<ConversionRow> conversions;
  std::vector<OpRow> ops;  // per key-switching op
  NetSummary net;
  std::vector<std::array<u64, 3>> events;  // (node, start, done) per flow node
  bool operator==(const SimSummary&) const = default;
};

struct RunReport {
  u32 schema_version = 1;
  std::string status = "ok";  // "ok" | "failed"
  std::string error;          // diagnostic when failed
  std::string name;           // point label: "<mapping>_<duplication>"
  std::string baseline;       // sweep baseline point name, when assigned
  double speedup = 0.0;       // baseline cycles / this point's cycles
  std::map<std::string, std::string> config;  // canonical flat-key echo
  std::string workload;
  u32 level = 0;
  u64 seed = 0;
  u32 trace_ops = 0;
  SimSummary sim;
  std::map<std::string, double> energy_terms;
  double energy_total = 0.0;
  u64 elements_moved = 0;  // total core-to-core elements
  double seconds = 0.0;    // total cycles at the configured clock
  double eq2_benefit_total = 0.0;   // duplication benefit summed over conversions
  double eq2_benefit_per_ks = 0.0;  // ... averaged per key-switching op
  bool operator==(const RunReport&) const = default;
};

struct RunOutput {
  RunReport report;
  sched::SimReport sim;   // raw engine output (valid when status == "ok")
  sched::Lowered lowered; // node kinds for the packet trace
};

// compile -> lower -> simulate -> account; a failure is captured in the
// report (status/error) rather than thrown, except for config errors.
RunOutput execute_run(const RunSpec& spec, const WorkloadRef& wl, const std::string& name);

std::string report_to_json(const RunReport& rep);
RunReport report_from_json(const std::string& text);

// One row per delivered packet (header documented in the README).
void write_packet_csv(const std::string& path, const RunOutput& out);
// One row per sweep point, deterministic order (header in the README).
void write_summary_csv(const std::string& path, const std::vector<RunReport>& reports);
void write_file(const std::string& path, const std::string& text);

// --- Sweep ----------------------------------------------------------------
// Point grid = mappings x duplications x core counts, in that nesting order
// with core counts ascending. A core-count entry rescales the mapping: both
// mesh and block dimensions scale by sqrt(c / base cores), total lanes stay
// fixed (per-core lanes and submodules shrink as cores grow), and entries
// that do not scale to integers are marked failed. The first point that
// simulates becomes the speedup baseline for every row.
struct SweepPoint {
  std::string name;
  RunSpec spec;
  std::string invalid;  // nonempty: point cannot run, carry the reason
};

std::vector<SweepPoint> expand_sweep(const RunSpec& base);

// Runs every point (worker threads up to `jobs`), writes one JSON report per
// point plus summary.csv under out_dir, and returns the reports in point
// order regardless of scheduling.
std::vector<RunReport> run_sweep(const RunSpec& base, const std::string& workload, u64 seed,
                                 u32 jobs, const std::string& out_dir);

}  // namespace fhemesh::cli
