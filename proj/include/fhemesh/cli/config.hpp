// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "fhemesh/keyswitch/digits.hpp"
#include "fhemesh/mapping/cluster.hpp"
#include "fhemesh/nop/net.hpp"
#include "fhemesh/rns/params.hpp"
#include "fhemesh/sched/lower.hpp"
#include "fhemesh/sched/simulate.hpp"

namespace fhemesh::cli {

// Configuration files are flat dotted-key assignments, one per line:
//
//   # comment
//   package.mapping = 8x8-BK-4x4
//   energy.hop_flit = 1.2e-12
//
// Keys match [a-z0-9_]+(.[a-z0-9_]+)*; values are the trimmed remainder of
// the line. Unknown and duplicate keys are errors (fail-closed). Environment
// variables override file values: a key maps to FHEMESH_ + uppercase(key)
// with every '.' replaced by '__' (package.mesh_x -> FHEMESH_PACKAGE__MESH_X);
// any other FHEMESH_-prefixed variable is an error.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::string origin;  // "line 12" or "env FHEMESH_..."
};

struct ConfigText {
  std::vector<ConfigEntry> entries;
};

ConfigText parse_config_text(const std::string& text);
void apply_env_overrides(ConfigText& cfg);

keyswitch::DuplicationMode parse_duplication(const std::string& text);
const char* duplication_name(keyswitch::DuplicationMode mode);

// Fully resolved run configuration: package shape, ring parameters, key
// switching, workload defaults, energy constants, and sweep axes. Field
// defaults are the package's default profile: a 4x4 mesh of 64-lane cores
// (1,024 lanes total), 2 TB/s bisection, 256 MiB scratchpad and 16 MiB
// auxiliary register files package-wide, and a degree 2^16 ring with a
// 48+12 limb chain.
struct RunSpec {
  RunSpec();  // fills the energy table with zeroed constants

  u32 lanes = 64;
  u32 submodules = 4;
  double bisection_gbps = 2000.0;
  u32 hbm_ports = 2;
  double hbm_gbps_per_port = 500.0;
  double clock_ghz = 1.0;
  u64 rf_scratch_mib = 256;
  u64 rf_aux_mib = 16;
  std::string mapping = "4x4-BK-2x2";
  keyswitch::DuplicationMode duplication = keyswitch::DuplicationMode::Auto;
  bool default_profile = true;  // enforce cores x lanes = 1,024

  u32 flit_bits = 256;
  u32 vcs = 4;
  u32 vc_buffer_flits = 16;
  u32 hop_cycles = 3;
  u64 hbm_latency = 100;

  rns::CkksParams ckks;

  u32 digits = 3;
  u32 aux_limbs = 0;  // auxiliary limbs engaged per conversion; 0 = all

  u32 level = 0;  // generated-workload level; 0 = ckks.max_level
  u64 seed = 1;

  sched::EnergyTable energy;  // complete table; constants default to 0

  std::vector<std::string> sweep_mappings;     // empty = just `mapping`
  std::vector<std::string> sweep_duplications; // empty = just `duplication`
  std::vector<u32> sweep_cores;                // empty = just the mesh size

  mapping::ClusterConfig cluster() const;
  sched::CoreModel core_model() const;
  nop::NetConfig net_config() const;
  u32 workload_level() const { return level == 0 ? ckks.max_level : level; }
  u32 keyswitch_aux() const { return aux_limbs == 0 ? ckks.aux_count : aux_limbs; }

  void validate() const;
  // Canonical flat-key echo; parsing it back reproduces this spec exactly.
  std::map<std::string, std::string> canonical_config() const;
};

RunSpec make_run_spec(const ConfigText& cfg);

// The documented key set, sorted; validate-mode output and the README table
// are generated from it.
const std::vector<std::string>& config_keys();

// Read the file (empty path = built-in defaults), apply environment
// overrides, and resolve. Parse errors carry the offending key and origin.
RunSpec load_run_spec(const std::string& path);

}  // namespace fhemesh::cli
