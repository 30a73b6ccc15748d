// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>

extern char** environ;

namespace fhemesh::cli {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(u8(s[a]))) ++a;
  while (b > a && std::isspace(u8(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  char prev = '.';
  for (const char c : k) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '.';
    if (!ok || (c == '.' && prev == '.')) return false;
    prev = c;
  }
  return true;
}

[[noreturn]] void bad_value(const ConfigEntry& e, const std::string& why) {
  throw InvalidConfig(e.key + " (" + e.origin + "): " + why + " (got '" + e.value + "')");
}

u64 parse_u64(const ConfigEntry& e) {
  u64 v = 0;
  const auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc{} || p != e.value.data() + e.value.size())
    bad_value(e, "expected an unsigned integer");
  return v;
}

u32 parse_u32(const ConfigEntry& e) {
  const u64 v = parse_u64(e);
  if (v > 0xffffffffu) bad_value(e, "value does not fit 32 bits");
  return u32(v);
}

double parse_double(const ConfigEntry& e) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (ec != std::errc{} || p != e.value.data() + e.value.size()) bad_value(e, "expected a number");
  return v;
}

bool parse_bool(const ConfigEntry& e) {
  if (e.value == "true" || e.value == "1") return true;
  if (e.value == "false" || e.value == "0") return false;
  bad_value(e, "expected true or false");
}

std::vector<std::string> parse_list(const ConfigEntry& e) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(e.value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

std::string format_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

// Pending mesh assertions: the mesh keys are derived from the mapping string
// and, when given explicitly, only checked against it.
struct MeshOverride {
  u32 mesh_x = 0;
  u32 mesh_y = 0;
};

using Setter = std::function<void(RunSpec&, MeshOverride&, const ConfigEntry&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto u32_field = [&](const std::string& key, u32 RunSpec::* f) {
      t[key] = [f](RunSpec& s, MeshOverride&, const ConfigEntry& e) { s.*f = parse_u32(e); };
    };
    auto u64_field = [&](const std::string& key, u64 RunSpec::* f) {
      t[key] = [f](RunSpec& s, MeshOverride&, const ConfigEntry& e) { s.*f = parse_u64(e); };
    };
    auto dbl_field = [&](const std::string& key, double RunSpec::* f) {
      t[key] = [f](RunSpec& s, MeshOverride&, const ConfigEntry& e) { s.*f = parse_double(e); };
    };

    t["package.mesh_x"] = [](RunSpec&, MeshOverride& m, const ConfigEntry& e) {
      m.mesh_x = parse_u32(e);
    };
    t["package.mesh_y"] = [](RunSpec&, MeshOverride& m, const ConfigEntry& e) {
      m.mesh_y = parse_u32(e);
    };
    u32_field("package.lanes", &RunSpec::lanes);
    u32_field("package.submodules", &RunSpec::submodules);
    dbl_field("package.bisection_gbps", &RunSpec::bisection_gbps);
    u32_field("package.hbm_ports", &RunSpec::hbm_ports);
    dbl_field("package.hbm_gbps_per_port", &RunSpec::hbm_gbps_per_port);
    dbl_field("package.clock_ghz", &RunSpec::clock_ghz);
    u64_field("package.rf_scratch_mib", &RunSpec::rf_scratch_mib);
    u64_field("package.rf_aux_mib", &RunSpec::rf_aux_mib);
    t["package.mapping"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      try {
        mapping::parse_mapping(e.value);
      } catch (const Error& err) {
        bad_value(e, err.what());
      }
      s.mapping = e.value;
    };
    t["package.duplication"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      try {
        s.duplication = parse_duplication(e.value);
      } catch (const InvalidConfig&) {
        bad_value(e, "expected auto, on, or off");
      }
    };
    t["package.default_profile"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.default_profile = parse_bool(e);
    };

    u32_field("net.flit_bits", &RunSpec::flit_bits);
    u32_field("net.vcs", &RunSpec::vcs);
    u32_field("net.vc_buffer_flits", &RunSpec::vc_buffer_flits);
    u32_field("net.hop_cycles", &RunSpec::hop_cycles);
    u64_field("net.hbm_latency", &RunSpec::hbm_latency);

    t["ckks.log_n"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.ckks.log_n = parse_u32(e);
    };
    t["ckks.max_level"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.ckks.max_level = parse_u32(e);
    };
    t["ckks.aux_count"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.ckks.aux_count = parse_u32(e);
    };
    t["ckks.word_bits"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.ckks.word_bits = parse_u32(e);
    };

    u32_field("keyswitch.digits", &RunSpec::digits);
    u32_field("keyswitch.aux", &RunSpec::aux_limbs);

    u32_field("workload.level", &RunSpec::level);
    u64_field("workload.seed", &RunSpec::seed);

    for (const auto& name : sched::energy_keys()) {
      t["energy." + name] = [name](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
        s.energy.joules[name] = parse_double(e);
      };
    }

    t["sweep.mappings"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.sweep_mappings = parse_list(e);
    };
    t["sweep.duplications"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.sweep_duplications = parse_list(e);
      for (const auto& d : s.sweep_duplications)
        if (d != "auto" && d != "on" && d != "off")
          bad_value(e, "expected a comma-separated subset of auto,on,off");
    };
    t["sweep.cores"] = [](RunSpec& s, MeshOverride&, const ConfigEntry& e) {
      s.sweep_cores.clear();
      for (const auto& item : parse_list(e)) {
        ConfigEntry sub{e.key, item, e.origin};
        const u32 c = parse_u32(sub);
        if (c == 0) bad_value(e, "core counts must be positive");
        s.sweep_cores.push_back(c);
      }
    };
    return t;
  }();
  return table;
}

}  // namespace

ConfigText parse_config_text(const std::string& text) {
  ConfigText cfg;
  std::map<std::string, std::string> seen;  // key -> origin
  std::istringstream in(text);
  std::string line;
  u32 lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    const std::string origin = "line " + std::to_string(lineno);
    if (eq == std::string::npos)
      throw InvalidConfig(origin + ": expected 'key = value', got '" + line + "'");
    ConfigEntry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), origin};
    if (!valid_key(e.key))
      throw InvalidConfig(origin + ": malformed key '" + e.key + "'");
    const auto [it, fresh] = seen.emplace(e.key, origin);
    if (!fresh)
      throw InvalidConfig(origin + ": duplicate key '" + e.key + "' (first set at " +
                          it->second + ")");
    cfg.entries.push_back(std::move(e));
  }
  return cfg;
}

void apply_env_overrides(ConfigText& cfg) {
  static const std::string prefix = "FHEMESH_";
  std::vector<ConfigEntry> overrides;
  for (char** env = environ; env != nullptr && *env != nullptr; ++env) {
    const std::string var(*env);
    if (var.compare(0, prefix.size(), prefix) != 0) continue;
    const size_t eq = var.find('=');
    if (eq == std::string::npos) continue;
    std::string name = var.substr(prefix.size(), eq - prefix.size());
    const std::string value = trim(var.substr(eq + 1));
    // '__' encodes '.'; single underscores belong to the key segment
    std::string key;
    for (size_t i = 0; i < name.size(); ++i) {
      if (name[i] == '_' && i + 1 < name.size() && name[i + 1] == '_') {
        key += '.';
        ++i;
      } else {
        key += char(std::tolower(u8(name[i])));
      }
    }
    const std::string origin = "env " + prefix + name;
    if (!valid_key(key)) throw InvalidConfig(origin + ": malformed key '" + key + "'");
    overrides.push_back({key, value, origin});
  }
  std::sort(overrides.begin(), overrides.end(),
            [](const ConfigEntry& a, const ConfigEntry& b) { return a.key < b.key; });
  for (auto& o : overrides) {
    const auto it = std::find_if(cfg.entries.begin(), cfg.entries.end(),
                                 [&](const ConfigEntry& e) { return e.key == o.key; });
    if (it != cfg.entries.end())
      *it = std::move(o);
    else
      cfg.entries.push_back(std::move(o));
  }
}

keyswitch::DuplicationMode parse_duplication(const std::string& text) {
  if (text == "auto") return keyswitch::DuplicationMode::Auto;
  if (text == "on") return keyswitch::DuplicationMode::On;
  if (text == "off") return keyswitch::DuplicationMode::Off;
  throw InvalidConfig("unknown duplication mode '" + text + "'");
}

const char* duplication_name(keyswitch::DuplicationMode mode) {
  switch (mode) {
    case keyswitch::DuplicationMode::Off: return "off";
    case keyswitch::DuplicationMode::On: return "on";
    case keyswitch::DuplicationMode::Auto: return "auto";
  }
  return "?";
}

RunSpec::RunSpec() {
  for (const auto& name : sched::energy_keys()) energy.joules[name] = 0.0;
}

mapping::ClusterConfig RunSpec::cluster() const {
  try {
    return mapping::parse_mapping(mapping);
  } catch (const Error& err) {
    throw InvalidConfig("package.mapping '" + mapping + "': " + err.what());
  }
}

sched::CoreModel RunSpec::core_model() const {
  sched::CoreModel m;
  m.lanes = lanes;
  m.submodules = submodules;
  m.rf_scratch_bytes = rf_scratch_mib << 20;
  m.rf_aux_bytes = rf_aux_mib << 20;
  return m;
}

nop::NetConfig RunSpec::net_config() const {
  nop::NetConfig n;
  const auto c = cluster();
  n.mesh_x = c.mesh_x;
  n.mesh_y = c.mesh_y;
  n.flit_bits = flit_bits;
  n.vcs = vcs;
  n.vc_buffer_flits = vc_buffer_flits;
  n.hop_cycles = hop_cycles;
  n.clock_ghz = clock_ghz;
  n.bisection_gbps = bisection_gbps;
  n.hbm_gbps_per_port = hbm_gbps_per_port;
  n.hbm_ports = hbm_ports;
  n.hbm_latency = hbm_latency;
  return n;
}

void RunSpec::validate() const {
  const auto c = cluster();  // throws on malformed notation
  const auto issues = mapping::validate_config(c);
  if (!issues.empty()) {
    std::string joined;
    for (const auto& s : issues) {
      if (!joined.empty()) joined += "; ";
      joined += s;
    }
    throw InvalidConfig("package.mapping '" + mapping + "': " + joined);
  }
  ckks.validate();
  const u32 split = c.limb_cluster_size() * c.coeff_cluster_size();
  if (ckks.n() % split != 0)
    throw InvalidConfig("package.mapping '" + mapping + "': ring of " +
                        std::to_string(ckks.n()) + " coefficients does not divide into " +
                        std::to_string(split) + " chunk slices");
  if (default_profile && c.cores() * lanes != 1024)
    throw InvalidConfig("package.default_profile: cores x lanes must equal 1024 (got " +
                        std::to_string(c.cores()) + " x " + std::to_string(lanes) +
                        "); set package.default_profile = false to lift this");
  if (digits == 0) throw InvalidConfig("keyswitch.digits must be >= 1");
  if (keyswitch_aux() > ckks.aux_count)
    throw InvalidConfig("keyswitch.aux exceeds ckks.aux_count");
  if (level > ckks.max_level) throw InvalidConfig("workload.level exceeds ckks.max_level");
  for (const auto& m : sweep_mappings) mapping::parse_mapping(m);
  core_model().validate();
  net_config().validate();
}

std::map<std::string, std::string> RunSpec::canonical_config() const {
  const auto c = cluster();
  std::map<std::string, std::string> out;
  out["package.mesh_x"] = std::to_string(c.mesh_x);
  out["package.mesh_y"] = std::to_string(c.mesh_y);
  out["package.lanes"] = std::to_string(lanes);
  out["package.submodules"] = std::to_string(submodules);
  out["package.bisection_gbps"] = format_double(bisection_gbps);
  out["package.hbm_ports"] = std::to_string(hbm_ports);
  out["package.hbm_gbps_per_port"] = format_double(hbm_gbps_per_port);
  out["package.clock_ghz"] = format_double(clock_ghz);
  out["package.rf_scratch_mib"] = std::to_string(rf_scratch_mib);
  out["package.rf_aux_mib"] = std::to_string(rf_aux_mib);
  out["package.mapping"] = mapping;
  out["package.duplication"] = duplication_name(duplication);
  out["package.default_profile"] = default_profile ? "true" : "false";
  out["net.flit_bits"] = std::to_string(flit_bits);
  out["net.vcs"] = std::to_string(vcs);
  out["net.vc_buffer_flits"] = std::to_string(vc_buffer_flits);
  out["net.hop_cycles"] = std::to_string(hop_cycles);
  out["net.hbm_latency"] = std::to_string(hbm_latency);
  out["ckks.log_n"] = std::to_string(ckks.log_n);
  out["ckks.max_level"] = std::to_string(ckks.max_level);
  out["ckks.aux_count"] = std::to_string(ckks.aux_count);
  out["ckks.word_bits"] = std::to_string(ckks.word_bits);
  out["keyswitch.digits"] = std::to_string(digits);
  out["keyswitch.aux"] = std::to_string(aux_limbs);
  out["workload.level"] = std::to_string(level);
  out["workload.seed"] = std::to_string(seed);
  for (const auto& [k, v] : energy.joules) out["energy." + k] = format_double(v);
  out["sweep.mappings"] = format_list(sweep_mappings);
  std::vector<std::string> dups(sweep_duplications);
  out["sweep.duplications"] = format_list(dups);
  std::vector<std::string> cores;
  for (const u32 n : sweep_cores) cores.push_back(std::to_string(n));
  out["sweep.cores"] = format_list(cores);
  return out;
}

RunSpec make_run_spec(const ConfigText& cfg) {
  RunSpec spec;
  MeshOverride mesh;
  const auto& table = setters();
  for (const auto& e : cfg.entries) {
    const auto it = table.find(e.key);
    if (it == table.end())
      throw UnknownKey("unknown key '" + e.key + "' (" + e.origin + ")");
    it->second(spec, mesh, e);
  }
  const auto c = spec.cluster();
  if (mesh.mesh_x != 0 && mesh.mesh_x != c.mesh_x)
    throw InvalidConfig("package.mesh_x = " + std::to_string(mesh.mesh_x) +
                        " disagrees with package.mapping '" + spec.mapping + "'");
  if (mesh.mesh_y != 0 && mesh.mesh_y != c.mesh_y)
    throw InvalidConfig("package.mesh_y = " + std::to_string(mesh.mesh_y) +
                        " disagrees with package.mapping '" + spec.mapping + "'");
  return spec;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [key, fn] : setters()) k.push_back(key);
    return k;
  }();
  return keys;
}

RunSpec load_run_spec(const std::string& path) {
  ConfigText cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      cfg = parse_config_text(buf.str());
    } catch (const Error& err) {
      throw InvalidConfig(path + ": " + err.what());
    }
  }
  apply_env_overrides(cfg);
  auto spec = make_run_spec(cfg);
  spec.validate();
  return spec;
}

}  // namespace fhemesh::cli
