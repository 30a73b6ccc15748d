// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/mapping/cluster.hpp"

#include <cstdlib>
#include <regex>

namespace fhemesh::mapping {

ClusterConfig parse_mapping(const std::string& text) {
  static const std::regex grammar(R"(^(\d+)x(\d+)-BK-(\d+)x(\d+)$)");
  std::smatch m;
  if (!std::regex_match(text, m, grammar))
    throw InvalidConfig("bad mapping notation '" + text + "' (want DXxDY-BK-BHxBW)");
  ClusterConfig cfg;
  cfg.mesh_x = u32(std::stoul(m[1]));
  cfg.mesh_y = u32(std::stoul(m[2]));
  cfg.block_h = u32(std::stoul(m[3]));
  cfg.block_w = u32(std::stoul(m[4]));
  cfg.validate();
  return cfg;
}

std::string mapping_to_string(const ClusterConfig& cfg) {
  return std::to_string(cfg.mesh_x) + "x" + std::to_string(cfg.mesh_y) + "-BK-" +
         std::to_string(cfg.block_h) + "x" + std::to_string(cfg.block_w);
}

std::vector<std::string> validate_config(const ClusterConfig& cfg, u32 max_limb_clusters) {
  std::vector<std::string> problems;
  if (cfg.mesh_x == 0 || cfg.mesh_y == 0 || cfg.block_h == 0 || cfg.block_w == 0) {
    problems.push_back("mesh and block dimensions must be positive");
    return problems;
  }
  if (cfg.mesh_x % cfg.block_h != 0)
    problems.push_back("block height " + std::to_string(cfg.block_h) +
                       " does not divide mesh height " + std::to_string(cfg.mesh_x));
  if (cfg.mesh_y % cfg.block_w != 0)
    problems.push_back("block width " + std::to_string(cfg.block_w) +
                       " does not divide mesh width " + std::to_string(cfg.mesh_y));
  if (problems.empty() && cfg.limb_cluster_count() > max_limb_clusters)
    problems.push_back("limb cluster count " + std::to_string(cfg.limb_cluster_count()) +
                       " exceeds the build cap of " + std::to_string(max_limb_clusters));
  return problems;
}

u32 manhattan_hops(const ClusterConfig& cfg, u32 src_core, u32 dst_core) {
  const auto dist = [](u32 a, u32 b) { return a > b ? a - b : b - a; };
  return dist(cfg.core_x(src_core), cfg.core_x(dst_core)) +
         dist(cfg.core_y(src_core), cfg.core_y(dst_core));
}

Rational broadcast_overhead(const ClusterConfig& cfg) {
  cfg.validate();
  const u32 c = cfg.coeff_cluster_size();
  if (c <= 1) return Rational(1);
  // Enumerate one representative coefficient cluster (intra-block offset 0);
  // XY routes are fixed, so every cluster yields the same traversal ratio.
  i64 broadcast_traversals = 0;  // full chunk (unit weight c) per peer
  i64 even_traversals = 0;       // 1/c slice (unit weight 1) per peer
  const u32 owner = cfg.core_at(0, 0);
  for (u32 block = 1; block < cfg.limb_cluster_count(); ++block) {
    const i64 hops = manhattan_hops(cfg, owner, cfg.core_at(block, 0));
    broadcast_traversals += hops * i64(c);
    even_traversals += hops;
  }
  if (even_traversals == 0) return Rational(1);  // co-located peers
  return Rational(broadcast_traversals, even_traversals);
}

}  // namespace fhemesh::mapping
