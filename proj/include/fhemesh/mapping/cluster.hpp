// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "fhemesh/common.hpp"

namespace fhemesh::mapping {

// Block-clustered data mapping over a d_x x d_y core mesh. Cores are tiled
// into b_h x b_w blocks; a block is one limb cluster (its cores split each
// resident limb into equal coefficient chunks), and the cores at the same
// intra-block offset across all blocks form one coefficient cluster (they
// cover the same coefficient window and partition the limbs).
//
// The two scattering extremes are corner cases: b_h = b_w = 1 places whole
// limbs on single cores, and b_h = d_x, b_w = d_y slices every limb across
// the full mesh.
struct ClusterConfig {
  u32 mesh_x = 1;   // rows
  u32 mesh_y = 1;   // columns
  u32 block_h = 1;  // block rows, divides mesh_x
  u32 block_w = 1;  // block columns, divides mesh_y

  u32 cores() const { return mesh_x * mesh_y; }
  u32 limb_cluster_size() const { return block_h * block_w; }
  u32 limb_cluster_count() const { return (mesh_x / block_h) * (mesh_y / block_w); }
  u32 coeff_cluster_size() const { return limb_cluster_count(); }
  u32 coeff_cluster_count() const { return limb_cluster_size(); }

  u32 core_id(u32 x, u32 y) const { return x * mesh_y + y; }
  u32 core_x(u32 core) const { return core / mesh_y; }
  u32 core_y(u32 core) const { return core % mesh_y; }

  u32 block_of_core(u32 core) const {
    return (core_x(core) / block_h) * (mesh_y / block_w) + core_y(core) / block_w;
  }
  u32 offset_of_core(u32 core) const {
    return (core_x(core) % block_h) * block_w + core_y(core) % block_w;
  }
  u32 core_at(u32 block, u32 offset) const {
    const u32 bx = block / (mesh_y / block_w);
    const u32 by = block % (mesh_y / block_w);
    const u32 ox = offset / block_w;
    const u32 oy = offset % block_w;
    return core_id(bx * block_h + ox, by * block_w + oy);
  }

  void validate() const {
    if (mesh_x == 0 || mesh_y == 0 || block_h == 0 || block_w == 0)
      throw InvalidBlock("mesh and block dimensions must be positive");
    if (mesh_x % block_h != 0 || mesh_y % block_w != 0)
      throw InvalidBlock("block dimensions must divide the mesh dimensions");
  }
};

// Notation "DXxDY-BK-BHxBW", e.g. "4x4-BK-2x2".
ClusterConfig parse_mapping(const std::string& text);
std::string mapping_to_string(const ClusterConfig& cfg);

// Package-level feasibility diagnostics (empty result means valid): block
// divisibility and the limb-cluster-count build cap.
std::vector<std::string> validate_config(const ClusterConfig& cfg, u32 max_limb_clusters = 8);

// Link traversals of one XY-routed hop sequence between two cores.
u32 manhattan_hops(const ClusterConfig& cfg, u32 src_core, u32 dst_core);

// Ratio of broadcast link traversals to even-unicast link traversals when one
// coefficient-cluster member must hand its limb chunk to all peers: the
// broadcast pattern unicasts the full chunk along each XY route where the
// even pattern sends a 1/|cluster| slice, so the enumerated ratio equals the
// cluster size (and is 1 for singleton clusters).
Rational broadcast_overhead(const ClusterConfig& cfg);

}  // namespace fhemesh::mapping
