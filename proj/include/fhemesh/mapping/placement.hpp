// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fhemesh/common.hpp"
#include "fhemesh/mapping/cluster.hpp"

namespace fhemesh::mapping {

// Ownership map for one polynomial: limbs round-robin over blocks (limb
// clusters), each resident limb split into equal contiguous coefficient
// chunks over the block's cores in offset order.
struct Placement {
  ClusterConfig cfg;
  u32 n = 0;      // coefficients per limb
  u32 limbs = 0;  // placed limb count

  u32 chunk_elems() const { return n / cfg.limb_cluster_size(); }
  u32 slice_elems() const { return chunk_elems() / cfg.coeff_cluster_size(); }

  u32 block_of_limb(u32 limb) const { return limb % cfg.limb_cluster_count(); }
  u32 owner_core(u32 limb, u32 offset) const {
    return cfg.core_at(block_of_limb(limb), offset);
  }
  // Limbs resident on a block, ascending.
  std::vector<u32> limbs_of_block(u32 block) const;
  // Resident limb count per block; differs by at most one across blocks and
  // the lower-indexed blocks absorb any remainder.
  std::vector<u32> limbs_per_block() const;
};

Placement place_polynomial(u32 n, u32 limbs, const ClusterConfig& cfg);

}  // namespace fhemesh::mapping
