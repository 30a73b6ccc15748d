// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/mapping/placement.hpp"

namespace fhemesh::mapping {

std::vector<u32> Placement::limbs_of_block(u32 block) const {
  std::vector<u32> out;
  for (u32 l = block; l < limbs; l += cfg.limb_cluster_count()) out.push_back(l);
  return out;
}

std::vector<u32> Placement::limbs_per_block() const {
  std::vector<u32> out(cfg.limb_cluster_count());
  for (u32 b = 0; b < out.size(); ++b) out[b] = u32(limbs_of_block(b).size());
  return out;
}

Placement place_polynomial(u32 n, u32 limbs, const ClusterConfig& cfg) {
  cfg.validate();
  if (limbs == 0) throw InvalidConfig("cannot place a polynomial with no limbs");
  const u32 span = cfg.limb_cluster_size() * cfg.coeff_cluster_size();
  if (n % span != 0)
    throw InvalidConfig("coefficient count " + std::to_string(n) +
                        " is not divisible into chunk slices over " + mapping_to_string(cfg));
  return Placement{cfg, n, limbs};
}

}  // namespace fhemesh::mapping
