// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fhemesh/common.hpp"
#include "fhemesh/mapping/placement.hpp"

namespace fhemesh::mapping {

// How base-conversion inputs reach every member of a coefficient cluster:
// Redistribute slices each chunk evenly (and gathers outputs back the same
// way); Duplicate broadcasts whole input chunks so each member computes its
// own output limbs locally and no output pass is needed.
enum class BConvStrategy { Redistribute, Duplicate };

enum class PacketPhase : u32 {
  NttExchange,     // mid-transform shuffle inside a limb cluster
  BconvGather,     // input slices toward coefficient-cluster peers
  BconvScatter,    // computed output slices back to the owning cores
  BconvBroadcast,  // whole input chunks to every coefficient-cluster peer
  Permute,         // automorphism slot moves inside a limb cluster
};

// One logical core-to-core transfer before flit segmentation.
struct LogicalPacket {
  u32 src_core = 0;
  u32 dst_core = 0;
  u64 elements = 0;
  PacketPhase phase = PacketPhase::NttExchange;
  u32 limb = 0;  // originating limb (gather/broadcast) or produced limb
};

u64 total_elements(const std::vector<LogicalPacket>& pkts);

// Mid-transform exchange for each listed limb: all ordered core pairs inside
// the owning block swap n / c^2 elements (c = limb-cluster size); a
// single-core cluster exchanges nothing.
std::vector<LogicalPacket> ntt_exchange_packets(const Placement& pl,
                                                const std::vector<u32>& limbs);

// Base-conversion traffic for one conversion whose inputs are the placed
// limbs `input_limbs` and which produces the fresh limbs `output_limbs`
// (each owned by block id % block-count, like any placed limb). Emitted per
// coefficient cluster, i.e. per intra-block offset. Singleton coefficient
// clusters move nothing.
std::vector<LogicalPacket> bconv_packets(const Placement& pl,
                                         const std::vector<u32>& input_limbs,
                                         const std::vector<u32>& output_limbs,
                                         BConvStrategy strategy);

// Convenience overload: outputs are limbs 0 .. output_limb_count-1.
std::vector<LogicalPacket> bconv_packets(const Placement& pl,
                                         const std::vector<u32>& input_limbs,
                                         u32 output_limb_count,
                                         BConvStrategy strategy);

}  // namespace fhemesh::mapping
