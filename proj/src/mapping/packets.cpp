// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/mapping/packets.hpp"

namespace fhemesh::mapping {

u64 total_elements(const std::vector<LogicalPacket>& pkts) {
  u64 sum = 0;
  for (const auto& p : pkts) sum += p.elements;
  return sum;
}

std::vector<LogicalPacket> ntt_exchange_packets(const Placement& pl,
                                                const std::vector<u32>& limbs) {
  std::vector<LogicalPacket> out;
  const u32 c = pl.cfg.limb_cluster_size();
  if (c <= 1) return out;
  const u64 elems = u64(pl.n) / (u64(c) * c);
  out.reserve(limbs.size() * c * (c - 1));
  for (const u32 limb : limbs) {
    const u32 block = pl.block_of_limb(limb);
    for (u32 so = 0; so < c; ++so)
      for (u32 od = 0; od < c; ++od) {
        if (so == od) continue;
        out.push_back({pl.cfg.core_at(block, so), pl.cfg.core_at(block, od), elems,
                       PacketPhase::NttExchange, limb});
      }
  }
  return out;
}

std::vector<LogicalPacket> bconv_packets(const Placement& pl,
                                         const std::vector<u32>& input_limbs,
                                         u32 output_limb_count, BConvStrategy strategy) {
  std::vector<u32> outputs(output_limb_count);
  for (u32 j = 0; j < output_limb_count; ++j) outputs[j] = j;
  return bconv_packets(pl, input_limbs, outputs, strategy);
}

std::vector<LogicalPacket> bconv_packets(const Placement& pl,
                                         const std::vector<u32>& input_limbs,
                                         const std::vector<u32>& output_limbs,
                                         BConvStrategy strategy) {
  std::vector<LogicalPacket> out;
  const u32 blocks = pl.cfg.limb_cluster_count();
  const u32 offsets = pl.cfg.coeff_cluster_count();
  if (blocks <= 1) return out;  // singleton coefficient clusters: all data local
  const u64 chunk = pl.chunk_elems();
  const u64 slice = pl.slice_elems();

  if (strategy == BConvStrategy::Duplicate) {
    for (const u32 limb : input_limbs) {
      const u32 home = pl.block_of_limb(limb);
      for (u32 o = 0; o < offsets; ++o)
        for (u32 b = 0; b < blocks; ++b) {
          if (b == home) continue;
          out.push_back({pl.cfg.core_at(home, o), pl.cfg.core_at(b, o), chunk,
                         PacketPhase::BconvBroadcast, limb});
        }
    }
    return out;  // every member computes its own output limbs in place
  }

  for (const u32 limb : input_limbs) {
    const u32 home = pl.block_of_limb(limb);
    for (u32 o = 0; o < offsets; ++o)
      for (u32 b = 0; b < blocks; ++b) {
        if (b == home) continue;
        out.push_back({pl.cfg.core_at(home, o), pl.cfg.core_at(b, o), slice,
                       PacketPhase::BconvGather, limb});
      }
  }
  for (const u32 j : output_limbs) {
    const u32 home = j % blocks;  // fresh limbs are owned like any placed limb
    for (u32 o = 0; o < offsets; ++o)
      for (u32 b = 0; b < blocks; ++b) {
        if (b == home) continue;
        out.push_back({pl.cfg.core_at(b, o), pl.cfg.core_at(home, o), slice,
                       PacketPhase::BconvScatter, j});
      }
  }
  return out;
}

}  // namespace fhemesh::mapping
