// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fhemesh/common.hpp"
#include "fhemesh/rns/poly.hpp"

namespace fhemesh::keyswitch {

// Precomputed constants for converting residues from a source prime set to a
// disjoint target set: per-source inverses of the complementary products and
// the per-target reductions of those products, all in Montgomery form so one
// modular multiply applies each.
struct BConvTable {
  rns::BasisPtr basis;
  std::vector<u32> src_idx;
  std::vector<u32> dst_idx;
  std::vector<u32> inv_m;                // (Q/q_i)^{-1} mod q_i
  std::vector<std::vector<u32>> hat_m;   // [j][i] = (Q/q_i) mod p_j

  static BConvTable build(const rns::BasisPtr& basis, const std::vector<u32>& src,
                          const std::vector<u32>& dst);
};

// Fast base conversion: out_j = sum_i [x_i * (Q/q_i)^{-1} mod q_i] * (Q/q_i)
// mod p_j. Input and output are coefficient-domain residues; the input's
// active set must equal the table's source set.
rns::RnsPolynomial bconv(const rns::RnsPolynomial& x, const BConvTable& table);

// Converts only the coefficient window [first, first + count) into `out`
// (already sized over the table's target set). Windows are independent, so
// per-core slices of a distributed conversion compose to the whole.
void bconv_range(const rns::RnsPolynomial& x, const BConvTable& table, u32 first, u32 count,
                 rns::RnsPolynomial& out);

}  // namespace fhemesh::keyswitch
