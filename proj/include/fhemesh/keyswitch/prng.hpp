// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "fhemesh/common.hpp"
#include "fhemesh/rns/poly.hpp"

namespace fhemesh::keyswitch {

// ChaCha20 keystream block (20 rounds, 64-bit counter + 64-bit nonce
// layout); `out` receives the 16 little-endian keystream words.
void chacha20_block(const std::array<u32, 8>& key, u64 counter, u64 nonce,
                    std::array<u32, 16>& out);

// Expands a 64-bit seed into a ChaCha20 key (splitmix64 chain).
std::array<u32, 8> expand_seed(u64 seed);

// Counter-mode keystream over one (key, nonce) stream.
class ChaChaStream {
 public:
  ChaChaStream(const std::array<u32, 8>& key, u64 nonce) : key_(key), nonce_(nonce) {}

  u32 next_u32() {
    if (pos_ == block_.size()) {
      chacha20_block(key_, counter_++, nonce_, block_);
      pos_ = 0;
    }
    return block_[pos_++];
  }

  // Uniform draw in [0, q) by rejecting the biased tail of the 32-bit range.
  u32 next_below(u32 q) {
    const u32 limit = u32((u64(1) << 32) / q * q);
    for (;;) {
      const u32 r = next_u32();
      if (r < limit) return r % q;
    }
  }

 private:
  std::array<u32, 8> key_;
  u64 nonce_;
  u64 counter_ = 0;
  std::array<u32, 16> block_{};
  size_t pos_ = block_.size();
};

// Deterministically expands (seed, stream) into a polynomial with uniform
// residues; every limb draws from its own nonce so limbs can be generated
// independently and in any order.
rns::RnsPolynomial expand_uniform(const rns::BasisPtr& basis, const std::vector<u32>& prime_idx,
                                  rns::Domain domain, u64 seed, u32 stream);

}  // namespace fhemesh::keyswitch
