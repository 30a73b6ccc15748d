// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fhemesh/common.hpp"

namespace fhemesh::rns {

// Ring and modulus-chain dimensions. The default profile targets a degree
// 2^16 ring with a 48-limb ciphertext modulus and a 12-limb auxiliary base,
// all primes held in 32-bit words.
struct CkksParams {
  u32 log_n = 16;      // ring degree N = 2^log_n
  u32 max_level = 48;  // L: ciphertext-modulus limb budget
  u32 aux_count = 12;  // K: auxiliary-base limb count
  u32 word_bits = 32;  // prime width budget, <= 32

  u32 n() const { return u32(1) << log_n; }

  void validate() const {
    if (log_n < 2 || log_n > 17) throw InvalidConfig("log_n out of range [2,17]");
    if (word_bits < 4 || word_bits > 32) throw InvalidConfig("word_bits out of range [4,32]");
    if (max_level == 0) throw InvalidConfig("max_level must be >= 1");
  }
};

}  // namespace fhemesh::rns
