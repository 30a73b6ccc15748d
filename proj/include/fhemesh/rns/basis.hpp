// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "fhemesh/rns/montgomery.hpp"
#include "fhemesh/rns/params.hpp"

namespace fhemesh::rns {

bool is_prime_u32(u32 n);

// One RNS prime together with its negacyclic-transform material for degree N.
// psi is a primitive 2N-th root of unity; twiddle tables are bit-reversed and
// pre-scaled into Montgomery form so transform butterflies reduce once.
struct PrimeInfo {
  u32 q = 0;
  MontCtx mont;
  u32 psi = 0;       // primitive 2N-th root, standard form
  u32 psi_inv = 0;   // psi^{-1}
  u32 n_inv = 0;     // N^{-1}, standard form
  u32 n_inv_m = 0;   // N^{-1}, Montgomery form
  std::vector<u32> psi_brv;      // psi^{bitrev(i)} * R mod q
  std::vector<u32> psi_inv_brv;  // psi^{-bitrev(i)} * R mod q
};

// Shared, immutable prime chain: first L entries form the ciphertext base,
// the remaining K the auxiliary base.
struct PrimeBasis {
  CkksParams params;
  u64 seed = 0;
  std::vector<PrimeInfo> primes;  // size L + K

  u32 n() const { return params.n(); }
  u32 level_count() const { return params.max_level; }
  u32 aux_count() const { return params.aux_count; }
  const PrimeInfo& q_prime(u32 i) const { return primes.at(i); }
  const PrimeInfo& p_prime(u32 j) const { return primes.at(params.max_level + j); }
};

using BasisPtr = std::shared_ptr<const PrimeBasis>;

// Scans candidates c = 1 (mod 2N) downward from 2^word_bits - 1 and keeps the
// first L + K primes, so a fixed parameter set always yields the same chain.
// Throws InsufficientPrimes when the word width cannot supply enough primes.
BasisPtr generate_basis(const CkksParams& params, u64 seed);

}  // namespace fhemesh::rns
