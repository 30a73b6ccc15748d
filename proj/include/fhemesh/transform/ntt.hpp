// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>

#include "fhemesh/rns/poly.hpp"
#include "fhemesh/transform/plan.hpp"
#include "fhemesh/transform/trace.hpp"

namespace fhemesh::transform {

using rns::Domain;
using rns::MontCtx;
using rns::PrimeInfo;
using rns::RnsPolynomial;

// Decimation butterflies; w is a standard-form twiddle.
// Forward:  (a, b) -> (a + b*w, a - b*w)
// Inverse:  (a, b) -> (a + b, (a - b)*w)
std::pair<u32, u32> butterfly_ntt(u32 a, u32 b, u32 w, const MontCtx& m);
std::pair<u32, u32> butterfly_intt(u32 a, u32 b, u32 w, const MontCtx& m);

// In-place negacyclic transforms over one limb; natural-order input and
// output. The inverse folds N^{-1} into its final stage.
void ntt_reference(std::span<u32> row, const PrimeInfo& prime);
void intt_reference(std::span<u32> row, const PrimeInfo& prime);

// Per-prime material for the sqrt(N) x sqrt(N) decomposition: column-stage
// tables for psi^sqrt(N) and the merged inter-stage twist, so both stages run
// the same small negacyclic kernel and no standalone scaling pass exists.
struct TwiddleTable {
  u32 n = 0;
  u32 m2 = 0;  // sqrt(N)
  std::vector<u32> col_psi_brv;      // small-kernel forward twiddles, Montgomery
  std::vector<u32> col_psi_inv_brv;  // small-kernel inverse twiddles, Montgomery
  u32 m2_inv_m = 0;                  // sqrt(N)^{-1}, Montgomery
  std::vector<u32> twist;            // [r*m2+k2] = psi^{r(2*k2+1-m2)}, Montgomery
  std::vector<u32> twist_inv;
};

TwiddleTable build_twiddle_table(const PrimeInfo& prime, u32 n);

// Column transforms, twist, and row transforms over the sqrt(N) x sqrt(N)
// view; bit-exact with the reference path.
void ntt_four_step(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw);
void intt_four_step(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw);

// Same arithmetic as the four-step path, with column/row blocks owned by
// submodules of one core; returns the mid-transform shuffle trace (self
// records included: the full limb passes through the exchange buffers).
ExchangeTrace ntt_composable(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                             const NttPlan& plan);
ExchangeTrace intt_composable(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                              const NttPlan& plan);

// Cooperative transform across plan.cores cores; exactly one inter-core
// exchange phase per limb (self traffic stays on-core and is not recorded).
ExchangeTrace ntt_multicore(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                            const NttPlan& plan);
ExchangeTrace intt_multicore(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                             const NttPlan& plan);

// Whole-polynomial helpers over the reference path; flip the domain tag.
void ntt_poly(RnsPolynomial& x);
void intt_poly(RnsPolynomial& x);

}  // namespace fhemesh::transform
