// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "fhemesh/rns/poly.hpp"

namespace fhemesh::transform {

// Galois element 5^steps mod 2N for a slot rotation; steps may be negative
// (reduced by the generator's order N/2). steps = 0 gives the identity.
u32 galois_element(i64 steps, u32 n);

// Element sending every slot to its conjugate partner.
u32 galois_conjugate(u32 n);

// X -> X^g substitution on one coefficient-domain limb. g must be odd and in
// [1, 2N); in and out must be distinct buffers of length N. Wrapped monomials
// pick up the negacyclic sign; residues may be in either scaling since
// negation commutes with the Montgomery map.
void automorphism_coeff(std::span<const u32> in, std::span<u32> out, u32 g,
                        const rns::PrimeInfo& prime);

// Source slot read by output slot k under the same substitution applied to an
// evaluation-domain limb: the point psi^{2k+1} maps to psi^{g(2k+1)}.
u32 automorphism_eval_source(u32 k, u32 g, u32 n);

// Slot gather out[k] = in[automorphism_eval_source(k)]; no arithmetic at all.
void automorphism_eval(std::span<const u32> in, std::span<u32> out, u32 g);

// Whole-polynomial form dispatching on the stored domain tag.
rns::RnsPolynomial automorphism(const rns::RnsPolynomial& x, u32 g);

}  // namespace fhemesh::transform
