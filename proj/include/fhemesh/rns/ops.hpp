// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fhemesh/rns/poly.hpp"

namespace fhemesh::rns {

// Element-wise limb arithmetic. Operands must share the basis, the active
// prime set, and the domain; outputs inherit all three.
RnsPolynomial ew_add(const RnsPolynomial& a, const RnsPolynomial& b);
RnsPolynomial ew_sub(const RnsPolynomial& a, const RnsPolynomial& b);
RnsPolynomial ew_mult(const RnsPolynomial& a, const RnsPolynomial& b);
// acc += a * b, fused per element.
void ew_mult_acc(RnsPolynomial& acc, const RnsPolynomial& a, const RnsPolynomial& b);
// Per-limb scalar multiply; scalars[i] applies to limb i (standard form).
RnsPolynomial ew_const_mult(const RnsPolynomial& a, const std::vector<u32>& scalars);

// Galois map X -> X^{5^r} on a coefficient-domain polynomial: coefficient i
// lands at i*5^r mod N, negated when floor(i*5^r / N) is odd.
RnsPolynomial automorphism(const RnsPolynomial& x, u32 r);

// Order of the automorphism group generator (smallest t > 0 with 5^t = 1
// modulo 2N); automorphism(x, t) is the identity.
u64 automorphism_order(u32 n);

}  // namespace fhemesh::rns
