// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "fhemesh/rns/poly.hpp"

namespace fhemesh::rns {

using BigInt = boost::multiprecision::cpp_int;

// Product of the active primes of x.
BigInt active_modulus(const RnsPolynomial& x);

// Unique value v in [0, prod q_i) with v = x_{limb i, coeff} (mod q_i) for all
// active limbs. Big-integer reference path used by conversion oracles.
BigInt crt_reconstruct(const RnsPolynomial& x, u32 coeff);

// Writes value mod q_i into each active limb of x at position coeff.
void crt_decompose(RnsPolynomial& x, u32 coeff, const BigInt& value);

}  // namespace fhemesh::rns
