// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/rns/crt.hpp"

namespace fhemesh::rns {

BigInt active_modulus(const RnsPolynomial& x) {
  BigInt m = 1;
  for (u32 l = 0; l < x.limb_count(); ++l) m *= x.prime(l).q;
  return m;
}

BigInt crt_reconstruct(const RnsPolynomial& x, u32 coeff) {
  const BigInt m = active_modulus(x);
  BigInt acc = 0;
  for (u32 l = 0; l < x.limb_count(); ++l) {
    const u32 q = x.prime(l).q;
    const BigInt mi = m / q;
    const u32 mi_mod_q = u32(mi % q);
    const u32 mi_inv = x.prime(l).mont.inv_std(mi_mod_q);
    acc += mi * mi_inv % m * x.at(l, coeff) % m;
  }
  return acc % m;
}

void crt_decompose(RnsPolynomial& x, u32 coeff, const BigInt& value) {
  for (u32 l = 0; l < x.limb_count(); ++l) {
    x.at(l, coeff) = u32(value % x.prime(l).q);
  }
}

}  // namespace fhemesh::rns
