// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cassert>

#include "fhemesh/common.hpp"

namespace fhemesh::rns {

// Word-level Montgomery arithmetic modulo an odd q < 2^32, R = 2^32.
// Twiddle factors and table constants are kept pre-scaled by R so that one
// reduction per multiply returns a standard-form product; polynomial data
// never leaves standard form at API boundaries.
struct MontCtx {
  u32 q = 0;
  u32 qinv_neg = 0;  // -q^{-1} mod 2^32
  u32 r2 = 0;        // R^2 mod q
  u32 one_m = 0;     // R mod q (1 in Montgomery form)

  MontCtx() = default;

  explicit MontCtx(u32 modulus) : q(modulus) {
    assert(q % 2 == 1 && q > 2);
    // Newton iteration for q^{-1} mod 2^32.
    u32 inv = q;
    for (int i = 0; i < 4; ++i) inv *= 2u - q * inv;
    qinv_neg = ~inv + 1u;
    r2 = u32((u128(1) << 64) % q);
    one_m = u32((u64(1) << 32) % q);
  }

  // REDC: T in [0, q * 2^32)  ->  T * R^{-1} mod q.
  u32 reduce(u64 t) const {
    u32 m = u32(t) * qinv_neg;
    u64 s = u64((u128(t) + u128(m) * q) >> 32);
    return s >= q ? u32(s - q) : u32(s);
  }

  // a * bm * R^{-1} mod q; exact product of standard-form a when bm is a
  // Montgomery-form constant.
  u32 mul(u32 a, u32 bm) const { return reduce(u64(a) * bm); }

  u32 to_mont(u32 a) const { return reduce(u64(a) * r2); }
  u32 from_mont(u32 am) const { return reduce(am); }

  // Standard-form modular product a*b mod q.
  u32 mul_std(u32 a, u32 b) const { return mul(a, to_mont(b)); }

  u32 add(u32 a, u32 b) const {
    u64 s = u64(a) + b;
    return s >= q ? u32(s - q) : u32(s);
  }

  u32 sub(u32 a, u32 b) const { return a >= b ? a - b : u32(u64(a) + q - b); }

  u32 neg(u32 a) const { return a == 0 ? 0 : q - a; }

  u32 pow_std(u32 base, u64 e) const {
    u32 acc = 1;
    u32 b = base % q;
    while (e) {
      if (e & 1) acc = mul_std(acc, b);
      b = mul_std(b, b);
      e >>= 1;
    }
    return acc;
  }

  // q is prime in every basis this library builds, so Fermat inversion holds.
  u32 inv_std(u32 a) const {
    assert(a % q != 0);
    return pow_std(a, q - 2);
  }
};

}  // namespace fhemesh::rns
