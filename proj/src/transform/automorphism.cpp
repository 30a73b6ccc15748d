// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/transform/automorphism.hpp"

namespace fhemesh::transform {

namespace {

void check_element(u32 g, u32 n) {
  if (n < 2 || !is_pow2(n)) throw InvalidConfig("degree must be a power of two >= 2");
  if (g % 2 == 0 || g >= 2 * n) throw InvalidConfig("galois element must be odd and < 2N");
}

}  // namespace

u32 galois_element(i64 steps, u32 n) {
  if (n < 2 || !is_pow2(n)) throw InvalidConfig("degree must be a power of two >= 2");
  const i64 order = i64(n) / 2;  // multiplicative order of 5 mod 2N
  i64 e = order > 0 ? ((steps % order) + order) % order : 0;
  const u64 mod = 2 * u64(n);
  u64 g = 1;
  while (e-- > 0) g = g * 5 % mod;
  return u32(g);
}

u32 galois_conjugate(u32 n) {
  if (n < 2 || !is_pow2(n)) throw InvalidConfig("degree must be a power of two >= 2");
  return 2 * n - 1;
}

void automorphism_coeff(std::span<const u32> in, std::span<u32> out, u32 g,
                        const rns::PrimeInfo& prime) {
  const u32 n = u32(in.size());
  check_element(g, n);
  if (out.size() != in.size()) throw InvalidConfig("automorphism buffers must match");
  const u32 q = prime.q;
  for (u32 i = 0; i < n; ++i) {
    const u64 j = u64(i) * g % (2 * u64(n));
    if (j < n)
      out[j] = in[i];
    else
      out[j - n] = in[i] == 0 ? 0 : q - in[i];
  }
}

u32 automorphism_eval_source(u32 k, u32 g, u32 n) {
  check_element(g, n);
  // g(2k+1) is odd, so the reduced exponent is again of the form 2k'+1.
  const u64 j = u64(g) * (2 * u64(k) + 1) % (2 * u64(n));
  return u32((j - 1) / 2);
}

void automorphism_eval(std::span<const u32> in, std::span<u32> out, u32 g) {
  const u32 n = u32(in.size());
  check_element(g, n);
  if (out.size() != in.size()) throw InvalidConfig("automorphism buffers must match");
  for (u32 k = 0; k < n; ++k) out[k] = in[automorphism_eval_source(k, g, n)];
}

rns::RnsPolynomial automorphism(const rns::RnsPolynomial& x, u32 g) {
  rns::RnsPolynomial out(x.basis(), x.prime_indices(), x.domain());
  for (u32 l = 0; l < x.limb_count(); ++l) {
    if (x.domain() == rns::Domain::Coefficient)
      automorphism_coeff(x.limb(l), out.limb(l), g, x.prime(l));
    else
      automorphism_eval(x.limb(l), out.limb(l), g);
  }
  return out;
}

}  // namespace fhemesh::transform
