// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/rns/basis.hpp"

#include <sstream>

namespace fhemesh::rns {

namespace {

u64 pow_mod_u64(u64 base, u64 e, u64 mod) {
  u128 acc = 1;
  u128 b = base % mod;
  while (e) {
    if (e & 1) acc = acc * b % mod;
    b = b * b % mod;
    e >>= 1;
  }
  return u64(acc);
}

// Deterministic Miller-Rabin; bases {2, 7, 61} decide primality below 2^32.
bool miller_rabin(u32 n, u32 a) {
  if (n % a == 0) return n == a;
  u32 d = n - 1;
  int s = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++s;
  }
  u64 x = pow_mod_u64(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (int i = 1; i < s; ++i) {
    x = u128(x) * x % n;
    if (x == n - 1) return true;
  }
  return false;
}

// Finds a primitive 2N-th root of unity mod q (requires q = 1 mod 2N):
// smallest h >= 2 whose (q-1)/2N power has exact order 2N.
u32 find_psi(const MontCtx& mont, u32 two_n) {
  u32 q = mont.q;
  u32 exp = (q - 1) / two_n;
  for (u32 h = 2;; ++h) {
    u32 cand = mont.pow_std(h, exp);
    if (mont.pow_std(cand, two_n / 2) == q - 1) return cand;
  }
}

}  // namespace

bool is_prime_u32(u32 n) {
  if (n < 2) return false;
  for (u32 p : {2u, 3u, 5u, 7u}) {
    if (n % p == 0) return n == p;
  }
  for (u32 a : {2u, 7u, 61u}) {
    if (!miller_rabin(n, a)) return false;
  }
  return true;
}

BasisPtr generate_basis(const CkksParams& params, u64 seed) {
  params.validate();
  const u32 n = params.n();
  const u64 two_n = u64(n) * 2;
  const u32 want = params.max_level + params.aux_count;

  auto basis = std::make_shared<PrimeBasis>();
  basis->params = params;
  basis->seed = seed;

  const u64 limit = (u64(1) << params.word_bits) - 1;
  // Largest candidate <= limit with candidate = 1 (mod 2N).
  u64 cand = limit >= two_n + 1 ? (limit - 1) / two_n * two_n + 1 : 0;
  for (; cand > two_n && basis->primes.size() < want; cand -= two_n) {
    if (!is_prime_u32(u32(cand))) continue;
    PrimeInfo info;
    info.q = u32(cand);
    info.mont = MontCtx(info.q);
    info.psi = find_psi(info.mont, u32(two_n));
    info.psi_inv = info.mont.inv_std(info.psi);
    info.n_inv = info.mont.inv_std(n % info.q);
    info.n_inv_m = info.mont.to_mont(info.n_inv);
    basis->primes.push_back(std::move(info));
  }

  if (basis->primes.size() < want) {
    std::ostringstream os;
    os << "need " << want << " primes = 1 (mod " << two_n << ") below 2^" << params.word_bits
       << ", found " << basis->primes.size();
    throw InsufficientPrimes(os.str());
  }

  const u32 log_n = params.log_n;
  for (PrimeInfo& info : basis->primes) {
    info.psi_brv.resize(n);
    info.psi_inv_brv.resize(n);
    u32 fwd = info.mont.one_m;
    u32 inv = info.mont.one_m;
    const u32 psi_m = info.mont.to_mont(info.psi);
    const u32 psi_inv_m = info.mont.to_mont(info.psi_inv);
    for (u32 i = 0; i < n; ++i) {
      u32 r = bit_reverse(i, log_n);
      info.psi_brv[r] = fwd;
      info.psi_inv_brv[r] = inv;
      fwd = info.mont.reduce(u64(fwd) * psi_m);
      inv = info.mont.reduce(u64(inv) * psi_inv_m);
    }
  }
  return basis;
}

}  // namespace fhemesh::rns
