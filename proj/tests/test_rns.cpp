// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fhemesh/rns/basis.hpp"
#include "fhemesh/rns/crt.hpp"
#include "fhemesh/rns/ops.hpp"
#include "oracles.hpp"

using namespace fhemesh;
using namespace fhemesh::rns;

namespace {

BasisPtr small_basis(u32 log_n = 4, u32 level = 3, u32 aux = 2, u64 seed = 7) {
  CkksParams p;
  p.log_n = log_n;
  p.max_level = level;
  p.aux_count = aux;
  return generate_basis(p, seed);
}

RnsPolynomial random_poly(const BasisPtr& basis, u32 limbs, Domain dom, u64 seed) {
  RnsPolynomial x(basis, limbs, dom);
  std::mt19937_64 rng(seed);
  for (u32 l = 0; l < limbs; ++l) {
    auto row = x.limb(l);
    const u32 q = x.prime(l).q;
    for (auto& v : row) v = u32(rng() % q);
  }
  return x;
}

}  // namespace

TEST_CASE("montgomery multiply matches wide-integer product") {
  std::mt19937_64 rng(11);
  for (u32 q : {65537u, 786433u, 4293918721u, 3221225473u}) {
    REQUIRE(is_prime_u32(q));
    MontCtx m(q);
    for (int i = 0; i < 20000; ++i) {
      const u32 a = u32(rng() % q);
      const u32 b = u32(rng() % q);
      CHECK(m.mul_std(a, b) == oracle::modmul(a, b, q));
    }
    CHECK(m.mul_std(0, 0) == 0);
    CHECK(m.mul_std(q - 1, q - 1) == oracle::modmul(q - 1, q - 1, q));
    CHECK(m.from_mont(m.to_mont(q - 1)) == q - 1);
  }
}

TEST_CASE("montgomery helpers: pow and inverse") {
  MontCtx m(65537);
  CHECK(m.pow_std(3, 0) == 1);
  CHECK(m.pow_std(3, 1) == 3);
  CHECK(m.pow_std(2, 16) == 65536);
  for (u32 a : {1u, 2u, 12345u, 65536u}) {
    CHECK(m.mul_std(a, m.inv_std(a)) == 1);
  }
}

TEST_CASE("prime generation is deterministic and well-formed") {
  CkksParams p;
  p.log_n = 4;
  p.max_level = 2;
  p.aux_count = 1;
  auto b1 = generate_basis(p, 1);
  auto b2 = generate_basis(p, 1);
  REQUIRE(b1->primes.size() == 3);
  for (u32 i = 0; i < 3; ++i) {
    CHECK(b1->primes[i].q == b2->primes[i].q);
    CHECK(b1->primes[i].q % (2 * p.n()) == 1);
    CHECK(is_prime_u32(b1->primes[i].q));
  }
  CHECK(b1->primes[0].q != b1->primes[1].q);
  CHECK(b1->primes[1].q != b1->primes[2].q);

  // Brute-force enumeration oracle: the scan must return the largest primes
  // congruent to 1 mod 2N, in descending order.
  std::vector<u32> expect;
  for (u64 c = (u64(0xFFFFFFFF) / 32) * 32 + 1; c > 32 && expect.size() < 3; c -= 32) {
    if (oracle::modpow(2, u32(c) - 1, u32(c)) == 1 && is_prime_u32(u32(c))) expect.push_back(u32(c));
  }
  for (u32 i = 0; i < 3; ++i) CHECK(b1->primes[i].q == expect[i]);
}

TEST_CASE("narrow word width exhausts the candidate space") {
  CkksParams p;
  p.log_n = 4;
  p.max_level = 2;
  p.aux_count = 1;
  p.word_bits = 6;
  // Oracle: no prime below 2^6 is congruent to 1 mod 32 (33 = 3*11 fails).
  bool any = false;
  for (u32 c = 33; c < 64; c += 32) any = any || is_prime_u32(c);
  REQUIRE_FALSE(any);
  CHECK_THROWS_AS(generate_basis(p, 1), InsufficientPrimes);
}

TEST_CASE("default profile basis: 60 primes below 2^32 at degree 2^16") {
  CkksParams p;  // defaults: log_n 16, L 48, K 12
  auto basis = generate_basis(p, 0);
  REQUIRE(basis->primes.size() == 60);
  for (const auto& info : basis->primes) {
    CHECK(info.q % (u64(2) * p.n()) == 1);
    CHECK(is_prime_u32(info.q));
  }
  // Distinct by construction of the descending scan.
  for (size_t i = 1; i < basis->primes.size(); ++i)
    CHECK(basis->primes[i - 1].q > basis->primes[i].q);
}

TEST_CASE("psi is a primitive 2N-th root") {
  auto basis = small_basis();
  const u32 n = basis->n();
  for (const auto& info : basis->primes) {
    CHECK(info.mont.pow_std(info.psi, n) == info.q - 1);
    CHECK(info.mont.pow_std(info.psi, 2 * u64(n)) == 1);
    CHECK(info.mont.mul_std(info.psi, info.psi_inv) == 1);
  }
}

TEST_CASE("element-wise ops match per-residue arithmetic") {
  auto basis = small_basis();
  auto a = random_poly(basis, 3, Domain::Evaluation, 100);
  auto b = random_poly(basis, 3, Domain::Evaluation, 200);

  auto sum = ew_add(a, b);
  auto diff = ew_sub(a, b);
  auto prod = ew_mult(a, b);
  for (u32 l = 0; l < 3; ++l) {
    const u32 q = a.prime(l).q;
    for (u32 i = 0; i < basis->n(); ++i) {
      CHECK(sum.at(l, i) == (u64(a.at(l, i)) + b.at(l, i)) % q);
      CHECK(diff.at(l, i) == (u64(a.at(l, i)) + q - b.at(l, i)) % q);
      CHECK(prod.at(l, i) == oracle::modmul(a.at(l, i), b.at(l, i), q));
    }
  }

  auto acc = random_poly(basis, 3, Domain::Evaluation, 300);
  auto acc_copy = acc;
  ew_mult_acc(acc, a, b);
  for (u32 l = 0; l < 3; ++l) {
    const u32 q = a.prime(l).q;
    for (u32 i = 0; i < basis->n(); ++i) {
      const u32 expect =
          u32((u64(acc_copy.at(l, i)) + oracle::modmul(a.at(l, i), b.at(l, i), q)) % q);
      CHECK(acc.at(l, i) == expect);
    }
  }

  std::vector<u32> scalars = {3, 5, 7};
  auto scaled = ew_const_mult(a, scalars);
  for (u32 l = 0; l < 3; ++l) {
    const u32 q = a.prime(l).q;
    for (u32 i = 0; i < basis->n(); ++i)
      CHECK(scaled.at(l, i) == oracle::modmul(a.at(l, i), scalars[l], q));
  }
}

TEST_CASE("element-wise ops reject mismatched operands") {
  auto basis = small_basis();
  auto a = random_poly(basis, 3, Domain::Evaluation, 1);
  auto b = random_poly(basis, 2, Domain::Evaluation, 2);
  CHECK_THROWS_AS(ew_add(a, b), BasisMismatch);
  auto c = random_poly(basis, 3, Domain::Coefficient, 3);
  CHECK_THROWS_AS(ew_add(a, c), DomainMismatch);
}

TEST_CASE("automorphism: degree-8 sanity against the stated map") {
  auto basis = small_basis(3, 1, 1);
  RnsPolynomial x(basis, 1, Domain::Coefficient);
  x.at(0, 2) = 1;  // X^2
  auto y = automorphism(x, 1);
  // X^2 -> X^10 = -X^2 mod X^8 + 1.
  const u32 q = x.prime(0).q;
  for (u32 i = 0; i < 8; ++i) {
    CHECK(y.at(0, i) == (i == 2 ? q - 1 : 0));
  }
}

TEST_CASE("automorphism equals literal substitution for all r, small degrees") {
  for (u32 log_n : {3u, 4u, 5u}) {
    auto basis = small_basis(log_n, 1, 1, 13);
    const u32 n = basis->n();
    const u32 q = basis->primes[0].q;
    std::vector<u32> coeffs(n);
    oracle::fill_random(coeffs, q, 17 + log_n);
    RnsPolynomial x(basis, 1, Domain::Coefficient);
    for (u32 i = 0; i < n; ++i) x.at(0, i) = coeffs[i];

    for (u32 r = 0; r < 2 * n; ++r) {
      auto got = automorphism(x, r);
      auto want = oracle::substitute_pow5(coeffs, r, q);
      for (u32 i = 0; i < n; ++i) CHECK(got.at(0, i) == want[i]);
    }
  }
}

TEST_CASE("automorphism composes and inverts") {
  auto basis = small_basis(5, 2, 1);
  auto x = random_poly(basis, 2, Domain::Coefficient, 23);
  auto once = automorphism(automorphism(x, 3), 4);
  auto direct = automorphism(x, 7);
  CHECK(once == direct);

  const u64 ord = automorphism_order(basis->n());
  CHECK(ord == basis->n() / 2);
  auto round = automorphism(automorphism(x, 5), u32(ord - 5));
  CHECK(round == x);
  CHECK(automorphism(x, 0) == x);
}

TEST_CASE("automorphism requires coefficient domain") {
  auto basis = small_basis();
  auto x = random_poly(basis, 1, Domain::Evaluation, 5);
  CHECK_THROWS_AS(automorphism(x, 1), DomainMismatch);
}

TEST_CASE("crt round-trips between residues and big integers") {
  auto basis = small_basis(4, 3, 2);
  RnsPolynomial x(basis, 5, Domain::Coefficient);
  const BigInt modulus = active_modulus(x);

  std::mt19937_64 rng(31);
  for (u32 c = 0; c < basis->n(); ++c) {
    BigInt v = 0;
    for (int k = 0; k < 3; ++k) v = (v << 32) | rng();
    v %= modulus;
    crt_decompose(x, c, v);
    CHECK(crt_reconstruct(x, c) == v);
  }

  // Residue consistency: reconstructed value reduces to each stored residue.
  for (u32 c = 0; c < 4; ++c) {
    const BigInt v = crt_reconstruct(x, c);
    for (u32 l = 0; l < x.limb_count(); ++l) {
      CHECK(u32(v % x.prime(l).q) == x.at(l, c));
    }
  }
}
