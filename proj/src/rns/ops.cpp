// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/rns/ops.hpp"

namespace fhemesh::rns {

namespace {

void check_compatible(const RnsPolynomial& a, const RnsPolynomial& b) {
  if (a.basis() != b.basis() || a.prime_indices() != b.prime_indices())
    throw BasisMismatch("element-wise operands disagree on basis or active limbs");
  if (a.domain() != b.domain())
    throw DomainMismatch("element-wise operands disagree on domain");
}

template <typename F>
RnsPolynomial zip(const RnsPolynomial& a, const RnsPolynomial& b, F&& f) {
  check_compatible(a, b);
  RnsPolynomial out(a.basis(), a.prime_indices(), a.domain());
  const u32 n = a.n();
  for (u32 l = 0; l < a.limb_count(); ++l) {
    const MontCtx& m = a.prime(l).mont;
    auto pa = a.limb(l);
    auto pb = b.limb(l);
    auto po = out.limb(l);
    for (u32 i = 0; i < n; ++i) po[i] = f(m, pa[i], pb[i]);
  }
  return out;
}

}  // namespace

RnsPolynomial ew_add(const RnsPolynomial& a, const RnsPolynomial& b) {
  return zip(a, b, [](const MontCtx& m, u32 x, u32 y) { return m.add(x, y); });
}

RnsPolynomial ew_sub(const RnsPolynomial& a, const RnsPolynomial& b) {
  return zip(a, b, [](const MontCtx& m, u32 x, u32 y) { return m.sub(x, y); });
}

RnsPolynomial ew_mult(const RnsPolynomial& a, const RnsPolynomial& b) {
  check_compatible(a, b);
  RnsPolynomial out(a.basis(), a.prime_indices(), a.domain());
  const u32 n = a.n();
  for (u32 l = 0; l < a.limb_count(); ++l) {
    const MontCtx& m = a.prime(l).mont;
    auto pa = a.limb(l);
    auto pb = b.limb(l);
    auto po = out.limb(l);
    for (u32 i = 0; i < n; ++i) {
      // One REDC per element: lift one operand, multiply down.
      po[i] = m.mul(pa[i], m.mul(pb[i], m.r2));
    }
  }
  return out;
}

void ew_mult_acc(RnsPolynomial& acc, const RnsPolynomial& a, const RnsPolynomial& b) {
  check_compatible(acc, a);
  check_compatible(a, b);
  const u32 n = a.n();
  for (u32 l = 0; l < a.limb_count(); ++l) {
    const MontCtx& m = a.prime(l).mont;
    auto pa = a.limb(l);
    auto pb = b.limb(l);
    auto pd = acc.limb(l);
    for (u32 i = 0; i < n; ++i) {
      pd[i] = m.add(pd[i], m.mul(pa[i], m.mul(pb[i], m.r2)));
    }
  }
}

RnsPolynomial ew_const_mult(const RnsPolynomial& a, const std::vector<u32>& scalars) {
  if (scalars.size() != a.limb_count())
    throw BasisMismatch("one scalar per active limb required");
  RnsPolynomial out(a.basis(), a.prime_indices(), a.domain());
  const u32 n = a.n();
  for (u32 l = 0; l < a.limb_count(); ++l) {
    const MontCtx& m = a.prime(l).mont;
    const u32 sm = m.to_mont(scalars[l] % m.q);
    auto pa = a.limb(l);
    auto po = out.limb(l);
    for (u32 i = 0; i < n; ++i) po[i] = m.mul(pa[i], sm);
  }
  return out;
}

u64 automorphism_order(u32 n) {
  const u64 two_n = u64(n) * 2;
  u64 g = 5 % two_n;
  u64 acc = g;
  u64 t = 1;
  while (acc != 1) {
    acc = acc * 5 % two_n;
    ++t;
  }
  return t;
}

RnsPolynomial automorphism(const RnsPolynomial& x, u32 r) {
  if (x.domain() != Domain::Coefficient)
    throw DomainMismatch("automorphism requires coefficient domain");
  const u32 n = x.n();
  const u64 two_n = u64(n) * 2;
  u64 g = 1;
  for (u32 i = 0; i < r; ++i) g = g * 5 % two_n;

  RnsPolynomial out(x.basis(), x.prime_indices(), x.domain());
  for (u32 l = 0; l < x.limb_count(); ++l) {
    const MontCtx& m = x.prime(l).mont;
    auto src = x.limb(l);
    auto dst = out.limb(l);
    u64 e = 0;  // i * 5^r mod 2N
    for (u32 i = 0; i < n; ++i) {
      if (e < n) {
        dst[e] = src[i];
      } else {
        dst[e - n] = m.neg(src[i]);
      }
      e += g;
      if (e >= two_n) e -= two_n;
    }
  }
  return out;
}

}  // namespace fhemesh::rns
