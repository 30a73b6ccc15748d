// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/keyswitch/bconv.hpp"

#include "fhemesh/rns/crt.hpp"

namespace fhemesh::keyswitch {

BConvTable BConvTable::build(const rns::BasisPtr& basis, const std::vector<u32>& src,
                             const std::vector<u32>& dst) {
  if (src.empty() || dst.empty())
    throw BasisMismatch("base conversion needs non-empty source and target sets");
  BConvTable t;
  t.basis = basis;
  t.src_idx = src;
  t.dst_idx = dst;

  rns::BigInt big_q = 1;
  for (const u32 i : src) big_q *= basis->primes.at(i).q;

  t.inv_m.resize(src.size());
  std::vector<rns::BigInt> hats(src.size());
  for (size_t i = 0; i < src.size(); ++i) {
    const auto& p = basis->primes.at(src[i]);
    hats[i] = big_q / p.q;
    const u32 hat_mod = u32(hats[i] % p.q);
    t.inv_m[i] = p.mont.to_mont(p.mont.inv_std(hat_mod));
  }
  t.hat_m.assign(dst.size(), std::vector<u32>(src.size()));
  for (size_t j = 0; j < dst.size(); ++j) {
    const auto& p = basis->primes.at(dst[j]);
    for (size_t i = 0; i < src.size(); ++i) t.hat_m[j][i] = p.mont.to_mont(u32(hats[i] % p.q));
  }
  return t;
}

void bconv_range(const rns::RnsPolynomial& x, const BConvTable& table, u32 first, u32 count,
                 rns::RnsPolynomial& out) {
  if (x.domain() != rns::Domain::Coefficient)
    throw DomainMismatch("base conversion expects coefficient-domain input");
  if (x.prime_indices() != table.src_idx)
    throw BasisMismatch("input limbs do not match the conversion source set");
  if (out.prime_indices() != table.dst_idx)
    throw BasisMismatch("output limbs do not match the conversion target set");

  const size_t n_src = table.src_idx.size();
  // y_i = x_i * (Q/q_i)^{-1} mod q_i, shared across every target limb
  std::vector<u32> y(n_src * count);
  for (size_t i = 0; i < n_src; ++i) {
    const auto& m = x.prime(u32(i)).mont;
    const auto row = x.limb(u32(i));
    for (u32 c = 0; c < count; ++c) y[i * count + c] = m.mul(row[first + c], table.inv_m[i]);
  }
  for (size_t j = 0; j < table.dst_idx.size(); ++j) {
    const auto& m = out.prime(u32(j)).mont;
    auto row = out.limb(u32(j));
    for (u32 c = 0; c < count; ++c) {
      u32 acc = 0;
      for (size_t i = 0; i < n_src; ++i)
        acc = m.add(acc, m.mul(y[i * count + c], table.hat_m[j][i]));
      row[first + c] = acc;
    }
  }
}

rns::RnsPolynomial bconv(const rns::RnsPolynomial& x, const BConvTable& table) {
  rns::RnsPolynomial out(table.basis, table.dst_idx, rns::Domain::Coefficient);
  bconv_range(x, table, 0, x.n(), out);
  return out;
}

}  // namespace fhemesh::keyswitch
