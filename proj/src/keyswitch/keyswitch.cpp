// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/keyswitch/keyswitch.hpp"

#include <algorithm>

#include "fhemesh/keyswitch/prng.hpp"
#include "fhemesh/rns/ops.hpp"
#include "fhemesh/transform/ntt.hpp"

namespace fhemesh::keyswitch {

void KeySwitchParams::validate(const rns::BasisPtr& basis) const {
  const auto& par = basis->params;
  if (level == 0 || level > par.max_level)
    throw InvalidConfig("key-switch level must lie in [1, " + std::to_string(par.max_level) + "]");
  if (aux == 0 || aux > par.aux_count)
    throw InvalidConfig("key-switch aux limbs must lie in [1, " + std::to_string(par.aux_count) +
                        "]");
  if (digits == 0) throw InvalidConfig("digit count must be positive");
}

std::vector<u32> KeySwitchParams::extended_indices(const rns::BasisPtr& basis) const {
  std::vector<u32> idx(level + aux);
  for (u32 i = 0; i < level; ++i) idx[i] = i;
  for (u32 j = 0; j < aux; ++j) idx[level + j] = basis->params.max_level + j;
  return idx;
}

std::vector<u32> KeySwitchParams::aux_indices(const rns::BasisPtr& basis) const {
  std::vector<u32> idx(aux);
  for (u32 j = 0; j < aux; ++j) idx[j] = basis->params.max_level + j;
  return idx;
}

EvalKey synthesize_evk(const rns::BasisPtr& basis, const KeySwitchParams& p, u64 seed) {
  p.validate(basis);
  const auto ext = p.extended_indices(basis);
  const u32 parts = u32(digit_groups(p.level, p.digits).size());
  EvalKey evk;
  evk.seed = seed;
  evk.parts.reserve(parts);
  for (u32 g = 0; g < parts; ++g)
    evk.parts.emplace_back(
        expand_uniform(basis, ext, rns::Domain::Evaluation, seed, 2 * g),
        expand_uniform(basis, ext, rns::Domain::Evaluation, seed, 2 * g + 1));
  return evk;
}

Rational TransferLedger::total_benefit() const {
  Rational sum{0};
  for (const auto& c : conversions) sum += c.benefit;
  return sum;
}

void TransferLedger::merge(const TransferLedger& o) {
  input_elements += o.input_elements;
  output_elements += o.output_elements;
  hbm_elements += o.hbm_elements;
  limbs_broadcast += o.limbs_broadcast;
  limbs_redistributed += o.limbs_redistributed;
  conversions.insert(conversions.end(), o.conversions.begin(), o.conversions.end());
}

void price_conversion(TransferLedger& led, const mapping::Placement& pl,
                      const std::vector<u32>& in, const std::vector<u32>& out,
                      DuplicationMode mode) {
  using mapping::BConvStrategy;
  const Rational overhead = mapping::broadcast_overhead(pl.cfg);
  TransferLedger::Conversion c;
  c.inputs = u32(in.size());
  c.outputs = u32(out.size());
  c.benefit = limb_dup_benefit(c.outputs, c.inputs, overhead);
  c.strategy = choose_bconv_strategy(c.outputs, c.inputs, overhead, mode);
  const auto redist = mapping::bconv_packets(pl, in, out, BConvStrategy::Redistribute);
  const auto dup = mapping::bconv_packets(pl, in, out, BConvStrategy::Duplicate);
  c.redistribute_elements = mapping::total_elements(redist);
  c.duplicate_elements = mapping::total_elements(dup);

  u64 in_elems = 0, out_elems = 0;
  if (c.strategy == BConvStrategy::Duplicate) {
    in_elems = c.duplicate_elements;
    led.limbs_broadcast += c.inputs;
  } else {
    for (const auto& pkt : redist)
      (pkt.phase == mapping::PacketPhase::BconvGather ? in_elems : out_elems) += pkt.elements;
    led.limbs_redistributed += c.inputs + c.outputs;
  }
  c.moved_elements = in_elems + out_elems;
  led.input_elements += in_elems;
  led.output_elements += out_elems;
  led.conversions.push_back(c);
}

namespace {

TransferLedger build_ledger(const KeySwitchParams& p, const KeySwitchOptions& opt, u32 n,
                            u32 aux_start) {
  TransferLedger led;
  mapping::Placement pl = opt.placement;
  pl.n = n;
  const auto groups = digit_groups(p.level, p.digits);

  std::vector<u32> ext(p.level + p.aux);
  for (u32 i = 0; i < p.level; ++i) ext[i] = i;
  for (u32 j = 0; j < p.aux; ++j) ext[p.level + j] = aux_start + j;
  const std::vector<u32> aux_ids(ext.begin() + p.level, ext.end());
  const std::vector<u32> q_ids(ext.begin(), ext.begin() + p.level);

  for (const auto& group : groups) {
    std::vector<u32> comp;
    for (const u32 id : ext)
      if (std::find(group.begin(), group.end(), id) == group.end()) comp.push_back(id);
    price_conversion(led, pl, group, comp, opt.mode);
  }
  // one key half is expanded from its seed on-core; the other is streamed in
  led.hbm_elements += u64(groups.size()) * ext.size() * n;
  // both accumulator halves descend from the auxiliary limbs
  price_conversion(led, pl, aux_ids, q_ids, opt.mode);
  price_conversion(led, pl, aux_ids, q_ids, opt.mode);
  return led;
}

// (acc_q - bconv(acc_p)) * P^{-1} over the ciphertext limbs, in place of the
// extended accumulator; stays in evaluation form.
rns::RnsPolynomial descend(const rns::RnsPolynomial& acc, const KeySwitchParams& p,
                           const BConvTable& down_tbl, const std::vector<u32>& p_inv_m) {
  const auto& basis = acc.basis();
  rns::RnsPolynomial ap(basis, down_tbl.src_idx, rns::Domain::Evaluation);
  for (u32 j = 0; j < p.aux; ++j) {
    const auto src = acc.limb(p.level + j);
    std::copy(src.begin(), src.end(), ap.limb(j).begin());
  }
  transform::intt_poly(ap);
  auto t = bconv(ap, down_tbl);
  transform::ntt_poly(t);

  rns::RnsPolynomial out(basis, p.level, rns::Domain::Evaluation);
  const u32 n = out.n();
  for (u32 i = 0; i < p.level; ++i) {
    const auto& m = out.prime(i).mont;
    const auto a_row = acc.limb(i);
    const auto t_row = t.limb(i);
    auto o_row = out.limb(i);
    for (u32 c = 0; c < n; ++c) o_row[c] = m.mul(m.sub(a_row[c], t_row[c]), p_inv_m[i]);
  }
  return out;
}

}  // namespace

TransferLedger keyswitch_ledger(const KeySwitchParams& p, const KeySwitchOptions& opt, u32 n,
                                u32 aux_start) {
  if (p.level == 0 || p.aux == 0 || p.digits == 0)
    throw InvalidConfig("key-switch shape values must be positive");
  if (aux_start < p.level) throw InvalidConfig("auxiliary limbs overlap the ciphertext limbs");
  return build_ledger(p, opt, n, aux_start);
}

KeySwitchResult keyswitch(const rns::RnsPolynomial& d, const EvalKey& evk,
                          const KeySwitchParams& p, const KeySwitchOptions& opt) {
  const auto& basis = d.basis();
  p.validate(basis);
  if (d.domain() != rns::Domain::Evaluation)
    throw DomainMismatch("key switching expects an evaluation-form polynomial");
  if (d.prime_indices() != rns::RnsPolynomial::prefix_indices(p.level))
    throw BasisMismatch("input limbs must be the first `level` ciphertext primes");
  const auto groups = digit_groups(p.level, p.digits);
  const auto ext = p.extended_indices(basis);
  if (evk.parts.size() != groups.size())
    throw InvalidConfig("switching key has " + std::to_string(evk.parts.size()) +
                        " parts for " + std::to_string(groups.size()) + " digits");
  for (const auto& part : evk.parts)
    if (part.first.prime_indices() != ext || part.second.prime_indices() != ext)
      throw BasisMismatch("switching key does not cover the extended basis");

  rns::RnsPolynomial dc = d;
  transform::intt_poly(dc);

  rns::RnsPolynomial acc0(basis, ext, rns::Domain::Evaluation);
  rns::RnsPolynomial acc1(basis, ext, rns::Domain::Evaluation);
  for (size_t g = 0; g < groups.size(); ++g) {
    const auto& group = groups[g];
    std::vector<u32> comp;
    for (const u32 id : ext)
      if (std::find(group.begin(), group.end(), id) == group.end()) comp.push_back(id);

    rns::RnsPolynomial xg(basis, group, rns::Domain::Coefficient);
    for (u32 s = 0; s < group.size(); ++s) {
      const auto src = dc.limb(group[s]);  // prefix layout: limb slot == id
      std::copy(src.begin(), src.end(), xg.limb(s).begin());
    }
    auto conv = bconv(xg, BConvTable::build(basis, group, comp));
    transform::ntt_poly(conv);

    // extension: digit limbs ride along unconverted, the rest are fresh
    rns::RnsPolynomial ext_g(basis, ext, rns::Domain::Evaluation);
    u32 from_conv = 0;
    for (u32 s = 0; s < ext.size(); ++s) {
      const bool in_group = std::find(group.begin(), group.end(), ext[s]) != group.end();
      const auto src = in_group ? d.limb(ext[s]) : conv.limb(from_conv++);
      std::copy(src.begin(), src.end(), ext_g.limb(s).begin());
    }
    rns::ew_mult_acc(acc0, ext_g, evk.parts[g].first);
    rns::ew_mult_acc(acc1, ext_g, evk.parts[g].second);
  }

  const auto aux_ids = p.aux_indices(basis);
  const auto down_tbl = BConvTable::build(basis, aux_ids, rns::RnsPolynomial::prefix_indices(p.level));
  std::vector<u32> p_inv_m(p.level);
  for (u32 i = 0; i < p.level; ++i) {
    const auto& m = basis->primes[i].mont;
    u32 prod = 1;
    for (const u32 j : aux_ids) prod = m.mul_std(prod, u32(basis->primes[j].q % m.q));
    p_inv_m[i] = m.to_mont(m.inv_std(prod));
  }

  KeySwitchResult res;
  res.ct.c0 = descend(acc0, p, down_tbl, p_inv_m);
  res.ct.c1 = descend(acc1, p, down_tbl, p_inv_m);
  res.ct.level = p.level;
  res.ledger = build_ledger(p, opt, d.n(), basis->params.max_level);
  return res;
}

}  // namespace fhemesh::keyswitch
