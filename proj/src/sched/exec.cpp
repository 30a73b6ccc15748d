// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/sched/exec.hpp"

#include <algorithm>

#include "fhemesh/keyswitch/bconv.hpp"
#include "fhemesh/keyswitch/keyswitch.hpp"
#include "fhemesh/keyswitch/prng.hpp"
#include "fhemesh/rns/ops.hpp"
#include "fhemesh/transform/automorphism.hpp"
#include "fhemesh/transform/ntt.hpp"

namespace fhemesh::sched {

namespace {

using keyswitch::BConvTable;
using keyswitch::EvalKey;
using keyswitch::KeySwitchOptions;
using keyswitch::KeySwitchParams;
using rns::Ciphertext;
using rns::Domain;
using rns::RnsPolynomial;

u64 mix64(u64 a, u64 b) {
  u64 x = a + 0x9e3779b97f4a7c15ull * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Executor {
  const rns::BasisPtr& basis;
  ExecOptions opt;
  std::map<u32, Ciphertext> regs;
  std::map<std::pair<u64, u32>, EvalKey> evks;  // (purpose tag, level)
  KeySwitchOptions ks_opt;

  Executor(const rns::BasisPtr& b, const ExecOptions& o) : basis(b), opt(o) {
    ks_opt.placement = mapping::place_polynomial(
        basis->n(), basis->level_count() + basis->aux_count(), mapping::ClusterConfig{});
  }

  RnsPolynomial sample(u32 level, u32 stream) {
    return keyswitch::expand_uniform(basis, RnsPolynomial::prefix_indices(level),
                                     Domain::Evaluation, opt.seed, stream);
  }

  // Operands may sit above the op level; key material and tensor partners
  // must agree, so drop trailing limbs first.
  Ciphertext aligned(u32 reg, u32 level) {
    auto it = regs.find(reg);
    if (it == regs.end()) {
      Ciphertext fresh;
      fresh.c0 = sample(level, 2 * reg);
      fresh.c1 = sample(level, 2 * reg + 1);
      fresh.level = level;
      it = regs.emplace(reg, std::move(fresh)).first;
    }
    const Ciphertext& ct = it->second;
    if (ct.level < level) throw MalformedTrace("operand below the op level");
    if (ct.level == level) return ct;
    Ciphertext cut;
    cut.c0 = prefix(ct.c0, level);
    cut.c1 = prefix(ct.c1, level);
    cut.level = level;
    return cut;
  }

  RnsPolynomial prefix(const RnsPolynomial& x, u32 level) {
    RnsPolynomial out(basis, level, x.domain());
    for (u32 l = 0; l < level; ++l) {
      const auto row = x.limb(l);
      std::copy(row.begin(), row.end(), out.limb(l).begin());
    }
    return out;
  }

  const EvalKey& evk(u64 tag, u32 level) {
    auto it = evks.find({tag, level});
    if (it != evks.end()) return it->second;
    KeySwitchParams p{opt.digits, level, basis->aux_count()};
    EvalKey key = keyswitch::synthesize_evk(basis, p, mix64(opt.seed, tag));
    return evks.emplace(std::make_pair(tag, level), std::move(key)).first->second;
  }

  Ciphertext switched(const RnsPolynomial& d, u64 tag, u32 level) {
    KeySwitchParams p{opt.digits, level, basis->aux_count()};
    return keyswitch::keyswitch(d, evk(tag, level), p, ks_opt).ct;
  }

  void run(const std::vector<HeOp>& trace) {
    for (u32 i = 0; i < u32(trace.size()); ++i) {
      const HeOp& op = trace[i];
      const u32 lv = op.level;
      switch (op.kind) {
        case OpKind::HAdd: {
          const Ciphertext a = aligned(op.a, lv), b = aligned(op.b, lv);
          regs[op.dst] = {rns::ew_add(a.c0, b.c0), rns::ew_add(a.c1, b.c1), lv};
          break;
        }
        case OpKind::PAdd: {
          const Ciphertext a = aligned(op.a, lv);
          const RnsPolynomial pt = sample(lv, 0x80000000u | i);
          regs[op.dst] = {rns::ew_add(a.c0, pt), a.c1, lv};
          break;
        }
        case OpKind::PMult: {
          const Ciphertext a = aligned(op.a, lv);
          const RnsPolynomial pt = sample(lv, 0x80000000u | i);
          regs[op.dst] = {rns::ew_mult(a.c0, pt), rns::ew_mult(a.c1, pt), lv};
          break;
        }
        case OpKind::HMult: {
          const Ciphertext a = aligned(op.a, lv), b = aligned(op.b, lv);
          const RnsPolynomial d0 = rns::ew_mult(a.c0, b.c0);
          RnsPolynomial d1 = rns::ew_mult(a.c0, b.c1);
          rns::ew_mult_acc(d1, a.c1, b.c0);
          const RnsPolynomial d2 = rns::ew_mult(a.c1, b.c1);
          const Ciphertext u = switched(d2, 0, lv);
          regs[op.dst] = {rns::ew_add(d0, u.c0), rns::ew_add(d1, u.c1), lv};
          break;
        }
        case OpKind::HRot: {
          const Ciphertext a = aligned(op.a, lv);
          const u32 g = transform::galois_element(op.rot, basis->n());
          const RnsPolynomial r0 = transform::automorphism(a.c0, g);
          const RnsPolynomial r1 = transform::automorphism(a.c1, g);
          const Ciphertext u = switched(r1, u64(g) << 8 | 1, lv);
          regs[op.dst] = {rns::ew_add(r0, u.c0), u.c1, lv};
          break;
        }
        case OpKind::Rescale: {
          const Ciphertext a = aligned(op.a, lv);
          regs[op.dst] = {rescale_poly(a.c0), rescale_poly(a.c1), lv - 1};
          break;
        }
      }
    }
  }
};

}  // namespace

rns::RnsPolynomial rescale_poly(const rns::RnsPolynomial& x) {
  if (x.domain() != rns::Domain::Evaluation) throw DomainMismatch("rescale expects evaluation form");
  const u32 lv = x.limb_count();
  if (lv < 2) throw InvalidPlan("rescale needs at least two limbs");
  const auto& basis = x.basis();
  const u32 src = x.prime_index(lv - 1);
  RnsPolynomial last(basis, std::vector<u32>{src}, rns::Domain::Evaluation);
  {
    const auto row = x.limb(lv - 1);
    std::copy(row.begin(), row.end(), last.limb(0).begin());
  }
  transform::intt_poly(last);
  std::vector<u32> dst(x.prime_indices().begin(), x.prime_indices().end() - 1);
  const BConvTable lift = BConvTable::build(basis, {src}, dst);
  RnsPolynomial lifted = keyswitch::bconv(last, lift);
  transform::ntt_poly(lifted);
  RnsPolynomial kept(basis, dst, rns::Domain::Evaluation);
  for (u32 l = 0; l + 1 < lv; ++l) {
    const auto row = x.limb(l);
    std::copy(row.begin(), row.end(), kept.limb(l).begin());
  }
  RnsPolynomial diff = rns::ew_sub(kept, lifted);
  std::vector<u32> scalars(dst.size());
  const u32 q_last = basis->primes[src].q;
  for (u32 l = 0; l < u32(dst.size()); ++l) {
    const auto& m = basis->primes[dst[l]].mont;
    scalars[l] = m.inv_std(q_last % m.q);
  }
  return rns::ew_const_mult(diff, scalars);
}

std::map<u32, Ciphertext> execute_trace(const std::vector<HeOp>& trace,
                                        const rns::BasisPtr& basis, const ExecOptions& opt) {
  trace_inputs(trace);  // validates level consistency up front
  Executor ex(basis, opt);
  ex.run(trace);
  return ex.regs;
}

u64 ciphertext_digest(const rns::Ciphertext& ct) {
  u64 h = 0xcbf29ce484222325ull;
  auto eat = [&h](u64 v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ull;
    }
  };
  eat(ct.level);
  for (const RnsPolynomial* half : {&ct.c0, &ct.c1}) {
    eat(half->limb_count());
    for (u32 l = 0; l < half->limb_count(); ++l) {
      eat(half->prime_index(l));
      for (const u32 w : half->limb(l)) eat(w);
    }
  }
  return h;
}

}  // namespace fhemesh::sched
