// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/transform/ntt.hpp"

#include <vector>

namespace fhemesh::transform {

namespace {

void bitrev_permute(std::span<u32> x) {
  const u32 n = u32(x.size());
  const u32 bits = log2_exact(n);
  for (u32 i = 0; i < n; ++i) {
    u32 j = bit_reverse(i, bits);
    if (i < j) std::swap(x[i], x[j]);
  }
}

// Cooley-Tukey decimation ladder, natural-order output after the final
// permutation. Twiddle tables hold psi powers in bit-reversed order,
// Montgomery form.
void fwd_core(std::span<u32> x, const u32* psi_brv, const MontCtx& m) {
  const u32 n = u32(x.size());
  u32 t = n;
  for (u32 len = 1; len < n; len <<= 1) {
    t >>= 1;
    for (u32 i = 0; i < len; ++i) {
      const u32 w = psi_brv[len + i];
      const u32 j1 = 2 * i * t;
      for (u32 j = j1; j < j1 + t; ++j) {
        const u32 u = x[j];
        const u32 v = m.mul(x[j + t], w);
        x[j] = m.add(u, v);
        x[j + t] = m.sub(u, v);
      }
    }
  }
  bitrev_permute(x);
}

// Gentleman-Sande ladder mirroring fwd_core; the transform-size inverse is
// folded into the final stage rather than applied as a separate pass.
void inv_core(std::span<u32> x, const u32* psi_inv_brv, u32 size_inv_m, const MontCtx& m) {
  bitrev_permute(x);
  const u32 n = u32(x.size());
  u32 t = 1;
  for (u32 len = n >> 1; len > 1; len >>= 1) {
    u32 j1 = 0;
    for (u32 i = 0; i < len; ++i) {
      const u32 w = psi_inv_brv[len + i];
      for (u32 j = j1; j < j1 + t; ++j) {
        const u32 u = x[j];
        const u32 v = x[j + t];
        x[j] = m.add(u, v);
        x[j + t] = m.mul(m.sub(u, v), w);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  const u32 w_folded = m.reduce(u64(psi_inv_brv[1]) * size_inv_m);
  for (u32 j = 0; j < t; ++j) {
    const u32 u = x[j];
    const u32 v = x[j + t];
    x[j] = m.mul(m.add(u, v), size_inv_m);
    x[j + t] = m.mul(m.sub(u, v), w_folded);
  }
}

struct View {
  std::span<u32> x;
  u32 m2;
  // Element (column r, small-transform output k2) lives at x[r + m2*k2].
};

// Column-stage small transforms plus merged twist, in place.
void columns_and_twist(const View& v, const TwiddleTable& tw, const MontCtx& m, u32 r_begin,
                       u32 r_end) {
  std::vector<u32> col(v.m2);
  for (u32 r = r_begin; r < r_end; ++r) {
    for (u32 c = 0; c < v.m2; ++c) col[c] = v.x[r + size_t(v.m2) * c];
    fwd_core(col, tw.col_psi_brv.data(), m);
    const u32* twist = &tw.twist[size_t(r) * v.m2];
    for (u32 k2 = 0; k2 < v.m2; ++k2) v.x[r + size_t(v.m2) * k2] = m.mul(col[k2], twist[k2]);
  }
}

// Row-stage small transforms; writes natural-order results into out.
void rows_to_output(const View& v, const TwiddleTable& tw, const MontCtx& m, u32 k2_begin,
                    u32 k2_end, std::span<u32> out) {
  std::vector<u32> seg(v.m2);
  for (u32 k2 = k2_begin; k2 < k2_end; ++k2) {
    u32* base = &v.x[size_t(v.m2) * k2];
    for (u32 r = 0; r < v.m2; ++r) seg[r] = base[r];
    fwd_core(seg, tw.col_psi_brv.data(), m);
    for (u32 k1 = 0; k1 < v.m2; ++k1) out[k2 + size_t(v.m2) * k1] = seg[k1];
  }
}

// Inverse row stage: gathers strided spectral values back into the twisted
// matrix layout.
void rows_from_input(const View& v, const TwiddleTable& tw, const MontCtx& m, u32 k2_begin,
                     u32 k2_end, std::span<const u32> in) {
  std::vector<u32> seg(v.m2);
  for (u32 k2 = k2_begin; k2 < k2_end; ++k2) {
    for (u32 k1 = 0; k1 < v.m2; ++k1) seg[k1] = in[k2 + size_t(v.m2) * k1];
    inv_core(seg, tw.col_psi_inv_brv.data(), tw.m2_inv_m, m);
    u32* base = &v.x[size_t(v.m2) * k2];
    for (u32 r = 0; r < v.m2; ++r) base[r] = seg[r];
  }
}

void untwist_and_columns(const View& v, const TwiddleTable& tw, const MontCtx& m, u32 r_begin,
                         u32 r_end) {
  std::vector<u32> col(v.m2);
  for (u32 r = r_begin; r < r_end; ++r) {
    const u32* twist_inv = &tw.twist_inv[size_t(r) * v.m2];
    for (u32 k2 = 0; k2 < v.m2; ++k2)
      col[k2] = m.mul(v.x[r + size_t(v.m2) * k2], twist_inv[k2]);
    inv_core(col, tw.col_psi_inv_brv.data(), tw.m2_inv_m, m);
    for (u32 c = 0; c < v.m2; ++c) v.x[r + size_t(v.m2) * c] = col[c];
  }
}

ExchangeTrace make_shuffle_trace(u32 units, u32 block, ExchangeTrace::Scope scope,
                                 TransformDir dir, bool include_self) {
  ExchangeTrace trace;
  trace.scope = scope;
  trace.dir = dir;
  const u64 per_pair = u64(block) * block;
  for (u32 s = 0; s < units; ++s) {
    for (u32 d = 0; d < units; ++d) {
      if (!include_self && s == d) continue;
      trace.records.push_back({s, d, per_pair});
    }
  }
  return trace;
}

void check_sizes(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw) {
  if (row.size() != tw.n) throw InvalidPlan("row length disagrees with twiddle table");
  (void)prime;
}

ExchangeTrace decomposed_fwd(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                             u32 units, ExchangeTrace::Scope scope, bool include_self) {
  check_sizes(row, prime, tw);
  const MontCtx& m = prime.mont;
  View v{row, tw.m2};
  const u32 block = tw.m2 / units;
  for (u32 u = 0; u < units; ++u) columns_and_twist(v, tw, m, u * block, (u + 1) * block);
  ExchangeTrace trace = make_shuffle_trace(units, block, scope, TransformDir::Forward,
                                           include_self);
  std::vector<u32> out(row.size());
  for (u32 u = 0; u < units; ++u) rows_to_output(v, tw, m, u * block, (u + 1) * block, out);
  std::copy(out.begin(), out.end(), row.begin());
  return trace;
}

ExchangeTrace decomposed_inv(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                             u32 units, ExchangeTrace::Scope scope, bool include_self) {
  check_sizes(row, prime, tw);
  const MontCtx& m = prime.mont;
  View v{row, tw.m2};
  const u32 block = tw.m2 / units;
  std::vector<u32> in(row.begin(), row.end());
  for (u32 u = 0; u < units; ++u) rows_from_input(v, tw, m, u * block, (u + 1) * block, in);
  ExchangeTrace trace = make_shuffle_trace(units, block, scope, TransformDir::Inverse,
                                           include_self);
  for (u32 u = 0; u < units; ++u) untwist_and_columns(v, tw, m, u * block, (u + 1) * block);
  return trace;
}

}  // namespace

std::pair<u32, u32> butterfly_ntt(u32 a, u32 b, u32 w, const MontCtx& m) {
  const u32 bw = m.mul_std(b, w);
  return {m.add(a, bw), m.sub(a, bw)};
}

std::pair<u32, u32> butterfly_intt(u32 a, u32 b, u32 w, const MontCtx& m) {
  return {m.add(a, b), m.mul_std(m.sub(a, b), w)};
}

void ntt_reference(std::span<u32> row, const PrimeInfo& prime) {
  if (row.size() != prime.psi_brv.size())
    throw InvalidPlan("row length disagrees with basis degree");
  fwd_core(row, prime.psi_brv.data(), prime.mont);
}

void intt_reference(std::span<u32> row, const PrimeInfo& prime) {
  if (row.size() != prime.psi_inv_brv.size())
    throw InvalidPlan("row length disagrees with basis degree");
  inv_core(row, prime.psi_inv_brv.data(), prime.n_inv_m, prime.mont);
}

TwiddleTable build_twiddle_table(const PrimeInfo& prime, u32 n) {
  if (!is_pow2(n) || log2_exact(n) % 2 != 0)
    throw InvalidPlan("matrix decomposition needs an integral square root of N");
  TwiddleTable tw;
  tw.n = n;
  tw.m2 = square_root(n);
  const MontCtx& m = prime.mont;
  const u64 two_n = u64(n) * 2;

  const u32 psi_col = m.pow_std(prime.psi, tw.m2);
  const u32 psi_col_inv = m.inv_std(psi_col);
  tw.col_psi_brv.resize(tw.m2);
  tw.col_psi_inv_brv.resize(tw.m2);
  const u32 bits = log2_exact(tw.m2);
  u32 fwd = m.one_m;
  u32 inv = m.one_m;
  const u32 pc_m = m.to_mont(psi_col);
  const u32 pci_m = m.to_mont(psi_col_inv);
  for (u32 i = 0; i < tw.m2; ++i) {
    const u32 r = bit_reverse(i, bits);
    tw.col_psi_brv[r] = fwd;
    tw.col_psi_inv_brv[r] = inv;
    fwd = m.reduce(u64(fwd) * pc_m);
    inv = m.reduce(u64(inv) * pci_m);
  }
  tw.m2_inv_m = m.to_mont(m.inv_std(tw.m2 % m.q));

  tw.twist.resize(n);
  tw.twist_inv.resize(n);
  for (u32 r = 0; r < tw.m2; ++r) {
    // Exponent e(r, k2) = r*(2*k2 + 1 - m2) mod 2N; step between k2 values is
    // psi^{2r}.
    const u64 e0 = u64(r) * ((two_n + 1 - tw.m2) % two_n) % two_n;
    u32 t = m.to_mont(m.pow_std(prime.psi, e0));
    u32 ti = m.to_mont(m.pow_std(prime.psi_inv, e0));
    const u32 step = m.to_mont(m.pow_std(prime.psi, 2 * u64(r) % two_n));
    const u32 step_inv = m.to_mont(m.pow_std(prime.psi_inv, 2 * u64(r) % two_n));
    for (u32 k2 = 0; k2 < tw.m2; ++k2) {
      tw.twist[size_t(r) * tw.m2 + k2] = t;
      tw.twist_inv[size_t(r) * tw.m2 + k2] = ti;
      t = m.reduce(u64(t) * step);
      ti = m.reduce(u64(ti) * step_inv);
    }
  }
  return tw;
}

void ntt_four_step(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw) {
  decomposed_fwd(row, prime, tw, 1, ExchangeTrace::Scope::Submodule, true);
}

void intt_four_step(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw) {
  decomposed_inv(row, prime, tw, 1, ExchangeTrace::Scope::Submodule, true);
}

ExchangeTrace ntt_composable(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                             const NttPlan& plan) {
  validate_plan(plan);
  if (plan.n != tw.n) throw InvalidPlan("plan degree disagrees with twiddle table");
  return decomposed_fwd(row, prime, tw, plan.submodule_count, ExchangeTrace::Scope::Submodule,
                        true);
}

ExchangeTrace intt_composable(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                              const NttPlan& plan) {
  validate_plan(plan);
  if (plan.n != tw.n) throw InvalidPlan("plan degree disagrees with twiddle table");
  return decomposed_inv(row, prime, tw, plan.submodule_count, ExchangeTrace::Scope::Submodule,
                        true);
}

ExchangeTrace ntt_multicore(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                            const NttPlan& plan) {
  validate_plan(plan);
  if (plan.n != tw.n) throw InvalidPlan("plan degree disagrees with twiddle table");
  return decomposed_fwd(row, prime, tw, plan.cores, ExchangeTrace::Scope::Core, false);
}

ExchangeTrace intt_multicore(std::span<u32> row, const PrimeInfo& prime, const TwiddleTable& tw,
                             const NttPlan& plan) {
  validate_plan(plan);
  if (plan.n != tw.n) throw InvalidPlan("plan degree disagrees with twiddle table");
  return decomposed_inv(row, prime, tw, plan.cores, ExchangeTrace::Scope::Core, false);
}

void ntt_poly(RnsPolynomial& x) {
  if (x.domain() != Domain::Coefficient)
    throw DomainMismatch("forward transform expects coefficient domain");
  for (u32 l = 0; l < x.limb_count(); ++l) ntt_reference(x.limb(l), x.prime(l));
  x.set_domain(Domain::Evaluation);
}

void intt_poly(RnsPolynomial& x) {
  if (x.domain() != Domain::Evaluation)
    throw DomainMismatch("inverse transform expects evaluation domain");
  for (u32 l = 0; l < x.limb_count(); ++l) intt_reference(x.limb(l), x.prime(l));
  x.set_domain(Domain::Coefficient);
}

}  // namespace fhemesh::transform
