// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>

#include "fhemesh/rns/poly.hpp"
#include "fhemesh/sched/workload.hpp"

namespace fhemesh::sched {

// Functional execution knobs: the key-switching digit count and the seed all
// inputs, plaintexts, and switching keys derive from.
struct ExecOptions {
  u32 digits = 3;
  u64 seed = 1;
};

// Runs a trace through the arithmetic kernels and returns the final register
// file. Undefined operands are sampled uniformly at their first-use level;
// plaintext operands derive from the op position; switching keys are
// synthesized per (purpose, level). The result is a pure function of
// (trace, basis, options) — no mapping, core-count, or duplication choice
// can change a single residue.
std::map<u32, rns::Ciphertext> execute_trace(const std::vector<HeOp>& trace,
                                             const rns::BasisPtr& basis, const ExecOptions& opt);

// Exact RNS rescale of one evaluation-form prefix polynomial: the last limb
// is carried back to coefficient form, lifted onto the remaining limbs,
// subtracted, and the difference scaled by the dropped prime's inverse. The
// result has one limb fewer and satisfies q_last * out = in - lift exactly
// in every residue.
rns::RnsPolynomial rescale_poly(const rns::RnsPolynomial& x);

// Order-stable 64-bit fingerprint of (level, prime set, residues).
u64 ciphertext_digest(const rns::Ciphertext& ct);

}  // namespace fhemesh::sched
