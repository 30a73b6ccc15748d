// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "fhemesh/keyswitch/bconv.hpp"
#include "fhemesh/keyswitch/digits.hpp"
#include "fhemesh/mapping/placement.hpp"
#include "fhemesh/rns/poly.hpp"

namespace fhemesh::keyswitch {

struct KeySwitchParams {
  u32 digits = 3;  // digit-decomposition count
  u32 level = 1;   // active ciphertext limbs
  u32 aux = 1;     // auxiliary limbs engaged

  void validate(const rns::BasisPtr& basis) const;
  // Extended active set: ciphertext limbs [0, level) then auxiliary limbs.
  std::vector<u32> extended_indices(const rns::BasisPtr& basis) const;
  std::vector<u32> aux_indices(const rns::BasisPtr& basis) const;
};

// Switching key: one polynomial pair per digit over the extended basis, in
// evaluation form. The first element of each pair is keystream-expandable
// from `seed` on any core; the second must be streamed from memory.
struct EvalKey {
  std::vector<std::pair<rns::RnsPolynomial, rns::RnsPolynomial>> parts;
  u64 seed = 0;
};

EvalKey synthesize_evk(const rns::BasisPtr& basis, const KeySwitchParams& p, u64 seed);

// Data-movement account of one key switching over a placed ciphertext.
struct TransferLedger {
  struct Conversion {
    u32 inputs = 0;
    u32 outputs = 0;
    mapping::BConvStrategy strategy = mapping::BConvStrategy::Redistribute;
    Rational benefit{0};           // limbs-worth saved by duplication
    u64 redistribute_elements = 0; // cost if inputs+outputs were sliced evenly
    u64 duplicate_elements = 0;    // cost if inputs were broadcast whole
    u64 moved_elements = 0;        // cost of the strategy actually taken
  };

  u64 input_elements = 0;   // conversion-input gather/broadcast volume
  u64 output_elements = 0;  // conversion-output scatter volume
  u64 hbm_elements = 0;     // switching-key halves streamed from memory
  u64 limbs_broadcast = 0;
  u64 limbs_redistributed = 0;
  std::vector<Conversion> conversions;

  u64 core_to_core() const { return input_elements + output_elements; }
  Rational total_benefit() const;
  void merge(const TransferLedger& o);
};

struct KeySwitchOptions {
  mapping::Placement placement;
  DuplicationMode mode = DuplicationMode::Auto;
};

// Price one base conversion of `in` -> `out` limbs over the placement and
// fold its traffic into `led`; the strategy follows `mode` through the
// duplication-benefit rule. Both candidate volumes are recorded so the
// redistribute/duplicate gap can be audited after the fact.
void price_conversion(TransferLedger& led, const mapping::Placement& pl,
                      const std::vector<u32>& in, const std::vector<u32>& out,
                      DuplicationMode mode);

struct KeySwitchResult {
  rns::Ciphertext ct;  // switched contribution pair over the input's limbs
  TransferLedger ledger;
};

// Digit-decomposed key switching of one evaluation-form polynomial: per-digit
// base extension into the auxiliary limbs, inner product with the switching
// key, and scaled descent back to the ciphertext base. The ledger prices all
// conversion traffic for the placement in `opt`, with per-conversion input
// duplication chosen by `opt.mode`.
KeySwitchResult keyswitch(const rns::RnsPolynomial& d, const EvalKey& evk,
                          const KeySwitchParams& p, const KeySwitchOptions& opt);

// Movement account alone (no residue arithmetic); used by trace-driven
// simulation where only geometry matters. `aux_start` is the basis index of
// the first auxiliary limb (ciphertext limbs are [0, level)). Identical
// ledger to keyswitch() when aux_start matches the basis limb budget.
TransferLedger keyswitch_ledger(const KeySwitchParams& p, const KeySwitchOptions& opt, u32 n,
                                u32 aux_start);

}  // namespace fhemesh::keyswitch
