// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fhemesh/common.hpp"
#include "fhemesh/mapping/packets.hpp"

namespace fhemesh::keyswitch {

// Whether the per-conversion input-duplication choice is made from the cost
// model (Auto) or pinned to one side (Off redistributes, On broadcasts).
enum class DuplicationMode { Off, On, Auto };

// Contiguous digit groups over limbs [0, level): min(digits, level) groups
// whose sizes differ by at most one, remainder absorbed by the leading
// groups. Balanced sizing keeps the total conversion-output count monotone
// in both level and digit count.
std::vector<std::vector<u32>> digit_groups(u32 level, u32 digits);

// Fresh limbs produced by all base conversions of one key switching at the
// given level: each digit group converts into the complement of the extended
// basis, and the two final down-conversions return from the auxiliary limbs.
// Equals min(digits, level) * (level + aux) + level.
u64 bconv_output_limb_count(u32 level, u32 digits, u32 aux);

// Net limbs-worth of traffic saved by duplicating conversion inputs instead
// of redistributing inputs and outputs: n_output - n_input * (overhead - 1).
Rational limb_dup_benefit(u64 n_output, u64 n_input, const Rational& overhead);

// Duplicate exactly when the benefit is positive; ties and Off fall back to
// redistribution.
mapping::BConvStrategy choose_bconv_strategy(u64 n_output, u64 n_input,
                                             const Rational& overhead, DuplicationMode mode);

}  // namespace fhemesh::keyswitch
