// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/keyswitch/digits.hpp"

#include <algorithm>

namespace fhemesh::keyswitch {

std::vector<std::vector<u32>> digit_groups(u32 level, u32 digits) {
  if (level == 0) throw InvalidConfig("digit grouping needs at least one limb");
  if (digits == 0) throw InvalidConfig("digit count must be positive");
  const u32 count = std::min(digits, level);
  const u32 base = level / count;
  const u32 rem = level % count;
  std::vector<std::vector<u32>> groups(count);
  u32 next = 0;
  for (u32 g = 0; g < count; ++g) {
    const u32 size = base + (g < rem ? 1 : 0);
    groups[g].resize(size);
    for (u32 i = 0; i < size; ++i) groups[g][i] = next++;
  }
  return groups;
}

u64 bconv_output_limb_count(u32 level, u32 digits, u32 aux) {
  u64 total = 0;
  for (const auto& group : digit_groups(level, digits))
    total += u64(level) + aux - group.size();  // extension into the complement
  return total + 2ull * level;                 // two descents from the aux limbs
}

Rational limb_dup_benefit(u64 n_output, u64 n_input, const Rational& overhead) {
  return Rational(i64(n_output)) - Rational(i64(n_input)) * (overhead - 1);
}

mapping::BConvStrategy choose_bconv_strategy(u64 n_output, u64 n_input, const Rational& overhead,
                                             DuplicationMode mode) {
  if (mode == DuplicationMode::Off) return mapping::BConvStrategy::Redistribute;
  if (mode == DuplicationMode::On) return mapping::BConvStrategy::Duplicate;
  return limb_dup_benefit(n_output, n_input, overhead) > Rational(0)
             ? mapping::BConvStrategy::Duplicate
             : mapping::BConvStrategy::Redistribute;
}

}  // namespace fhemesh::keyswitch
