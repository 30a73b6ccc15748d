// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "fhemesh/common.hpp"

namespace fhemesh::transform {

// Lane/submodule/core shape for the decomposed transform paths. One
// submodule spans fourth_root(N) lanes; submodules within a core split the
// column work, cooperating cores split it again at the package level.
struct NttPlan {
  u32 n = 0;
  u32 lanes_per_core = 0;
  u32 submodule_count = 0;
  u32 cores = 1;
};

constexpr bool has_integral_fourth_root(u32 n) {
  return is_pow2(n) && log2_exact(n) % 4 == 0 && n >= 16;
}

constexpr u32 fourth_root(u32 n) { return u32(1) << (log2_exact(n) / 4); }
constexpr u32 square_root(u32 n) { return u32(1) << (log2_exact(n) / 2); }

inline void validate_plan(const NttPlan& p) {
  if (!has_integral_fourth_root(p.n))
    throw InvalidPlan("decomposed transform needs an integral fourth root of N");
  const u32 root4 = fourth_root(p.n);
  bool lanes_ok = p.lanes_per_core == 16 || p.lanes_per_core == 32 || p.lanes_per_core == 64 ||
                  p.lanes_per_core == 128 || p.lanes_per_core == 256;
  if (!lanes_ok) throw InvalidPlan("lanes_per_core must be one of {16,32,64,128,256}");
  if (p.lanes_per_core % root4 != 0 || p.submodule_count != p.lanes_per_core / root4)
    throw InvalidPlan("submodule_count must equal lanes_per_core / fourth_root(N)");
  bool subs_ok = p.submodule_count == 1 || p.submodule_count == 2 || p.submodule_count == 4 ||
                 p.submodule_count == 8 || p.submodule_count == 16;
  if (!subs_ok) throw InvalidPlan("submodule_count must be one of {1,2,4,8,16}");
  if (p.cores == 0 || root4 % p.cores != 0)
    throw InvalidPlan("cooperating core count must divide fourth_root(N)");
}

inline NttPlan make_ntt_plan(u32 n, u32 lanes_per_core, u32 cores) {
  NttPlan p;
  p.n = n;
  p.lanes_per_core = lanes_per_core;
  p.submodule_count = has_integral_fourth_root(n) ? lanes_per_core / fourth_root(n) : 0;
  p.cores = cores;
  validate_plan(p);
  return p;
}

}  // namespace fhemesh::transform
