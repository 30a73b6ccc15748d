// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "fhemesh/common.hpp"

namespace fhemesh::transform {

enum class TransformDir { Forward, Inverse };

// One aggregated transfer between execution units during the mid-transform
// redistribution. Units are submodules for the in-core composable path and
// cores for the cooperative path.
struct ExchangeRecord {
  u32 src = 0;
  u32 dst = 0;
  u64 elements = 0;
};

struct ExchangeTrace {
  enum class Scope { Submodule, Core };
  Scope scope = Scope::Submodule;
  // Forward transforms exchange after the column stage's buffering/shuffling;
  // inverse transforms exchange before their column stage.
  TransformDir dir = TransformDir::Forward;
  std::vector<ExchangeRecord> records;

  u64 total_elements() const {
    u64 t = 0;
    for (const auto& r : records) t += r.elements;
    return t;
  }

  u64 cross_elements() const {
    u64 t = 0;
    for (const auto& r : records)
      if (r.src != r.dst) t += r.elements;
    return t;
  }

  u64 sent_by(u32 unit) const {
    u64 t = 0;
    for (const auto& r : records)
      if (r.src == unit && r.dst != unit) t += r.elements;
    return t;
  }

  u64 received_by(u32 unit) const {
    u64 t = 0;
    for (const auto& r : records)
      if (r.dst == unit && r.src != unit) t += r.elements;
    return t;
  }
};

}  // namespace fhemesh::transform
