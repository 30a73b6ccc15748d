// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/rational.hpp>

namespace fhemesh {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

// Exact fractions for transfer-overhead bookkeeping.
using Rational = boost::rational<i64>;

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientPrimes : Error {
  using Error::Error;
};
struct BasisMismatch : Error {
  using Error::Error;
};
struct DomainMismatch : Error {
  using Error::Error;
};
struct InvalidPlan : Error {
  using Error::Error;
};
struct InvalidBlock : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct UnknownKey : Error {
  using Error::Error;
};
struct CapacityExceeded : Error {
  using Error::Error;
};
struct MissingConstant : Error {
  using Error::Error;
};
struct MalformedTrace : Error {
  using Error::Error;
};
struct PlacementMismatch : Error {
  using Error::Error;
};

constexpr bool is_pow2(u64 v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr u32 log2_exact(u64 v) {
  u32 r = 0;
  while (v > 1) {
    v >>= 1;
    ++r;
  }
  return r;
}

constexpr u64 ceil_div(u64 a, u64 b) { return (a + b - 1) / b; }

// Reverses the low `bits` bits of v.
constexpr u32 bit_reverse(u32 v, u32 bits) {
  u32 r = 0;
  for (u32 i = 0; i < bits; ++i) {
    r = (r << 1) | ((v >> i) & 1u);
  }
  return r;
}

}  // namespace fhemesh
