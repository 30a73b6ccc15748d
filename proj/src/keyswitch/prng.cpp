// SPDX-License-Identifier: Apache-2.0
#include "fhemesh/keyswitch/prng.hpp"

#include <bit>

namespace fhemesh::keyswitch {

namespace {

inline void quarter_round(u32& a, u32& b, u32& c, u32& d) {
  a += b; d ^= a; d = std::rotl(d, 16);
  c += d; b ^= c; b = std::rotl(b, 12);
  a += b; d ^= a; d = std::rotl(d, 8);
  c += d; b ^= c; b = std::rotl(b, 7);
}

}  // namespace

void chacha20_block(const std::array<u32, 8>& key, u64 counter, u64 nonce,
                    std::array<u32, 16>& out) {
  const std::array<u32, 16> init{0x61707865u, 0x3320646eu, 0x79622d32u, 0x6b206574u,
                                 key[0],      key[1],      key[2],      key[3],
                                 key[4],      key[5],      key[6],      key[7],
                                 u32(counter), u32(counter >> 32), u32(nonce), u32(nonce >> 32)};
  std::array<u32, 16> s = init;
  for (int round = 0; round < 10; ++round) {
    quarter_round(s[0], s[4], s[8], s[12]);
    quarter_round(s[1], s[5], s[9], s[13]);
    quarter_round(s[2], s[6], s[10], s[14]);
    quarter_round(s[3], s[7], s[11], s[15]);
    quarter_round(s[0], s[5], s[10], s[15]);
    quarter_round(s[1], s[6], s[11], s[12]);
    quarter_round(s[2], s[7], s[8], s[13]);
    quarter_round(s[3], s[4], s[9], s[14]);
  }
  for (u32 i = 0; i < 16; ++i) out[i] = s[i] + init[i];
}

std::array<u32, 8> expand_seed(u64 seed) {
  std::array<u32, 8> key;
  u64 state = seed;
  for (u32 i = 0; i < 4; ++i) {
    // splitmix64 step
    state += 0x9e3779b97f4a7c15ull;
    u64 z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    key[2 * i] = u32(z);
    key[2 * i + 1] = u32(z >> 32);
  }
  return key;
}

rns::RnsPolynomial expand_uniform(const rns::BasisPtr& basis, const std::vector<u32>& prime_idx,
                                  rns::Domain domain, u64 seed, u32 stream) {
  rns::RnsPolynomial out(basis, prime_idx, domain);
  const auto key = expand_seed(seed);
  for (u32 li = 0; li < out.limb_count(); ++li) {
    const u32 pi = out.prime_index(li);
    ChaChaStream ks(key, (u64(stream) << 32) | pi);
    const u32 q = basis->primes.at(pi).q;
    for (u32& v : out.limb(li)) v = ks.next_below(q);
  }
  return out;
}

}  // namespace fhemesh::keyswitch
