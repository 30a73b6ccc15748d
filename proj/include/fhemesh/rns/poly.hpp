// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "fhemesh/rns/basis.hpp"

namespace fhemesh::rns {

enum class Domain { Coefficient, Evaluation };

// Residue matrix: one row (limb) per active prime, limb-major storage.
// The active set is a list of basis indices; plain ciphertext polynomials use
// the prefix {0..l-1}, base-extended polynomials also reference auxiliary
// primes, and base-conversion outputs reference complement sets.
class RnsPolynomial {
 public:
  RnsPolynomial() = default;

  RnsPolynomial(BasisPtr basis, std::vector<u32> prime_idx, Domain domain)
      : basis_(std::move(basis)),
        prime_idx_(std::move(prime_idx)),
        domain_(domain),
        data_(size_t(prime_idx_.size()) * basis_->n(), 0) {}

  // Prefix constructor: the first n_limbs ciphertext-base primes.
  RnsPolynomial(BasisPtr basis, u32 n_limbs, Domain domain)
      : RnsPolynomial(std::move(basis), prefix_indices(n_limbs), domain) {}

  static std::vector<u32> prefix_indices(u32 n_limbs) {
    std::vector<u32> idx(n_limbs);
    for (u32 i = 0; i < n_limbs; ++i) idx[i] = i;
    return idx;
  }

  const BasisPtr& basis() const { return basis_; }
  u32 n() const { return basis_->n(); }
  u32 limb_count() const { return u32(prime_idx_.size()); }
  const std::vector<u32>& prime_indices() const { return prime_idx_; }
  u32 prime_index(u32 limb) const { return prime_idx_.at(limb); }
  const PrimeInfo& prime(u32 limb) const { return basis_->primes.at(prime_idx_.at(limb)); }

  Domain domain() const { return domain_; }
  void set_domain(Domain d) { domain_ = d; }

  std::span<u32> limb(u32 i) { return {data_.data() + size_t(i) * n(), n()}; }
  std::span<const u32> limb(u32 i) const { return {data_.data() + size_t(i) * n(), n()}; }

  u32& at(u32 limb_i, u32 coeff) { return data_[size_t(limb_i) * n() + coeff]; }
  u32 at(u32 limb_i, u32 coeff) const { return data_[size_t(limb_i) * n() + coeff]; }

  bool operator==(const RnsPolynomial& o) const {
    return prime_idx_ == o.prime_idx_ && domain_ == o.domain_ && data_ == o.data_;
  }

 private:
  BasisPtr basis_;
  std::vector<u32> prime_idx_;
  Domain domain_ = Domain::Coefficient;
  std::vector<u32> data_;
};

struct Ciphertext {
  RnsPolynomial c0;
  RnsPolynomial c1;
  u32 level = 0;  // active ciphertext-base limb count
};

}  // namespace fhemesh::rns
