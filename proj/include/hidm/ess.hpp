/*
 * Copyright 2026 The hidm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HIDM_ESS_HPP
#define HIDM_ESS_HPP

// Enumerative sphere shaping over the sequences with energy <= E_max.

#include "hidm/core.hpp"

namespace hidm {

/// count(i, e): number of length-(N-i) suffixes that keep the total energy
/// at or below E_max when the first i symbols used energy e. Only nodes
/// that are reachable and still completable are stored.
class EssTrellis {
public:
  EssTrellis(int n, Alphabet alphabet, std::int64_t e_max);

  int length() const noexcept { return n_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::int64_t e_max() const noexcept { return e_max_; }

  /// Zero for unstored (i, e).
  const BigUint& count(int i, std::int64_t e) const;
  const BigUint& total() const { return count(0, 0); }
  std::span<const std::int64_t> energies(int i) const { return energies_.at(i); }
  std::size_t node_count() const;

private:
  int n_;
  Alphabet alphabet_;
  std::int64_t e_max_;
  std::vector<std::vector<std::int64_t>> energies_;
  std::vector<std::vector<BigUint>> counts_;
};

/// Throws BoundTooSmall when E_max < N * min energy.
EssTrellis build_trellis(int n, const Alphabet& alphabet, std::int64_t e_max);

/// Sum over stored nodes with i < N of ceil(log2(count + 1)).
BigUint ess_memory_bits(const EssTrellis& trellis);

class EssMatcher final : public DistributionMatcher {
public:
  EssMatcher(EssTrellis trellis, int k);

  const EssTrellis& trellis() const noexcept { return trellis_; }

  DmKind kind() const override { return DmKind::ess; }
  int input_bits() const override { return k_; }
  int block_length() const override { return trellis_.length(); }
  int alphabet_size() const override { return trellis_.alphabet().size(); }
  std::span<const double> symbol_costs() const override { return costs_; }
  double mean_cost() const override;
  std::vector<double> mean_symbol_counts() const override { return mean_counts_; }
  BigUint memory_bits() const override { return ess_memory_bits(trellis_); }
  SymbolSeq encode(const BigUint& index) const override;
  std::optional<BigUint> try_decode(std::span<const Symbol> seq) const override;

  /// Lexicographic rank within the sphere; throws RankOverflow for ranks
  /// >= 2^k and NotInSupport outside the sphere.
  BigUint rank(std::span<const Symbol> seq) const;

private:
  std::optional<BigUint> sphere_rank(std::span<const Symbol> seq) const;
  void compute_mean_counts();

  EssTrellis trellis_;
  int k_;
  std::vector<double> costs_;
  std::vector<double> mean_counts_;
};

/// Smallest E_max whose sphere holds 2^k sequences. Throws Infeasible
/// when 2^k > M^N.
std::shared_ptr<const EssMatcher> ess_build(int n, const Alphabet& alphabet, int k);

} // namespace hidm

#endif // HIDM_ESS_HPP
