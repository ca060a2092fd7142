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

#ifndef HIDM_CCDM_HPP
#define HIDM_CCDM_HPP

// Constant-composition matching by exact lexicographic ranking of
// multiset permutations.

#include <functional>

#include "hidm/core.hpp"

namespace hidm {

struct Composition {
  std::vector<int> counts;

  int length() const;
  int alphabet_size() const { return int(counts.size()); }
  double total_cost(std::span<const double> costs) const;

  friend bool operator==(const Composition&, const Composition&) = default;
  friend auto operator<=>(const Composition&, const Composition&) = default;
};

Composition composition_of(std::span<const Symbol> seq, int alphabet_size);

/// N! / prod(counts!)
BigUint multinomial(const Composition& c);

/// Rank of `seq` among all permutations of c in lexicographic order.
BigUint lex_rank(const Composition& c, std::span<const Symbol> seq);
/// Inverse of lex_rank on [0, multinomial(c)).
SymbolSeq lex_unrank(const Composition& c, const BigUint& index);

/// Encoder view: index must be below 2^k, k = floor(log2 multinomial).
SymbolSeq cc_unrank(const Composition& c, const BigUint& index);
/// Decoder view: throws CompositionMismatch or RankOverflow (rank >= 2^k).
BigUint cc_rank(const Composition& c, std::span<const Symbol> seq);

/// Calls `fn` on every composition of n over m symbols in lexicographic order.
void for_each_composition(int n, int m, const std::function<void(const Composition&)>& fn);

struct RankedComposition {
  Composition composition;
  int k = 0;
  double cost = 0.0;
};

/// Every composition with floor(log2 multinomial) >= min_k, ordered by
/// (total cost, counts).
std::vector<RankedComposition> feasible_compositions(int n, std::span<const double> costs, int min_k);

enum class CompositionObjective { min_energy_at_rate, min_rate_loss_at_rate };

/// Exhaustive search; the rate requirement is k >= ceil(N * target_rate).
Composition optimize_composition(int n, const Alphabet& alphabet, Rational target_rate,
                                 CompositionObjective objective = CompositionObjective::min_energy_at_rate);

class CcdmMatcher final : public DistributionMatcher {
public:
  CcdmMatcher(Composition composition, std::vector<double> costs);

  const Composition& composition() const noexcept { return composition_; }

  DmKind kind() const override { return DmKind::ccdm; }
  int input_bits() const override { return k_; }
  int block_length() const override { return composition_.length(); }
  int alphabet_size() const override { return composition_.alphabet_size(); }
  std::span<const double> symbol_costs() const override { return costs_; }
  double mean_cost() const override { return mean_cost_; }
  std::vector<double> mean_symbol_counts() const override;
  /// One count per symbol, ceil(log2(N+1)) bits each.
  BigUint memory_bits() const override;
  SymbolSeq encode(const BigUint& index) const override;
  std::optional<BigUint> try_decode(std::span<const Symbol> seq) const override;

private:
  Composition composition_;
  std::vector<double> costs_;
  int k_;
  double mean_cost_;
};

std::shared_ptr<const CcdmMatcher> make_ccdm(Composition composition, const Alphabet& alphabet);

} // namespace hidm

#endif // HIDM_CCDM_HPP
