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

#ifndef HIDM_LUTDM_HPP
#define HIDM_LUTDM_HPP

// Minimum-cost lookup-table matchers. A family holds the num_luts * 2^k
// cheapest sequences in (cost, lexicographic) order; LUT i is the i-th
// consecutive slice of 2^k entries.

#include <mutex>

#include "hidm/core.hpp"

namespace hidm {

/// The cheapest sequences of a fixed length, ascending by (cost, lex).
/// Cost is the left-to-right floating-point sum of the symbol costs.
struct SortedSequences {
  int length = 0;
  int alphabet_size = 0;
  std::vector<Symbol> symbols;
  std::vector<double> costs;

  std::size_t size() const noexcept { return costs.size(); }
  std::span<const Symbol> operator[](std::size_t i) const {
    return {symbols.data() + i * std::size_t(length), std::size_t(length)};
  }
};

/// Best-first expansion over prefixes; never visits more than O(count * N)
/// prefixes. Throws TooMany when count > M^N.
SortedSequences enumerate_lowest_cost(std::span<const double> costs, int n, std::uint64_t count);

class LutDm;

class LutFamily : public std::enable_shared_from_this<LutFamily> {
public:
  struct Location {
    int lut = 0;
    std::uint64_t index = 0;
  };

  static std::shared_ptr<const LutFamily> build(std::vector<double> costs, int n, int k, int num_luts);
  /// Reuses an enumeration that already holds at least num_luts * 2^k entries.
  static std::shared_ptr<const LutFamily> from_pool(std::shared_ptr<const SortedSequences> pool,
                                                    std::vector<double> costs, int k, int num_luts);

  LutFamily(std::shared_ptr<const SortedSequences> pool, std::vector<double> costs, int k, int num_luts);

  int block_length() const noexcept { return pool_->length; }
  int input_bits() const noexcept { return k_; }
  int num_luts() const noexcept { return num_luts_; }
  int alphabet_size() const noexcept { return int(costs_.size()); }
  std::uint64_t lut_size() const noexcept { return std::uint64_t(1) << k_; }
  std::uint64_t entry_count() const noexcept { return lut_size() * std::uint64_t(num_luts_); }

  std::span<const double> costs() const noexcept { return costs_; }
  std::span<const Symbol> entry(std::uint64_t pos) const { return (*pool_)[pos]; }
  double entry_cost(std::uint64_t pos) const { return pool_->costs[pos]; }
  double slice_mean_cost(int lut) const { return slice_means_.at(lut); }
  const std::vector<double>& slice_mean_counts(int lut) const { return slice_counts_.at(lut); }

  /// Global position of `seq` among the family entries.
  std::optional<std::uint64_t> position_of(std::span<const Symbol> seq) const;
  /// Which LUT holds `seq` and its input index; throws NotInFamily.
  Location locate(std::span<const Symbol> seq) const;

  std::shared_ptr<const LutDm> lut(int i) const;
  std::vector<DmPtr> luts() const;

  /// Encoding tables of every LUT in the family.
  BigUint memory_bits() const;

private:
  void build_index() const;

  std::shared_ptr<const SortedSequences> pool_;
  std::vector<double> costs_;
  int k_;
  int num_luts_;
  std::vector<double> slice_means_;
  std::vector<std::vector<double>> slice_counts_;

  mutable std::once_flag index_once_;
  mutable std::vector<std::uint32_t> lex_index_;
};

std::shared_ptr<const LutFamily> build_lut_family(std::vector<double> costs, int n, int k, int num_luts);

struct LutDecoded {
  int lut = 0;
  BitWord bits;
};

LutDecoded lut_decode(const LutFamily& family, std::span<const Symbol> seq);

class LutDm final : public DistributionMatcher {
public:
  LutDm(std::shared_ptr<const LutFamily> family, int slice);

  const LutFamily& family() const noexcept { return *family_; }
  const std::shared_ptr<const LutFamily>& family_ptr() const noexcept { return family_; }
  int slice() const noexcept { return slice_; }

  DmKind kind() const override { return DmKind::lut; }
  int input_bits() const override { return family_->input_bits(); }
  int block_length() const override { return family_->block_length(); }
  int alphabet_size() const override { return family_->alphabet_size(); }
  std::span<const double> symbol_costs() const override { return family_->costs(); }
  double mean_cost() const override { return family_->slice_mean_cost(slice_); }
  std::vector<double> mean_symbol_counts() const override { return family_->slice_mean_counts(slice_); }
  BigUint memory_bits() const override;
  SymbolSeq encode(const BigUint& index) const override;
  std::optional<BigUint> try_decode(std::span<const Symbol> seq) const override;

private:
  std::shared_ptr<const LutFamily> family_;
  int slice_;
};

struct LutLayerShape {
  std::uint64_t num_luts = 1;
  int k = 0;
  int n = 1;
  std::uint64_t alphabet_size = 1;
};

/// Sum over layers of num_luts * 2^k * N * ceil(log2 alphabet_size).
BigUint lut_memory_bits(std::span<const LutLayerShape> layers);

} // namespace hidm

#endif // HIDM_LUTDM_HPP
