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

#ifndef HIDM_PPM_HPP
#define HIDM_PPM_HPP

// Pulse-position layers over an ordered base family D_1..D_L.
//
// A level-l block with marker m is N_l level-(l-1) blocks: the slot named
// by log2(N_l) position bits (MSB first, 0-based) carries marker m, every
// other slot carries marker l-1. A level-1 block with marker m is one D_m
// codeword. The structure is the level-L block with marker L; position
// bits precede the sub-blocks, base input bits come last.

#include "hidm/core.hpp"

namespace hidm {

class PpmStructure final : public DistributionMatcher {
public:
  /// base[0] is D_1. positions = (N_2, ..., N_L), so base.size() ==
  /// positions.size() + 1. Throws NotPowerOfTwo, BaseNotOrdered,
  /// InvalidArgument or NotDisjoint.
  PpmStructure(std::vector<DmPtr> base, std::vector<int> positions);

  int levels() const noexcept { return int(base_.size()); }
  const std::vector<DmPtr>& base() const noexcept { return base_; }
  const std::vector<int>& positions() const noexcept { return positions_; }
  Rational rate() const { return Rational(total_bits_, n_total_); }

  DmKind kind() const override { return DmKind::ppm; }
  int input_bits() const override { return total_bits_; }
  int block_length() const override { return n_total_; }
  int alphabet_size() const override { return base_.front()->alphabet_size(); }
  std::span<const double> symbol_costs() const override { return costs_; }
  double mean_cost() const override { return cost_; }
  std::vector<double> mean_symbol_counts() const override { return counts_; }
  BigUint memory_bits() const override;
  SymbolSeq encode(const BigUint& index) const override;
  std::optional<BigUint> try_decode(std::span<const Symbol> seq) const override;

  /// Throws LengthMismatch, UndecodableBlock(position) or
  /// UndecodableVirtual(level, position).
  BitWord decode_checked(std::span<const Symbol> seq) const;

private:
  void encode_block(int level, int marker, const BitWord& bits, std::size_t& cursor, SymbolSeq& out) const;

  std::vector<DmPtr> base_;
  std::vector<int> positions_;
  std::vector<int> position_bits_;
  std::vector<double> costs_;
  std::vector<double> counts_;
  double cost_ = 0.0;
  int total_bits_ = 0;
  int n_total_ = 0;
};

std::shared_ptr<const PpmStructure> ppm_build(std::vector<DmPtr> base, std::vector<int> positions);

/// Mean energy of a whole structure from the base mean energies
/// E_1..E_L, without building the codec.
double ppm_mean_energy(std::span<const double> base_energy, std::span<const int> positions);

/// k_1 * prod N_l + sum_l log2(N_l) * prod_{j>l} N_j.
std::int64_t ppm_total_bits(int k1, std::span<const int> positions);

} // namespace hidm

#endif // HIDM_PPM_HPP
