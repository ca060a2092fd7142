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

#ifndef HIDM_HIERARCHY_HPP
#define HIDM_HIERARCHY_HPP

// Layered composition of matchers. The DMs of layer l-1 form the virtual
// alphabet of layer l; the top layer holds a single DM.
//
// Bit order: the top DM consumes its k bits first, then every selected
// lower DM consumes its own bits, depth first, blocks left to right.

#include "hidm/core.hpp"

namespace hidm {

struct DisjointReport {
  bool disjoint = true;
  /// How the verdict was reached: "lut-family", "lut-explicit", "composition"
  /// or "exhaustive".
  std::string method;
  int first = -1;
  int second = -1;
  SymbolSeq witness;
};

/// Pairwise support intersection. Throws Unverifiable when no shortcut
/// applies and some support exceeds 2^16 sequences.
DisjointReport verify_disjoint(std::span<const DmPtr> dms);

/// Owner of a block within one layer, with a fast path for layers cut from
/// a single LUT family.
class LayerIndex {
public:
  explicit LayerIndex(std::vector<DmPtr> dms);

  struct Hit {
    int dm = 0;
    BigUint index;
  };

  std::optional<Hit> find(std::span<const Symbol> block) const;

private:
  std::vector<DmPtr> dms_;
  std::vector<int> slice_to_dm_;
};

class HiDm final : public DistributionMatcher {
public:
  /// layers[0] is layer 1 (emits amplitudes). Throws AlphabetMismatch,
  /// BlockLengthMismatch, NotDisjoint or VariableRateUnsupported.
  static std::shared_ptr<const HiDm> build(std::vector<std::vector<DmPtr>> layers, bool check_disjoint = true);

  int layer_count() const noexcept { return int(layers_.size()); }
  /// 1-based.
  const std::vector<DmPtr>& layer(int l) const { return layers_.at(l - 1); }

  std::vector<int> n_vec() const;
  /// Common k per layer; -1 where the DMs of a layer differ.
  std::vector<int> k_vec() const;
  /// Output alphabet size per layer.
  std::vector<int> m_vec() const;
  std::vector<int> num_dms_vec() const;

  Rational rate() const { return Rational(total_bits_, n_total_); }
  int total_bits() const noexcept { return total_bits_; }
  /// Input bits consumed below and including DM j of layer l.
  int subtree_bits(int l, int j) const { return subtree_bits_.at(l - 1).at(j); }
  /// Mean amplitude energy emitted below DM j of layer l.
  double subtree_cost(int l, int j) const { return subtree_cost_.at(l - 1).at(j); }
  std::vector<BigUint> layer_memory_bits() const;

  DmKind kind() const override { return DmKind::hidm; }
  int input_bits() const override { return total_bits_; }
  int block_length() const override { return n_total_; }
  int alphabet_size() const override { return layers_.front().front()->alphabet_size(); }
  std::span<const double> symbol_costs() const override { return costs_; }
  double mean_cost() const override;
  std::vector<double> mean_symbol_counts() const override { return amplitude_counts_; }
  BigUint memory_bits() const override;
  SymbolSeq encode(const BigUint& index) const override;
  std::optional<BigUint> try_decode(std::span<const Symbol> seq) const override;

  /// Throws LengthMismatch, UndecodableBlock(position) or
  /// UndecodableVirtual(layer, position).
  BitWord decode_checked(std::span<const Symbol> seq) const;

  explicit HiDm(std::vector<std::vector<DmPtr>> layers);

private:
  void encode_node(int l, int j, const BitWord& bits, std::size_t& cursor, SymbolSeq& out) const;

  std::vector<std::vector<DmPtr>> layers_;
  std::vector<LayerIndex> indexes_;
  std::vector<std::vector<int>> subtree_bits_;
  std::vector<std::vector<double>> subtree_cost_;
  std::vector<double> costs_;
  std::vector<double> amplitude_counts_;
  int total_bits_ = 0;
  int n_total_ = 1;
};

struct MetricsReport {
  Rational rate;
  double mean_energy_per_symbol = 0.0;
  Distribution amplitude_distribution;
  double rate_loss_mb = 0.0;
  double rate_loss_induced = 0.0;
  BigUint memory_bits;
  /// Per-layer memory for layered matchers, a single entry otherwise.
  std::vector<BigUint> layer_memory_bits;
};

/// Works for any matcher over the amplitude alphabet.
MetricsReport metrics(const DistributionMatcher& dm);

/// LUT Hi-DM with one LUT family per layer. Layer l holds num_dms[l] LUTs
/// (1 at the top) whose costs are the mean energies of the layer below.
std::shared_ptr<const HiDm> build_lut_hidm(int alphabet_size, std::span<const int> n, std::span<const int> k,
                                           std::span<const int> num_dms);

} // namespace hidm

#endif // HIDM_HIERARCHY_HPP
