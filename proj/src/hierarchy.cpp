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

#include "hidm/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hidm/ccdm.hpp"
#include "hidm/lutdm.hpp"

namespace hidm {

namespace {

constexpr std::uint64_t exhaustive_support_limit = std::uint64_t(1) << 16;

const LutDm* as_lut(const DmPtr& dm) { return dynamic_cast<const LutDm*>(dm.get()); }
const CcdmMatcher* as_ccdm(const DmPtr& dm) { return dynamic_cast<const CcdmMatcher*>(dm.get()); }

BigUint read_bits(const BitWord& bits, std::size_t& cursor, int k) {
  BigUint v = 0;
  for (int i = 0; i < k; ++i) {
    v <<= 1;
    if (bits.bits[cursor++])
      v |= 1;
  }
  return v;
}

void write_bits(const BigUint& value, int k, BitWord& out) {
  for (int i = k - 1; i >= 0; --i)
    out.bits.push_back(boost::multiprecision::bit_test(value, unsigned(i)) ? 1 : 0);
}

// Intersection of the supports of a and b, if any, with the method used.
std::optional<SymbolSeq> intersect(const DmPtr& a, const DmPtr& b, std::string& method) {
  if (a->block_length() != b->block_length()) {
    method = "length";
    return std::nullopt;
  }
  const auto* la = as_lut(a);
  const auto* lb = as_lut(b);
  if (la && lb && la->family_ptr() == lb->family_ptr()) {
    method = "lut-family";
    if (la->slice() != lb->slice())
      return std::nullopt;
    return a->encode(0);
  }
  const auto* ca = as_ccdm(a);
  const auto* cb = as_ccdm(b);
  if (ca && cb) {
    method = "composition";
    if (ca->composition() != cb->composition())
      return std::nullopt;
    return a->encode(0);
  }
  // Walk the explicitly stored or the smaller support.
  const DmPtr* walk = &a;
  const DmPtr* probe = &b;
  if (lb && !la)
    std::swap(walk, probe);
  if (la || lb) {
    method = "lut-explicit";
  } else {
    method = "exhaustive";
    if (a->input_bits() > b->input_bits())
      std::swap(walk, probe);
    if ((*walk)->support_size() > exhaustive_support_limit)
      throw Error(ErrorCode::Unverifiable, "supports of 2^" + std::to_string((*walk)->input_bits()) +
                                               " sequences are too large to compare");
  }
  const BigUint size = (*walk)->support_size();
  for (BigUint i = 0; i < size; ++i) {
    auto seq = (*walk)->encode(i);
    if ((*probe)->contains(seq))
      return seq;
  }
  return std::nullopt;
}

} // namespace

DisjointReport verify_disjoint(std::span<const DmPtr> dms) {
  DisjointReport report;
  std::set<std::string> methods;
  for (std::size_t i = 0; i < dms.size(); ++i)
    for (std::size_t j = i + 1; j < dms.size(); ++j) {
      std::string method;
      auto witness = intersect(dms[i], dms[j], method);
      methods.insert(method);
      if (witness) {
        report.disjoint = false;
        report.method = method;
        report.first = int(i);
        report.second = int(j);
        report.witness = std::move(*witness);
        return report;
      }
    }
  for (const auto& m : methods)
    report.method += (report.method.empty() ? "" : "+") + m;
  if (report.method.empty())
    report.method = "trivial";
  return report;
}

LayerIndex::LayerIndex(std::vector<DmPtr> dms) : dms_(std::move(dms)) {
  const auto* first = dms_.empty() ? nullptr : as_lut(dms_.front());
  if (!first)
    return;
  for (const auto& dm : dms_) {
    const auto* lut = as_lut(dm);
    if (!lut || lut->family_ptr() != first->family_ptr())
      return;
  }
  slice_to_dm_.assign(first->family().num_luts(), -1);
  for (std::size_t j = 0; j < dms_.size(); ++j) {
    auto& slot = slice_to_dm_[as_lut(dms_[j])->slice()];
    if (slot < 0)
      slot = int(j);
  }
}

std::optional<LayerIndex::Hit> LayerIndex::find(std::span<const Symbol> block) const {
  if (!slice_to_dm_.empty()) {
    const auto& family = as_lut(dms_.front())->family();
    auto pos = family.position_of(block);
    if (!pos)
      return std::nullopt;
    const std::uint64_t slice = *pos >> family.input_bits();
    const int dm = slice_to_dm_[slice];
    if (dm < 0)
      return std::nullopt;
    return Hit{dm, BigUint(*pos - (slice << family.input_bits()))};
  }
  for (std::size_t j = 0; j < dms_.size(); ++j)
    if (auto idx = dms_[j]->try_decode(block))
      return Hit{int(j), std::move(*idx)};
  return std::nullopt;
}

HiDm::HiDm(std::vector<std::vector<DmPtr>> layers) : layers_(std::move(layers)) {
  if (layers_.empty())
    throw Error(ErrorCode::InvalidArgument, "a hierarchy needs at least one layer");
  if (layers_.back().size() != 1)
    throw Error(ErrorCode::InvalidArgument, "the top layer must hold exactly one DM", layer_count());
  for (int l = 1; l <= layer_count(); ++l) {
    const auto& dms = layer(l);
    if (dms.empty())
      throw Error(ErrorCode::InvalidArgument, "layer " + std::to_string(l) + " is empty", l);
    const int n = dms.front()->block_length();
    const int m = l == 1 ? dms.front()->alphabet_size() : int(layer(l - 1).size());
    for (const auto& dm : dms) {
      if (!dm)
        throw Error(ErrorCode::InvalidArgument, "null DM in layer " + std::to_string(l), l);
      if (dm->block_length() != n)
        throw Error(ErrorCode::BlockLengthMismatch, "DMs of layer " + std::to_string(l) + " differ in N", l);
      if (dm->alphabet_size() != m)
        throw Error(ErrorCode::AlphabetMismatch,
                    "layer " + std::to_string(l) + " DM has alphabet " + std::to_string(dm->alphabet_size()) +
                        ", expected " + std::to_string(m),
                    l);
    }
    if (std::int64_t(n_total_) * n > std::numeric_limits<int>::max())
      throw Error(ErrorCode::InvalidArgument, "total block length overflows");
    n_total_ *= n;
  }

  const Alphabet alphabet(alphabet_size());
  costs_ = alphabet.energies();
  std::vector<std::vector<std::vector<double>>> amp(layer_count());
  subtree_bits_.resize(layer_count());
  subtree_cost_.resize(layer_count());
  for (int l = 1; l <= layer_count(); ++l) {
    for (const auto& dm : layer(l)) {
      const auto counts = dm->mean_symbol_counts();
      std::vector<double> a(alphabet.size(), 0.0);
      double cost = 0.0;
      std::int64_t bits = dm->input_bits();
      if (l == 1) {
        for (int s = 0; s < alphabet.size(); ++s) {
          a[s] = counts[s];
          cost += counts[s] * costs_[s];
        }
      } else {
        const auto& below = subtree_bits_[l - 2];
        const bool uniform = std::all_of(below.begin(), below.end(), [&](int b) { return b == below.front(); });
        if (uniform) {
          bits += std::int64_t(below.front()) * dm->block_length();
        } else if (const auto* cc = as_ccdm(dm)) {
          for (std::size_t s = 0; s < below.size(); ++s)
            bits += std::int64_t(cc->composition().counts[s]) * below[s];
        } else {
          throw Error(ErrorCode::VariableRateUnsupported,
                      "layer " + std::to_string(l - 1) +
                          " DMs carry different bit counts and layer " + std::to_string(l) +
                          " is not constant-composition",
                      l);
        }
        for (std::size_t s = 0; s < counts.size(); ++s) {
          cost += counts[s] * subtree_cost_[l - 2][s];
          for (int t = 0; t < alphabet.size(); ++t)
            a[t] += counts[s] * amp[l - 2][s][t];
        }
      }
      if (bits > std::numeric_limits<int>::max())
        throw Error(ErrorCode::InvalidArgument, "total input bits overflow");
      subtree_bits_[l - 1].push_back(int(bits));
      subtree_cost_[l - 1].push_back(cost);
      amp[l - 1].push_back(std::move(a));
    }
  }
  total_bits_ = subtree_bits_.back().front();
  amplitude_counts_ = amp.back().front();
  for (const auto& dms : layers_)
    indexes_.emplace_back(dms);
}

std::shared_ptr<const HiDm> HiDm::build(std::vector<std::vector<DmPtr>> layers, bool check_disjoint) {
  auto dm = std::make_shared<const HiDm>(std::move(layers));
  if (check_disjoint)
    for (int l = 1; l <= dm->layer_count(); ++l) {
      auto report = verify_disjoint(dm->layer(l));
      if (!report.disjoint)
        throw Error(ErrorCode::NotDisjoint,
                    "layer " + std::to_string(l) + " DMs " + std::to_string(report.first) + " and " +
                        std::to_string(report.second) + " share " + sequence_to_string(report.witness),
                    l);
    }
  return dm;
}

std::vector<int> HiDm::n_vec() const {
  std::vector<int> out;
  for (const auto& dms : layers_)
    out.push_back(dms.front()->block_length());
  return out;
}

std::vector<int> HiDm::k_vec() const {
  std::vector<int> out;
  for (const auto& dms : layers_) {
    int k = dms.front()->input_bits();
    for (const auto& dm : dms)
      if (dm->input_bits() != k)
        k = -1;
    out.push_back(k);
  }
  return out;
}

std::vector<int> HiDm::m_vec() const {
  std::vector<int> out;
  for (const auto& dms : layers_)
    out.push_back(dms.front()->alphabet_size());
  return out;
}

std::vector<int> HiDm::num_dms_vec() const {
  std::vector<int> out;
  for (const auto& dms : layers_)
    out.push_back(int(dms.size()));
  return out;
}

std::vector<BigUint> HiDm::layer_memory_bits() const {
  std::vector<BigUint> out;
  for (const auto& dms : layers_) {
    BigUint bits = 0;
    for (const auto& dm : dms)
      bits += dm->memory_bits();
    out.push_back(bits);
  }
  return out;
}

BigUint HiDm::memory_bits() const {
  BigUint total = 0;
  for (const auto& b : layer_memory_bits())
    total += b;
  return total;
}

double HiDm::mean_cost() const { return subtree_cost_.back().front(); }

void HiDm::encode_node(int l, int j, const BitWord& bits, std::size_t& cursor, SymbolSeq& out) const {
  const auto& dm = layer(l)[j];
  const auto seq = dm->encode(read_bits(bits, cursor, dm->input_bits()));
  if (l == 1) {
    out.insert(out.end(), seq.begin(), seq.end());
    return;
  }
  for (auto s : seq)
    encode_node(l - 1, s, bits, cursor, out);
}

SymbolSeq HiDm::encode(const BigUint& index) const {
  if (index < 0 || index >= support_size())
    throw Error(ErrorCode::IndexOutOfRange, "index exceeds 2^" + std::to_string(total_bits_));
  const auto bits = BitWord::from_value(index, std::size_t(total_bits_));
  SymbolSeq out;
  out.reserve(n_total_);
  std::size_t cursor = 0;
  encode_node(layer_count(), 0, bits, cursor, out);
  return out;
}

BitWord HiDm::decode_checked(std::span<const Symbol> seq) const {
  if (int(seq.size()) != n_total_)
    throw Error(ErrorCode::LengthMismatch,
                "expected " + std::to_string(n_total_) + " symbols, got " + std::to_string(seq.size()));
  std::vector<std::vector<LayerIndex::Hit>> hits(layer_count());
  SymbolSeq current(seq.begin(), seq.end());
  for (int l = 1; l <= layer_count(); ++l) {
    const std::size_t n = std::size_t(layer(l).front()->block_length());
    const std::size_t blocks = current.size() / n;
    SymbolSeq next(blocks);
    hits[l - 1].reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
      auto hit = indexes_[l - 1].find(std::span<const Symbol>(current).subspan(b * n, n));
      if (!hit) {
        if (l == 1)
          throw Error(ErrorCode::UndecodableBlock, "block " + std::to_string(b) + " belongs to no layer-1 DM", 1,
                      std::int64_t(b));
        throw Error(ErrorCode::UndecodableVirtual,
                    "virtual block " + std::to_string(b) + " of layer " + std::to_string(l) + " is not a codeword", l,
                    std::int64_t(b));
      }
      next[b] = Symbol(hit->dm);
      hits[l - 1].push_back(std::move(*hit));
    }
    current = std::move(next);
  }

  BitWord out;
  out.bits.reserve(std::size_t(total_bits_));
  auto emit = [&](auto&& self, int l, std::size_t b) -> void {
    const auto& hit = hits[l - 1][b];
    write_bits(hit.index, layer(l)[hit.dm]->input_bits(), out);
    if (l == 1)
      return;
    const std::size_t n = std::size_t(layer(l).front()->block_length());
    for (std::size_t t = 0; t < n; ++t)
      self(self, l - 1, b * n + t);
  };
  emit(emit, layer_count(), 0);
  return out;
}

std::optional<BigUint> HiDm::try_decode(std::span<const Symbol> seq) const {
  try {
    return decode_checked(seq).value();
  } catch (const Error& e) {
    switch (e.code()) {
    case ErrorCode::LengthMismatch:
    case ErrorCode::UndecodableBlock:
    case ErrorCode::UndecodableVirtual:
      return std::nullopt;
    default:
      throw;
    }
  }
}

MetricsReport metrics(const DistributionMatcher& dm) {
  const Alphabet alphabet(dm.alphabet_size());
  const auto energies = alphabet.energies();
  const auto counts = dm.mean_symbol_counts();
  const double n = dm.block_length();

  MetricsReport r;
  r.rate = Rational(dm.input_bits(), dm.block_length());
  r.amplitude_distribution.resize(counts.size());
  for (std::size_t s = 0; s < counts.size(); ++s) {
    r.amplitude_distribution[s] = counts[s] / n;
    r.mean_energy_per_symbol += counts[s] * energies[s];
  }
  r.mean_energy_per_symbol /= n;
  try {
    r.rate_loss_mb = rate_loss(r.mean_energy_per_symbol, r.rate, alphabet, LossMode::mb_same_energy);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TargetOutOfRange)
      throw;
    r.rate_loss_mb = std::numeric_limits<double>::quiet_NaN();
  }
  r.rate_loss_induced = rate_loss(r.mean_energy_per_symbol, r.rate, alphabet, LossMode::induced,
                                  &r.amplitude_distribution);
  if (const auto* h = dynamic_cast<const HiDm*>(&dm)) {
    r.layer_memory_bits = h->layer_memory_bits();
    r.memory_bits = h->memory_bits();
  } else {
    r.memory_bits = dm.memory_bits();
    r.layer_memory_bits = {r.memory_bits};
  }
  return r;
}

std::shared_ptr<const HiDm> build_lut_hidm(int alphabet_size, std::span<const int> n, std::span<const int> k,
                                           std::span<const int> num_dms) {
  const std::size_t layers = n.size();
  if (layers == 0 || k.size() != layers || num_dms.size() != layers)
    throw Error(ErrorCode::InvalidArgument, "N, k and num_dms vectors must have the same positive length");
  if (num_dms.back() != 1)
    throw Error(ErrorCode::InvalidArgument, "the top layer holds a single LUT");
  std::vector<double> costs = Alphabet(alphabet_size).energies();
  std::vector<std::vector<DmPtr>> stack;
  for (std::size_t l = 0; l < layers; ++l) {
    auto family = build_lut_family(costs, n[l], k[l], num_dms[l]);
    stack.push_back(family->luts());
    costs.assign(num_dms[l], 0.0);
    for (int j = 0; j < num_dms[l]; ++j)
      costs[j] = family->slice_mean_cost(j);
  }
  return HiDm::build(std::move(stack));
}

} // namespace hidm
