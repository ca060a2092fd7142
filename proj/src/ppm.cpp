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

#include "hidm/ppm.hpp"

#include <bit>
#include <limits>

#include "hidm/hierarchy.hpp"

namespace hidm {

namespace {

int position_bits(int n) {
  if (n < 2 || !std::has_single_bit(unsigned(n)))
    throw Error(ErrorCode::NotPowerOfTwo, "position count " + std::to_string(n) + " is not a power of two >= 2");
  return std::countr_zero(unsigned(n));
}

} // namespace

std::int64_t ppm_total_bits(int k1, std::span<const int> positions) {
  std::int64_t bits = k1;
  for (int n : positions)
    bits = bits * n + position_bits(n);
  return bits;
}

double ppm_mean_energy(std::span<const double> base_energy, std::span<const int> positions) {
  if (base_energy.size() != positions.size() + 1)
    throw Error(ErrorCode::InvalidArgument, "need one base energy per level");
  // e[m]: level-l block with marker m, for markers m >= l.
  std::vector<double> e(base_energy.begin(), base_energy.end());
  for (std::size_t l = 1; l < e.size(); ++l) {
    const double fill = e[l - 1] * double(positions[l - 1] - 1);
    for (std::size_t m = l; m < e.size(); ++m)
      e[m] += fill;
  }
  return e.back();
}

PpmStructure::PpmStructure(std::vector<DmPtr> base, std::vector<int> positions)
    : base_(std::move(base)), positions_(std::move(positions)) {
  if (base_.empty() || base_.size() != positions_.size() + 1)
    throw Error(ErrorCode::InvalidArgument, "PPM needs L base DMs and L-1 position counts");
  for (int n : positions_)
    position_bits_.push_back(position_bits(n));
  const auto& d1 = *base_.front();
  for (std::size_t m = 0; m < base_.size(); ++m) {
    const auto& dm = *base_[m];
    if (dm.input_bits() != d1.input_bits() || dm.block_length() != d1.block_length() ||
        dm.alphabet_size() != d1.alphabet_size())
      throw Error(ErrorCode::InvalidArgument, "PPM base DMs must share k, N and alphabet");
    if (m > 0 && dm.mean_cost() < base_[m - 1]->mean_cost())
      throw Error(ErrorCode::BaseNotOrdered, "D_" + std::to_string(m + 1) + " is cheaper than D_" + std::to_string(m));
  }
  if (auto report = verify_disjoint(base_); !report.disjoint)
    throw Error(ErrorCode::NotDisjoint, "base DMs " + std::to_string(report.first + 1) + " and " +
                                            std::to_string(report.second + 1) + " share " +
                                            sequence_to_string(report.witness));

  const std::int64_t bits = ppm_total_bits(d1.input_bits(), positions_);
  std::int64_t n_total = d1.block_length();
  for (int n : positions_)
    n_total *= n;
  if (bits > std::numeric_limits<int>::max() || n_total > std::numeric_limits<int>::max())
    throw Error(ErrorCode::InvalidArgument, "PPM structure too large");
  total_bits_ = int(bits);
  n_total_ = int(n_total);

  const Alphabet alphabet(d1.alphabet_size());
  costs_ = alphabet.energies();
  std::vector<std::vector<double>> c;
  for (const auto& dm : base_)
    c.push_back(dm->mean_symbol_counts());
  for (std::size_t l = 1; l < c.size(); ++l) {
    const auto fill = c[l - 1];
    for (std::size_t m = l; m < c.size(); ++m)
      for (std::size_t s = 0; s < fill.size(); ++s)
        c[m][s] += fill[s] * double(positions_[l - 1] - 1);
  }
  counts_ = c.back();
  for (std::size_t s = 0; s < counts_.size(); ++s)
    cost_ += counts_[s] * costs_[s];
}

BigUint PpmStructure::memory_bits() const {
  BigUint total = 0;
  for (const auto& dm : base_)
    total += dm->memory_bits();
  return total;
}

void PpmStructure::encode_block(int level, int marker, const BitWord& bits, std::size_t& cursor,
                                SymbolSeq& out) const {
  auto read = [&](int k) {
    BigUint v = 0;
    for (int i = 0; i < k; ++i) {
      v <<= 1;
      if (bits.bits[cursor++])
        v |= 1;
    }
    return v;
  };
  if (level == 1) {
    const auto& dm = *base_[marker - 1];
    const auto seq = dm.encode(read(dm.input_bits()));
    out.insert(out.end(), seq.begin(), seq.end());
    return;
  }
  const int slot = int(read(position_bits_[level - 2]));
  for (int t = 0; t < positions_[level - 2]; ++t)
    encode_block(level - 1, t == slot ? marker : level - 1, bits, cursor, out);
}

SymbolSeq PpmStructure::encode(const BigUint& index) const {
  if (index < 0 || index >= support_size())
    throw Error(ErrorCode::IndexOutOfRange, "index exceeds 2^" + std::to_string(total_bits_));
  const auto bits = BitWord::from_value(index, std::size_t(total_bits_));
  SymbolSeq out;
  out.reserve(n_total_);
  std::size_t cursor = 0;
  encode_block(levels(), levels(), bits, cursor, out);
  return out;
}

BitWord PpmStructure::decode_checked(std::span<const Symbol> seq) const {
  if (int(seq.size()) != n_total_)
    throw Error(ErrorCode::LengthMismatch,
                "expected " + std::to_string(n_total_) + " symbols, got " + std::to_string(seq.size()));
  const std::size_t n1 = std::size_t(base_.front()->block_length());
  const std::size_t blocks = seq.size() / n1;
  const LayerIndex index(base_);

  std::vector<BigUint> inputs(blocks);
  std::vector<int> markers(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    auto hit = index.find(seq.subspan(b * n1, n1));
    if (!hit)
      throw Error(ErrorCode::UndecodableBlock, "block " + std::to_string(b) + " belongs to no base DM", 1,
                  std::int64_t(b));
    markers[b] = hit->dm + 1;
    inputs[b] = std::move(hit->index);
  }

  // slots[l][b]: variant position inside block b of level l + 2.
  std::vector<std::vector<int>> slots(positions_.size());
  for (int level = 2; level <= levels(); ++level) {
    const int n = positions_[level - 2];
    std::vector<int> up(markers.size() / std::size_t(n));
    auto& slot = slots[level - 2];
    slot.assign(up.size(), -1);
    for (std::size_t b = 0; b < up.size(); ++b) {
      for (int t = 0; t < n; ++t) {
        const int m = markers[b * n + t];
        if (m >= level && slot[b] < 0) {
          slot[b] = t;
          up[b] = m;
        } else if (m != level - 1) {
          slot[b] = -2;
          break;
        }
      }
      if (slot[b] < 0)
        throw Error(ErrorCode::UndecodableVirtual,
                    "level-" + std::to_string(level) + " block " + std::to_string(b) + " has no unique variant", level,
                    std::int64_t(b));
    }
    markers = std::move(up);
  }

  BitWord out;
  out.bits.reserve(std::size_t(total_bits_));
  auto put = [&](const BigUint& v, int k) {
    for (int i = k - 1; i >= 0; --i)
      out.bits.push_back(boost::multiprecision::bit_test(v, unsigned(i)) ? 1 : 0);
  };
  auto emit = [&](auto&& self, int level, std::size_t b) -> void {
    if (level == 1) {
      put(inputs[b], base_.front()->input_bits());
      return;
    }
    put(BigUint(slots[level - 2][b]), position_bits_[level - 2]);
    const std::size_t n = std::size_t(positions_[level - 2]);
    for (std::size_t t = 0; t < n; ++t)
      self(self, level - 1, b * n + t);
  };
  emit(emit, levels(), 0);
  return out;
}

std::optional<BigUint> PpmStructure::try_decode(std::span<const Symbol> seq) const {
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

std::shared_ptr<const PpmStructure> ppm_build(std::vector<DmPtr> base, std::vector<int> positions) {
  return std::make_shared<const PpmStructure>(std::move(base), std::move(positions));
}

} // namespace hidm
