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

#include "hidm/lutdm.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <queue>

namespace hidm {

namespace {

// A node is a prefix of `depth` fixed symbols. Its key is the cheapest
// completion (remaining positions filled with the cheapest symbol), which
// is also the lexicographically smallest among equally cheap completions.
// Keys are computed as left-to-right sums, so a child's key is never below
// its parent's and siblings come out in (cost, lex) order.
class PrefixEnumerator {
public:
  PrefixEnumerator(std::span<const double> costs, int n)
      : costs_(costs.begin(), costs.end()), n_(n), order_(costs.size()) {
    std::iota(order_.begin(), order_.end(), Symbol(0));
    std::stable_sort(order_.begin(), order_.end(),
                     [&](Symbol a, Symbol b) { return costs_[a] < costs_[b]; });
    const auto m = unsigned(costs_.size());
    width_ = std::max(1, int(std::bit_width(m - 1)));
    per_word_ = 64 / width_;
    words_ = (n_ + per_word_ - 1) / per_word_;
  }

  SortedSequences run(std::uint64_t count) {
    SortedSequences out;
    out.length = n_;
    out.alphabet_size = int(costs_.size());
    out.costs.reserve(count);
    out.symbols.reserve(count * std::size_t(n_));

    auto cmp = [this](const Node& a, const Node& b) {
      if (a.key != b.key)
        return a.key > b.key;
      const std::uint64_t* wa = arena_.data() + std::size_t(a.slot) * words_;
      const std::uint64_t* wb = arena_.data() + std::size_t(b.slot) * words_;
      for (int i = 0; i < words_; ++i)
        if (wa[i] != wb[i])
          return wa[i] > wb[i];
      return a.depth < b.depth;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);

    const Symbol cheapest = order_[0];
    {
      const auto slot = allocate();
      for (int j = 0; j < n_; ++j)
        set(slot, j, cheapest);
      double key = 0.0;
      for (int j = 0; j < n_; ++j)
        key += costs_[cheapest];
      heap.push(Node{key, 0.0, slot, 0, 0});
    }

    while (out.size() < count) {
      const Node node = heap.top();
      heap.pop();
      if (node.depth > 0 && std::size_t(node.rank) + 1 < order_.size()) {
        const auto slot = allocate();
        std::copy_n(arena_.data() + std::size_t(node.slot) * words_, words_,
                    arena_.data() + std::size_t(slot) * words_);
        const Symbol next = order_[node.rank + 1];
        set(slot, node.depth - 1, next);
        heap.push(Node{completion_key(node.base + costs_[next], node.depth), node.base, slot, node.depth,
                       std::uint16_t(node.rank + 1)});
      }
      if (node.depth == n_) {
        for (int j = 0; j < n_; ++j)
          out.symbols.push_back(get(node.slot, j));
        out.costs.push_back(node.key);
        free_.push_back(node.slot);
        continue;
      }
      const double prefix =
          node.depth == 0 ? 0.0 : node.base + costs_[get(node.slot, node.depth - 1)];
      heap.push(Node{node.key, prefix, node.slot, std::uint16_t(node.depth + 1), 0});
    }
    return out;
  }

private:
  struct Node {
    double key;
    double base; // cost of the first depth-1 symbols
    std::uint32_t slot;
    std::uint16_t depth;
    std::uint16_t rank; // cost rank of the symbol at depth-1
  };

  std::uint32_t allocate() {
    if (!free_.empty()) {
      auto s = free_.back();
      free_.pop_back();
      return s;
    }
    const auto s = std::uint32_t(arena_.size() / std::size_t(words_));
    arena_.resize(arena_.size() + std::size_t(words_), 0);
    return s;
  }

  void set(std::uint32_t slot, int pos, Symbol s) {
    auto& w = arena_[std::size_t(slot) * words_ + std::size_t(pos / per_word_)];
    const int shift = 64 - width_ * (pos % per_word_ + 1);
    const std::uint64_t mask = ((std::uint64_t(1) << width_) - 1) << shift;
    w = (w & ~mask) | (std::uint64_t(s) << shift);
  }

  Symbol get(std::uint32_t slot, int pos) const {
    const auto w = arena_[std::size_t(slot) * words_ + std::size_t(pos / per_word_)];
    const int shift = 64 - width_ * (pos % per_word_ + 1);
    return Symbol((w >> shift) & ((std::uint64_t(1) << width_) - 1));
  }

  double completion_key(double prefix, int depth) const {
    double key = prefix;
    const double c = costs_[order_[0]];
    for (int j = depth; j < n_; ++j)
      key += c;
    return key;
  }

  std::vector<double> costs_;
  int n_;
  std::vector<Symbol> order_;
  int width_ = 1;
  int per_word_ = 64;
  int words_ = 1;
  std::vector<std::uint64_t> arena_;
  std::vector<std::uint32_t> free_;
};

} // namespace

SortedSequences enumerate_lowest_cost(std::span<const double> costs, int n, std::uint64_t count) {
  if (costs.empty() || costs.size() > 65536)
    throw Error(ErrorCode::InvalidArgument, "cost vector size must be in [1, 65536]");
  if (n < 1 || n > 65535)
    throw Error(ErrorCode::InvalidArgument, "sequence length must be in [1, 65535]");
  for (double c : costs)
    if (!(c >= 0.0))
      throw Error(ErrorCode::InvalidArgument, "costs must be nonnegative");
  if (count > saturating_pow(costs.size(), n))
    throw Error(ErrorCode::TooMany, "requested " + std::to_string(count) + " sequences, only " +
                                        std::to_string(costs.size()) + "^" + std::to_string(n) + " exist");
  if (count * std::uint64_t(n) > (std::uint64_t(1) << 32))
    throw Error(ErrorCode::TooMany, "refusing to materialize " + std::to_string(count) + " sequences");
  if (count == 0)
    return SortedSequences{n, int(costs.size()), {}, {}};
  return PrefixEnumerator(costs, n).run(count);
}

std::shared_ptr<const LutFamily> LutFamily::build(std::vector<double> costs, int n, int k, int num_luts) {
  if (k < 0 || k > 40 || num_luts < 1)
    throw Error(ErrorCode::InvalidArgument, "LUT family needs 0 <= k <= 40 and num_luts >= 1");
  const std::uint64_t total = std::uint64_t(num_luts) << k;
  auto pool = std::make_shared<const SortedSequences>(enumerate_lowest_cost(costs, n, total));
  return std::make_shared<const LutFamily>(std::move(pool), std::move(costs), k, num_luts);
}

std::shared_ptr<const LutFamily> LutFamily::from_pool(std::shared_ptr<const SortedSequences> pool,
                                                      std::vector<double> costs, int k, int num_luts) {
  return std::make_shared<const LutFamily>(std::move(pool), std::move(costs), k, num_luts);
}

LutFamily::LutFamily(std::shared_ptr<const SortedSequences> pool, std::vector<double> costs, int k,
                     int num_luts)
    : pool_(std::move(pool)), costs_(std::move(costs)), k_(k), num_luts_(num_luts) {
  if (k_ < 0 || k_ > 40 || num_luts_ < 1)
    throw Error(ErrorCode::InvalidArgument, "LUT family needs 0 <= k <= 40 and num_luts >= 1");
  if (int(costs_.size()) != pool_->alphabet_size)
    throw Error(ErrorCode::AlphabetMismatch, "cost vector does not match the enumerated alphabet");
  if (pool_->size() < entry_count())
    throw Error(ErrorCode::TooMany, "enumeration holds " + std::to_string(pool_->size()) + " sequences, need " +
                                        std::to_string(entry_count()));
  const std::uint64_t per = lut_size();
  slice_means_.resize(num_luts_);
  slice_counts_.assign(num_luts_, std::vector<double>(costs_.size(), 0.0));
  for (int i = 0; i < num_luts_; ++i) {
    double sum = 0.0;
    std::vector<std::uint64_t> counts(costs_.size(), 0);
    for (std::uint64_t p = std::uint64_t(i) * per; p < std::uint64_t(i + 1) * per; ++p) {
      sum += pool_->costs[p];
      for (auto s : (*pool_)[p])
        ++counts[s];
    }
    slice_means_[i] = sum / double(per);
    for (std::size_t s = 0; s < costs_.size(); ++s)
      slice_counts_[i][s] = double(counts[s]) / double(per);
  }
}

void LutFamily::build_index() const {
  std::call_once(index_once_, [this] {
    lex_index_.resize(entry_count());
    std::iota(lex_index_.begin(), lex_index_.end(), std::uint32_t(0));
    std::sort(lex_index_.begin(), lex_index_.end(), [this](std::uint32_t a, std::uint32_t b) {
      auto x = entry(a), y = entry(b);
      return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
    });
  });
}

std::optional<std::uint64_t> LutFamily::position_of(std::span<const Symbol> seq) const {
  if (int(seq.size()) != block_length())
    return std::nullopt;
  build_index();
  auto it = std::lower_bound(lex_index_.begin(), lex_index_.end(), seq, [this](std::uint32_t p, auto s) {
    auto x = entry(p);
    return std::lexicographical_compare(x.begin(), x.end(), s.begin(), s.end());
  });
  if (it == lex_index_.end())
    return std::nullopt;
  auto x = entry(*it);
  if (!std::equal(x.begin(), x.end(), seq.begin(), seq.end()))
    return std::nullopt;
  return *it;
}

LutFamily::Location LutFamily::locate(std::span<const Symbol> seq) const {
  auto pos = position_of(seq);
  if (!pos)
    throw Error(ErrorCode::NotInFamily, sequence_to_string(seq) + " is not in the family");
  return {int(*pos >> k_), *pos & (lut_size() - 1)};
}

std::shared_ptr<const LutDm> LutFamily::lut(int i) const {
  if (i < 0 || i >= num_luts_)
    throw Error(ErrorCode::IndexOutOfRange, "LUT " + std::to_string(i) + " of " + std::to_string(num_luts_));
  return std::make_shared<const LutDm>(shared_from_this(), i);
}

std::vector<DmPtr> LutFamily::luts() const {
  std::vector<DmPtr> out;
  for (int i = 0; i < num_luts_; ++i)
    out.push_back(lut(i));
  return out;
}

BigUint LutFamily::memory_bits() const {
  const LutLayerShape shape{std::uint64_t(num_luts_), k_, block_length(), std::uint64_t(alphabet_size())};
  return lut_memory_bits(std::span(&shape, 1));
}

std::shared_ptr<const LutFamily> build_lut_family(std::vector<double> costs, int n, int k, int num_luts) {
  return LutFamily::build(std::move(costs), n, k, num_luts);
}

LutDecoded lut_decode(const LutFamily& family, std::span<const Symbol> seq) {
  auto loc = family.locate(seq);
  return {loc.lut, BitWord::from_value(BigUint(loc.index), std::size_t(family.input_bits()))};
}

LutDm::LutDm(std::shared_ptr<const LutFamily> family, int slice) : family_(std::move(family)), slice_(slice) {
  if (slice_ < 0 || slice_ >= family_->num_luts())
    throw Error(ErrorCode::IndexOutOfRange, "LUT slice out of range");
}

BigUint LutDm::memory_bits() const {
  const LutLayerShape shape{1, input_bits(), block_length(), std::uint64_t(alphabet_size())};
  return lut_memory_bits(std::span(&shape, 1));
}

SymbolSeq LutDm::encode(const BigUint& index) const {
  if (index < 0 || index >= support_size())
    throw Error(ErrorCode::IndexOutOfRange, "index " + index.str() + " >= 2^" + std::to_string(input_bits()));
  const auto pos = (std::uint64_t(slice_) << input_bits()) + index.convert_to<std::uint64_t>();
  auto e = family_->entry(pos);
  return {e.begin(), e.end()};
}

std::optional<BigUint> LutDm::try_decode(std::span<const Symbol> seq) const {
  auto pos = family_->position_of(seq);
  if (!pos || int(*pos >> input_bits()) != slice_)
    return std::nullopt;
  return BigUint(*pos & (family_->lut_size() - 1));
}

BigUint lut_memory_bits(std::span<const LutLayerShape> layers) {
  BigUint total = 0;
  for (const auto& l : layers) {
    if (l.alphabet_size == 0 || l.k < 0 || l.n < 0)
      throw Error(ErrorCode::InvalidArgument, "invalid LUT layer shape");
    total += (BigUint(l.num_luts) << l.k) * l.n * ceil_log2(l.alphabet_size);
  }
  return total;
}

} // namespace hidm
