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

#include "hidm/ccdm.hpp"

#include <algorithm>
#include <cmath>

namespace hidm {

int Composition::length() const {
  int n = 0;
  for (int c : counts)
    n += c;
  return n;
}

double Composition::total_cost(std::span<const double> costs) const {
  double t = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    t += counts[i] * costs[i];
  return t;
}

Composition composition_of(std::span<const Symbol> seq, int alphabet_size) {
  Composition c{std::vector<int>(alphabet_size, 0)};
  for (auto s : seq) {
    if (int(s) >= alphabet_size)
      throw Error(ErrorCode::CompositionMismatch, "symbol " + std::to_string(s) + " outside alphabet");
    ++c.counts[s];
  }
  return c;
}

namespace {

void check_composition(const Composition& c) {
  if (c.counts.empty())
    throw Error(ErrorCode::InvalidArgument, "empty composition");
  for (int x : c.counts)
    if (x < 0)
      throw Error(ErrorCode::InvalidArgument, "negative count in composition");
  if (c.length() < 1)
    throw Error(ErrorCode::InvalidArgument, "composition must have N >= 1");
}

} // namespace

BigUint multinomial(const Composition& c) {
  check_composition(c);
  // Built as a product of binomials C(n_1+..+n_j, n_j); every partial
  // quotient is an integer.
  BigUint result = 1;
  int placed = 0;
  for (int count : c.counts) {
    for (int i = 1; i <= count; ++i) {
      ++placed;
      result *= placed;
      result /= i;
    }
  }
  return result;
}

BigUint lex_rank(const Composition& c, std::span<const Symbol> seq) {
  check_composition(c);
  if (int(seq.size()) != c.length() || composition_of(seq, c.alphabet_size()) != c)
    throw Error(ErrorCode::CompositionMismatch,
                sequence_to_string(seq) + " does not have the requested composition");
  std::vector<int> rest = c.counts;
  int remaining = c.length();
  BigUint current = multinomial(c);
  BigUint rank = 0;
  for (auto sym : seq) {
    for (Symbol s = 0; s < sym; ++s)
      if (rest[s] > 0)
        rank += current * rest[s] / remaining;
    current = current * rest[sym] / remaining;
    --rest[sym];
    --remaining;
  }
  return rank;
}

SymbolSeq lex_unrank(const Composition& c, const BigUint& index) {
  check_composition(c);
  BigUint current = multinomial(c);
  if (index < 0 || index >= current)
    throw Error(ErrorCode::IndexOutOfRange, "index " + index.str() + " >= " + current.str());
  std::vector<int> rest = c.counts;
  int remaining = c.length();
  BigUint idx = index;
  SymbolSeq out;
  out.reserve(remaining);
  while (remaining > 0) {
    for (std::size_t s = 0; s < rest.size(); ++s) {
      if (rest[s] == 0)
        continue;
      BigUint block = current * rest[s] / remaining;
      if (idx < block) {
        out.push_back(Symbol(s));
        current = std::move(block);
        --rest[s];
        break;
      }
      idx -= block;
    }
    --remaining;
  }
  return out;
}

SymbolSeq cc_unrank(const Composition& c, const BigUint& index) {
  const int k = floor_log2(multinomial(c));
  if (index < 0 || index >= (BigUint(1) << k))
    throw Error(ErrorCode::IndexOutOfRange, "index " + index.str() + " >= 2^" + std::to_string(k));
  return lex_unrank(c, index);
}

BigUint cc_rank(const Composition& c, std::span<const Symbol> seq) {
  BigUint rank = lex_rank(c, seq);
  const int k = floor_log2(multinomial(c));
  if (rank >= (BigUint(1) << k))
    throw Error(ErrorCode::RankOverflow, "rank " + rank.str() + " >= 2^" + std::to_string(k));
  return rank;
}

void for_each_composition(int n, int m, const std::function<void(const Composition&)>& fn) {
  if (n < 0 || m < 1)
    throw Error(ErrorCode::InvalidArgument, "compositions need n >= 0 and m >= 1");
  Composition c{std::vector<int>(m, 0)};
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == m - 1) {
      c.counts[pos] = left;
      fn(c);
      return;
    }
    for (int x = 0; x <= left; ++x) {
      c.counts[pos] = x;
      rec(pos + 1, left - x);
    }
  };
  rec(0, n);
}

std::vector<RankedComposition> feasible_compositions(int n, std::span<const double> costs, int min_k) {
  std::vector<RankedComposition> out;
  for_each_composition(n, int(costs.size()), [&](const Composition& c) {
    const int k = floor_log2(multinomial(c));
    if (k >= min_k)
      out.push_back({c, k, c.total_cost(costs)});
  });
  std::stable_sort(out.begin(), out.end(), [](const RankedComposition& a, const RankedComposition& b) {
    if (a.cost != b.cost)
      return a.cost < b.cost;
    return a.composition < b.composition;
  });
  return out;
}

Composition optimize_composition(int n, const Alphabet& alphabet, Rational target_rate,
                                 CompositionObjective objective) {
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "block length must be positive");
  if (target_rate < 0 || to_double(target_rate) > std::log2(double(alphabet.size())) + 1e-12)
    throw Error(ErrorCode::Infeasible, "target rate " + to_string(target_rate) + " exceeds log2(M)");
  const Rational needed = target_rate * Rational(n);
  const std::int64_t min_k = (needed.numerator() + needed.denominator() - 1) / needed.denominator();
  const auto costs = alphabet.energies();
  auto feasible = feasible_compositions(n, costs, int(min_k));
  if (feasible.empty())
    throw Error(ErrorCode::Infeasible, "no composition of length " + std::to_string(n) + " carries " +
                                           std::to_string(min_k) + " bits");
  if (objective == CompositionObjective::min_energy_at_rate)
    return feasible.front().composition;

  const RankedComposition* best = nullptr;
  double best_loss = 0.0;
  for (const auto& rc : feasible) {
    const double loss =
        rate_loss(rc.cost / n, Rational(rc.k, n), alphabet, LossMode::mb_same_energy);
    if (!best || loss < best_loss || (loss == best_loss && rc.composition < best->composition)) {
      best = &rc;
      best_loss = loss;
    }
  }
  return best->composition;
}

CcdmMatcher::CcdmMatcher(Composition composition, std::vector<double> costs)
    : composition_(std::move(composition)), costs_(std::move(costs)) {
  check_composition(composition_);
  if (costs_.size() != composition_.counts.size())
    throw Error(ErrorCode::AlphabetMismatch, "cost vector and composition differ in alphabet size");
  k_ = floor_log2(multinomial(composition_));
  mean_cost_ = composition_.total_cost(costs_);
}

std::vector<double> CcdmMatcher::mean_symbol_counts() const {
  return {composition_.counts.begin(), composition_.counts.end()};
}

BigUint CcdmMatcher::memory_bits() const {
  return BigUint(alphabet_size()) * ceil_log2(std::uint64_t(block_length()) + 1);
}

SymbolSeq CcdmMatcher::encode(const BigUint& index) const {
  if (index < 0 || index >= support_size())
    throw Error(ErrorCode::IndexOutOfRange, "index " + index.str() + " >= 2^" + std::to_string(k_));
  return lex_unrank(composition_, index);
}

std::optional<BigUint> CcdmMatcher::try_decode(std::span<const Symbol> seq) const {
  if (int(seq.size()) != block_length())
    return std::nullopt;
  for (auto s : seq)
    if (int(s) >= alphabet_size())
      return std::nullopt;
  if (composition_of(seq, alphabet_size()) != composition_)
    return std::nullopt;
  BigUint rank = lex_rank(composition_, seq);
  if (rank >= support_size())
    return std::nullopt;
  return rank;
}

std::shared_ptr<const CcdmMatcher> make_ccdm(Composition composition, const Alphabet& alphabet) {
  if (composition.alphabet_size() != alphabet.size())
    throw Error(ErrorCode::AlphabetMismatch, "composition has " + std::to_string(composition.alphabet_size()) +
                                                 " counts for an alphabet of " + std::to_string(alphabet.size()));
  return std::make_shared<const CcdmMatcher>(std::move(composition), alphabet.energies());
}

} // namespace hidm
