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

#ifndef HIDM_TESTS_ORACLES_HPP
#define HIDM_TESTS_ORACLES_HPP

// Brute-force reference computations shared by the test binaries. Nothing
// here calls into the code under test except through the public
// DistributionMatcher interface.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hidm/core.hpp"

namespace oracle {

using hidm::Symbol;
using hidm::SymbolSeq;

/// All m^n sequences in lexicographic order.
inline std::vector<SymbolSeq> all_sequences(int n, int m) {
  std::vector<SymbolSeq> out;
  SymbolSeq s(std::size_t(n), 0);
  while (true) {
    out.push_back(s);
    int i = n - 1;
    while (i >= 0 && s[std::size_t(i)] == m - 1)
      s[std::size_t(i--)] = 0;
    if (i < 0)
      break;
    ++s[std::size_t(i)];
  }
  return out;
}

/// Left-to-right floating-point sum, the ordering key of the LUT builder.
inline double seq_cost(const SymbolSeq& s, const std::vector<double>& costs) {
  double c = 0.0;
  for (Symbol x : s)
    c += costs[x];
  return c;
}

inline std::int64_t seq_energy(const SymbolSeq& s) {
  std::int64_t e = 0;
  for (Symbol x : s)
    e += std::int64_t(2 * x + 1) * (2 * x + 1);
  return e;
}

/// Every sequence sorted by (cost, lexicographic).
inline std::vector<SymbolSeq> sorted_by_cost(int n, const std::vector<double>& costs) {
  auto all = all_sequences(n, int(costs.size()));
  std::stable_sort(all.begin(), all.end(),
                   [&](const SymbolSeq& a, const SymbolSeq& b) { return seq_cost(a, costs) < seq_cost(b, costs); });
  return all;
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Exhaustive {
  bool injective = true;
  bool roundtrip = true;
  std::set<SymbolSeq> image;
  double mean_cost = 0.0;
  std::vector<double> mean_counts;
};

/// Encodes every input of a matcher with 2^k small enough to enumerate.
inline Exhaustive exhaust(const hidm::DistributionMatcher& dm) {
  Exhaustive r;
  const std::uint64_t size = std::uint64_t(1) << dm.input_bits();
  r.mean_counts.assign(std::size_t(dm.alphabet_size()), 0.0);
  const auto costs = dm.symbol_costs();
  long double total = 0.0L;
  for (std::uint64_t i = 0; i < size; ++i) {
    const auto seq = dm.encode(hidm::BigUint(i));
    if (!r.image.insert(seq).second)
      r.injective = false;
    const auto back = dm.try_decode(seq);
    if (!back || *back != hidm::BigUint(i))
      r.roundtrip = false;
    for (Symbol x : seq) {
      total += costs[x];
      r.mean_counts[x] += 1.0;
    }
  }
  r.mean_cost = double(total / (long double)size);
  for (auto& c : r.mean_counts)
    c /= double(size);
  return r;
}

/// Exhaustive roundtrip plus a check that nothing outside the image
/// decodes, over every sequence of the output space.
inline bool support_is_exact(const hidm::DistributionMatcher& dm, const Exhaustive& ex) {
  for (const auto& s : all_sequences(dm.block_length(), dm.alphabet_size()))
    if (dm.contains(s) != (ex.image.count(s) > 0))
      return false;
  return true;
}

/// Random k-bit indices, fixed seed.
inline std::vector<hidm::BigUint> random_indices(int k, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<hidm::BigUint> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    hidm::BigUint v = 0;
    for (int b = 0; b < k; ++b) {
      v <<= 1;
      if (rng() >> 63)
        v |= 1;
    }
    out.push_back(v);
  }
  return out;
}

} // namespace oracle

#endif // HIDM_TESTS_ORACLES_HPP
