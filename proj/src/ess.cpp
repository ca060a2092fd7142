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

#include "hidm/ess.hpp"

#include <algorithm>

namespace hidm {

namespace {

const BigUint zero_count = 0;

} // namespace

EssTrellis::EssTrellis(int n, Alphabet alphabet, std::int64_t e_max)
    : n_(n), alphabet_(alphabet), e_max_(e_max) {
  if (n_ < 1)
    throw Error(ErrorCode::InvalidArgument, "ESS block length must be positive");
  const std::int64_t e_min = alphabet_.energy(0);
  if (e_max_ < std::int64_t(n_) * e_min)
    throw Error(ErrorCode::BoundTooSmall, "E_max " + std::to_string(e_max_) + " admits no sequence of length " +
                                              std::to_string(n_));

  // Forward pass: energies reachable after i symbols that can still finish
  // within the bound.
  energies_.assign(n_ + 1, {});
  energies_[0] = {0};
  for (int i = 0; i < n_; ++i) {
    auto& next = energies_[i + 1];
    const std::int64_t tail = std::int64_t(n_ - i - 1) * e_min;
    for (auto e : energies_[i])
      for (int a = 0; a < alphabet_.size(); ++a) {
        const auto ne = e + alphabet_.energy(a);
        if (ne + tail <= e_max_)
          next.push_back(ne);
      }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
  }

  counts_.assign(n_ + 1, {});
  counts_[n_].assign(energies_[n_].size(), BigUint(1));
  for (int i = n_ - 1; i >= 0; --i) {
    counts_[i].assign(energies_[i].size(), BigUint(0));
    for (std::size_t j = 0; j < energies_[i].size(); ++j)
      for (int a = 0; a < alphabet_.size(); ++a)
        counts_[i][j] += count(i + 1, energies_[i][j] + alphabet_.energy(a));
  }
}

const BigUint& EssTrellis::count(int i, std::int64_t e) const {
  if (i < 0 || i > n_)
    return zero_count;
  const auto& es = energies_[i];
  auto it = std::lower_bound(es.begin(), es.end(), e);
  if (it == es.end() || *it != e)
    return zero_count;
  return counts_[i][std::size_t(it - es.begin())];
}

std::size_t EssTrellis::node_count() const {
  std::size_t total = 0;
  for (int i = 0; i < n_; ++i)
    total += energies_[i].size();
  return total;
}

EssTrellis build_trellis(int n, const Alphabet& alphabet, std::int64_t e_max) {
  return EssTrellis(n, alphabet, e_max);
}

BigUint ess_memory_bits(const EssTrellis& trellis) {
  BigUint bits = 0;
  for (int i = 0; i < trellis.length(); ++i)
    for (auto e : trellis.energies(i)) {
      const auto& c = trellis.count(i, e);
      if (c > 0)
        bits += boost::multiprecision::msb(c) + 1;
    }
  return bits;
}

EssMatcher::EssMatcher(EssTrellis trellis, int k)
    : trellis_(std::move(trellis)), k_(k), costs_(trellis_.alphabet().energies()) {
  if (k_ < 0 || support_size() > trellis_.total())
    throw Error(ErrorCode::Infeasible, "sphere holds " + trellis_.total().str() + " sequences, fewer than 2^" +
                                           std::to_string(k_));
  compute_mean_counts();
}

void EssMatcher::compute_mean_counts() {
  const int n = trellis_.length();
  const int m = trellis_.alphabet().size();
  const auto& alpha = trellis_.alphabet();

  // avg[i][j][s]: mean occurrences of s in a uniformly chosen suffix from
  // node (i, energies(i)[j]).
  std::vector<std::vector<std::vector<double>>> avg(n + 1);
  avg[n].assign(trellis_.energies(n).size(), std::vector<double>(m, 0.0));
  for (int i = n - 1; i >= 0; --i) {
    auto es = trellis_.energies(i);
    avg[i].assign(es.size(), std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < es.size(); ++j) {
      const auto& here = trellis_.count(i, es[j]);
      for (int a = 0; a < m; ++a) {
        const auto ne = es[j] + alpha.energy(a);
        const auto& c = trellis_.count(i + 1, ne);
        if (c == 0)
          continue;
        const double w = ratio(c, here);
        auto next = trellis_.energies(i + 1);
        const auto& child = avg[i + 1][std::size_t(std::lower_bound(next.begin(), next.end(), ne) - next.begin())];
        avg[i][j][a] += w;
        for (int s = 0; s < m; ++s)
          avg[i][j][s] += w * child[s];
      }
    }
  }

  // The codebook is the first 2^k sequences of the sphere: whole subtrees
  // hanging left of the path to index 2^k, plus one partial path.
  mean_counts_.assign(m, 0.0);
  const BigUint total = support_size();
  BigUint remaining = total;
  std::vector<int> prefix(m, 0);
  std::int64_t e = 0;
  for (int i = 0; i < n && remaining > 0; ++i) {
    bool descended = false;
    for (int a = 0; a < m && remaining > 0; ++a) {
      const auto ne = e + alpha.energy(a);
      const auto& c = trellis_.count(i + 1, ne);
      if (c == 0)
        continue;
      if (remaining >= c) {
        const double w = ratio(c, total);
        auto next = trellis_.energies(i + 1);
        const auto& child = avg[i + 1][std::size_t(std::lower_bound(next.begin(), next.end(), ne) - next.begin())];
        for (int s = 0; s < m; ++s)
          mean_counts_[s] += w * (prefix[s] + (s == a ? 1.0 : 0.0) + child[s]);
        remaining -= c;
      } else {
        ++prefix[a];
        e = ne;
        descended = true;
        break;
      }
    }
    if (!descended)
      break;
    if (i == n - 1 && remaining > 0) {
      // A single leaf left on the path.
      const double w = ratio(remaining, total);
      for (int s = 0; s < m; ++s)
        mean_counts_[s] += w * prefix[s];
    }
  }
}

double EssMatcher::mean_cost() const {
  double c = 0.0;
  for (std::size_t s = 0; s < mean_counts_.size(); ++s)
    c += mean_counts_[s] * costs_[s];
  return c;
}

SymbolSeq EssMatcher::encode(const BigUint& index) const {
  if (index < 0 || index >= support_size())
    throw Error(ErrorCode::IndexOutOfRange, "index " + index.str() + " >= 2^" + std::to_string(k_));
  const auto& alpha = trellis_.alphabet();
  SymbolSeq out;
  out.reserve(trellis_.length());
  BigUint idx = index;
  std::int64_t e = 0;
  for (int i = 0; i < trellis_.length(); ++i) {
    for (int a = 0; a < alpha.size(); ++a) {
      const auto& c = trellis_.count(i + 1, e + alpha.energy(a));
      if (c == 0)
        continue;
      if (idx < c) {
        out.push_back(Symbol(a));
        e += alpha.energy(a);
        break;
      }
      idx -= c;
    }
  }
  return out;
}

std::optional<BigUint> EssMatcher::sphere_rank(std::span<const Symbol> seq) const {
  const auto& alpha = trellis_.alphabet();
  if (int(seq.size()) != trellis_.length())
    return std::nullopt;
  BigUint rank = 0;
  std::int64_t e = 0;
  for (int i = 0; i < trellis_.length(); ++i) {
    if (int(seq[i]) >= alpha.size())
      return std::nullopt;
    for (int a = 0; a < int(seq[i]); ++a)
      rank += trellis_.count(i + 1, e + alpha.energy(a));
    e += alpha.energy(seq[i]);
    if (trellis_.count(i + 1, e) == 0)
      return std::nullopt;
  }
  return rank;
}

BigUint EssMatcher::rank(std::span<const Symbol> seq) const {
  auto r = sphere_rank(seq);
  if (!r)
    throw Error(ErrorCode::NotInSupport, sequence_to_string(seq) + " lies outside the energy sphere");
  if (*r >= support_size())
    throw Error(ErrorCode::RankOverflow, "rank " + r->str() + " >= 2^" + std::to_string(k_));
  return *r;
}

std::optional<BigUint> EssMatcher::try_decode(std::span<const Symbol> seq) const {
  auto r = sphere_rank(seq);
  if (!r || *r >= support_size())
    return std::nullopt;
  return r;
}

std::shared_ptr<const EssMatcher> ess_build(int n, const Alphabet& alphabet, int k) {
  if (n < 1 || k < 0)
    throw Error(ErrorCode::InvalidArgument, "ESS needs N >= 1 and k >= 0");
  const BigUint needed = BigUint(1) << k;
  if (needed > boost::multiprecision::pow(BigUint(alphabet.size()), unsigned(n)))
    throw Error(ErrorCode::Infeasible, "2^" + std::to_string(k) + " exceeds " + std::to_string(alphabet.size()) +
                                           "^" + std::to_string(n));
  std::int64_t lo = std::int64_t(n) * alphabet.energy(0);
  std::int64_t hi = std::int64_t(n) * alphabet.energy(alphabet.size() - 1);
  while (lo < hi) {
    const auto mid = lo + (hi - lo) / 2;
    if (EssTrellis(n, alphabet, mid).total() >= needed)
      hi = mid;
    else
      lo = mid + 1;
  }
  return std::make_shared<const EssMatcher>(EssTrellis(n, alphabet, lo), k);
}

} // namespace hidm
