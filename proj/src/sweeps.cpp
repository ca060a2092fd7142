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

#include "hidm/sweeps.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "hidm/ess.hpp"
#include "hidm/lutdm.hpp"

namespace hidm {

namespace {

std::int64_t product(std::span<const int> v) {
  std::int64_t p = 1;
  for (int x : v)
    p *= x;
  return p;
}

double loss_mb(double mean_energy, Rational rate, const Alphabet& alphabet) {
  try {
    return rate_loss(mean_energy, rate, alphabet, LossMode::mb_same_energy);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TargetOutOfRange)
      throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

void fill_losses(SweepRecord& r, const Alphabet& alphabet, const Distribution& dist) {
  r.rate_loss_mb = loss_mb(r.mean_energy, r.rate, alphabet);
  r.rate_loss_induced = rate_loss(r.mean_energy, r.rate, alphabet, LossMode::induced, &dist);
}

bool rational_less(const SweepRecord& a, const SweepRecord& b) {
  if (a.layers != b.layers)
    return a.layers < b.layers;
  if (a.rate != b.rate)
    return a.rate < b.rate;
  if (a.memory_bits != b.memory_bits)
    return a.memory_bits < b.memory_bits;
  return std::tie(a.kind, a.n_vec, a.k_vec, a.m_vec, a.num_dms_vec, a.outer.counts) <
         std::tie(b.kind, b.n_vec, b.k_vec, b.m_vec, b.num_dms_vec, b.outer.counts);
}

std::int64_t ceil_mul(Rational r, int n) {
  const Rational x = r * Rational(n);
  return (x.numerator() + x.denominator() - 1) / x.denominator();
}

} // namespace

std::int64_t SweepRecord::total_length() const { return product(n_vec); }

std::int64_t SweepRecord::total_bits() const {
  const Rational k = rate * Rational(total_length());
  return k.numerator() / k.denominator();
}

void sort_records(std::vector<SweepRecord>& records) {
  std::stable_sort(records.begin(), records.end(), rational_less);
}

std::vector<SweepRecord> pareto_frontier(std::span<const SweepRecord> records) {
  std::vector<const SweepRecord*> order;
  for (const auto& r : records)
    if (!std::isnan(r.rate_loss_mb))
      order.push_back(&r);
  std::stable_sort(order.begin(), order.end(), [](const SweepRecord* a, const SweepRecord* b) {
    if (a->memory_bits != b->memory_bits)
      return a->memory_bits < b->memory_bits;
    if (a->rate_loss_mb != b->rate_loss_mb)
      return a->rate_loss_mb < b->rate_loss_mb;
    return rational_less(*a, *b);
  });
  std::vector<SweepRecord> out;
  for (const auto* r : order)
    if (out.empty() || r->rate_loss_mb < out.back().rate_loss_mb)
      out.push_back(*r);
  return out;
}

// ---- CCDM two-layer cloud ----

std::vector<Rational> rate_grid(Rational lo, Rational hi, int n) {
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "rate grid needs at least one point");
  if (n == 1)
    return {lo};
  std::vector<Rational> out;
  for (int i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo) * Rational(i, n - 1));
  return out;
}

std::vector<Composition> select_inner_compositions(int n1, const Alphabet& alphabet, int num_inner, Rational target,
                                                   std::span<const Rational> grid) {
  if (num_inner < 1)
    throw Error(ErrorCode::InvalidArgument, "need at least one inner DM");
  if (int(grid.size()) < num_inner - 1)
    throw Error(ErrorCode::InvalidArgument, "inner rate grid has " + std::to_string(grid.size()) +
                                                " points for " + std::to_string(num_inner - 1) + " DMs");
  std::vector<Composition> out{optimize_composition(n1, alphabet, target)};
  const auto costs = alphabet.energies();
  const auto all = feasible_compositions(n1, costs, 0);
  int k_max = 0;
  for (const auto& rc : all)
    k_max = std::max(k_max, rc.k);
  std::set<Composition> taken{out.front()};
  for (int i = 0; i + 1 < num_inner; ++i) {
    // Short blocks may run out of distinct compositions at the asked rate;
    // relax the requirement one bit at a time.
    auto it = all.end();
    for (auto need = std::min<std::int64_t>(ceil_mul(grid[i], n1), k_max); need >= 0 && it == all.end(); --need)
      it = std::find_if(all.begin(), all.end(),
                        [&](const RankedComposition& rc) { return rc.k >= need && !taken.count(rc.composition); });
    if (it == all.end())
      throw Error(ErrorCode::Infeasible, "only " + std::to_string(taken.size()) + " distinct compositions exist");
    taken.insert(it->composition);
    out.push_back(it->composition);
  }
  return out;
}

std::vector<SweepRecord> sweep_ccdm_2layer(int n1, const Alphabet& alphabet, int num_inner, int n2,
                                           Rational target, std::span<const Rational> inner_grid) {
  if (n2 < 1)
    throw Error(ErrorCode::InvalidArgument, "outer block length must be positive");
  const auto inner = select_inner_compositions(n1, alphabet, num_inner, target, inner_grid);
  const auto costs = alphabet.energies();
  const int m = alphabet.size();

  std::vector<int> k(num_inner);
  std::vector<double> e(num_inner);
  BigUint inner_memory = 0;
  std::vector<SweepRecord> out;
  for (int j = 0; j < num_inner; ++j) {
    const CcdmMatcher dm(inner[j], costs);
    k[j] = dm.input_bits();
    e[j] = dm.mean_cost();
    inner_memory += dm.memory_bits();

    SweepRecord r;
    r.kind = "ccdm";
    r.layers = 1;
    r.n_vec = {n1};
    r.k_vec = {k[j]};
    r.m_vec = {m};
    r.num_dms_vec = {1};
    r.rate = Rational(k[j], n1);
    r.mean_energy = e[j] / n1;
    r.memory_bits = dm.memory_bits();
    r.best = j == 0;
    r.inner = {inner[j]};
    Distribution dist(m);
    for (int s = 0; s < m; ++s)
      dist[s] = double(inner[j].counts[s]) / n1;
    fill_losses(r, alphabet, dist);
    out.push_back(std::move(r));
  }

  const BigUint outer_memory = BigUint(num_inner) * ceil_log2(std::uint64_t(n2) + 1);
  const std::int64_t n_total = std::int64_t(n1) * n2;
  std::optional<std::size_t> best;
  for_each_composition(n2, num_inner, [&](const Composition& outer) {
    const int k_outer = floor_log2(multinomial(outer));
    std::int64_t bits = k_outer;
    double energy = 0.0;
    std::vector<double> counts(m, 0.0);
    for (int j = 0; j < num_inner; ++j) {
      bits += std::int64_t(outer.counts[j]) * k[j];
      energy += outer.counts[j] * e[j];
      for (int s = 0; s < m; ++s)
        counts[s] += double(outer.counts[j]) * inner[j].counts[s];
    }
    SweepRecord r;
    r.kind = "ccdm2";
    r.layers = 2;
    r.n_vec = {n1, n2};
    r.k_vec = {k[0], k_outer};
    r.m_vec = {m, num_inner};
    r.num_dms_vec = {num_inner, 1};
    r.rate = Rational(bits, n_total);
    r.mean_energy = energy / double(n_total);
    r.memory_bits = inner_memory + outer_memory;
    r.inner = inner;
    r.outer = outer;
    Distribution dist(m);
    for (int s = 0; s < m; ++s)
      dist[s] = counts[s] / double(n_total);
    fill_losses(r, alphabet, dist);
    if (r.rate >= target && !std::isnan(r.rate_loss_mb) &&
        (!best || r.rate_loss_mb < out[*best].rate_loss_mb))
      best = out.size();
    out.push_back(std::move(r));
  });
  if (best)
    out[*best].best = true;
  return out;
}

std::shared_ptr<const HiDm> build_ccdm2(std::span<const Composition> inner, const Composition& outer,
                                        const Alphabet& alphabet) {
  std::vector<DmPtr> layer1;
  std::vector<double> virtual_costs;
  for (const auto& c : inner) {
    auto dm = make_ccdm(c, alphabet);
    virtual_costs.push_back(dm->mean_cost());
    layer1.push_back(std::move(dm));
  }
  DmPtr top = std::make_shared<const CcdmMatcher>(outer, std::move(virtual_costs));
  return HiDm::build({std::move(layer1), {std::move(top)}});
}

// ---- PPM ----

std::vector<SweepRecord> sweep_ppm(int n1, const Alphabet& alphabet, std::span<const int> k1_range, int l_max,
                                   std::span<const int> position_grid, int cap_ntot) {
  if (l_max < 1)
    throw Error(ErrorCode::InvalidArgument, "PPM sweep needs l_max >= 1");
  for (int n : position_grid)
    if (n < 2 || (n & (n - 1)) != 0)
      throw Error(ErrorCode::NotPowerOfTwo, "position count " + std::to_string(n) + " is not a power of two >= 2");
  const auto costs = alphabet.energies();
  const int m = alphabet.size();
  const std::uint64_t space = saturating_pow(std::uint64_t(m), n1);

  std::uint64_t need = 0;
  for (int k1 : k1_range) {
    if (k1 < 0 || k1 > 40)
      throw Error(ErrorCode::InvalidArgument, "k1 out of range");
    const std::uint64_t per = std::uint64_t(1) << k1;
    if (per <= space)
      need = std::max(need, std::min(space / per, std::uint64_t(l_max)) * per);
  }
  if (need == 0)
    return {};
  auto pool = std::make_shared<const SortedSequences>(enumerate_lowest_cost(costs, n1, need));

  std::vector<SweepRecord> out;
  for (int k1 : k1_range) {
    const std::uint64_t per = std::uint64_t(1) << k1;
    if (per > space)
      continue;
    const int levels = int(std::min(space / per, std::uint64_t(l_max)));
    auto family = LutFamily::from_pool(pool, costs, k1, levels);
    std::vector<std::vector<double>> base;
    for (int j = 0; j < levels; ++j)
      base.push_back(family->slice_mean_counts(j));

    for (int l = 1; l <= levels; ++l) {
      const std::size_t first = out.size();
      std::vector<int> positions;
      auto emit = [&] {
        // Same recursion as PpmStructure so re-evaluation matches bit for bit.
        std::vector<std::vector<double>> c(base.begin(), base.begin() + l);
        for (std::size_t lv = 1; lv < c.size(); ++lv) {
          const auto fill = c[lv - 1];
          for (std::size_t mk = lv; mk < c.size(); ++mk)
            for (int s = 0; s < m; ++s)
              c[mk][s] += fill[s] * double(positions[lv - 1] - 1);
        }
        const auto& counts = c.back();
        const std::int64_t n_total = std::int64_t(n1) * product(positions);
        double cost = 0.0;
        for (int s = 0; s < m; ++s)
          cost += counts[s] * costs[s];

        SweepRecord r;
        r.kind = "ppm";
        r.layers = l;
        r.n_vec = {n1};
        r.k_vec = {k1};
        r.m_vec = {m};
        r.num_dms_vec = {l};
        for (int n : positions) {
          r.n_vec.push_back(n);
          r.k_vec.push_back(std::countr_zero(unsigned(n)));
          r.m_vec.push_back(2);
          r.num_dms_vec.push_back(1);
        }
        r.rate = Rational(ppm_total_bits(k1, positions), n_total);
        r.mean_energy = cost / double(n_total);
        r.memory_bits = BigUint(l) * per * std::uint64_t(n1) * std::uint64_t(ceil_log2(std::uint64_t(m)));
        Distribution dist(m);
        for (int s = 0; s < m; ++s)
          dist[s] = counts[s] / double(n_total);
        fill_losses(r, alphabet, dist);
        out.push_back(std::move(r));
      };
      auto rec = [&](auto&& self, std::int64_t prod) -> void {
        if (int(positions.size()) == l - 1) {
          emit();
          return;
        }
        for (int n : position_grid)
          if (prod * n <= cap_ntot) {
            positions.push_back(n);
            self(self, prod * n);
            positions.pop_back();
          }
      };
      rec(rec, 1);
      std::size_t best = out.size();
      for (std::size_t i = first; i < out.size(); ++i)
        if (!std::isnan(out[i].rate_loss_mb) && (best == out.size() || out[i].rate_loss_mb < out[best].rate_loss_mb))
          best = i;
      if (best < out.size())
        out[best].best = true;
    }
  }
  return out;
}

// ---- LUT Hi-DM search ----

namespace {

std::vector<std::vector<int>> factorizations(int n, int parts) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int left, int remaining) -> void {
    if (remaining == 1) {
      if (left >= 2) {
        cur.push_back(left);
        out.push_back(cur);
        cur.pop_back();
      }
      return;
    }
    for (int f = 2; f <= left; ++f)
      if (left % f == 0) {
        cur.push_back(f);
        self(self, left / f, remaining - 1);
        cur.pop_back();
      }
  };
  if (parts >= 1)
    rec(rec, n, parts);
  return out;
}

// The t cheapest length-n sums in ascending order, built one position at a
// time from the t cheapest prefixes. Values are left-to-right sums, so the
// sorted list equals the costs of the matching LUT family entry for entry;
// amp rows (symbol usage per entry) may differ from the family where costs
// tie.
struct LowestSums {
  std::vector<double> cost;
  std::vector<double> amp;
};

LowestSums lowest_sums(const std::vector<double>& costs, const std::vector<std::vector<double>>& amp, int n,
                       std::uint64_t t, std::size_t width) {
  const std::size_t m = costs.size();
  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) { return costs[x] < costs[y]; });

  LowestSums cur;
  for (std::size_t r = 0; r < m && r < t; ++r) {
    cur.cost.push_back(0.0 + costs[order[r]]);
    cur.amp.insert(cur.amp.end(), amp[order[r]].begin(), amp[order[r]].end());
  }
  using Item = std::tuple<double, std::uint32_t, std::uint32_t>;
  for (int j = 1; j < n; ++j) {
    const std::uint64_t have = cur.cost.size();
    const std::uint64_t size = have > t / m ? t : std::min<std::uint64_t>(t, have * m);
    LowestSums next;
    next.cost.reserve(size);
    next.amp.reserve(size * width);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::uint32_t r = 0; r < m; ++r)
      heap.emplace(cur.cost[0] + costs[order[r]], 0u, r);
    while (next.cost.size() < size) {
      const auto [v, i, r] = heap.top();
      heap.pop();
      next.cost.push_back(v);
      const auto& add = amp[order[r]];
      for (std::size_t x = 0; x < width; ++x)
        next.amp.push_back(cur.amp[std::size_t(i) * width + x] + add[x]);
      if (i + 1 < have)
        heap.emplace(cur.cost[i + 1] + costs[order[r]], i + 1, r);
    }
    cur = std::move(next);
  }
  return cur;
}

class LutSearch {
public:
  using Slots = std::map<std::pair<int, std::uint64_t>, std::size_t>;

  LutSearch(const LutSearchOptions& options, const Alphabet& alphabet, std::int64_t n_total, std::int64_t k_total,
            LutSearchResult& result, Slots& slots)
      : opt_(options), alphabet_(alphabet), n_total_(n_total), k_total_(k_total), result_(result), slots_(slots) {}

  void run(std::vector<int> ns) {
    ns_ = std::move(ns);
    suffix_.assign(ns_.size() + 1, 1);
    for (int l = int(ns_.size()) - 1; l >= 0; --l)
      suffix_[l] = suffix_[l + 1] * ns_[l];
    ks_.clear();
    ds_.clear();
    build_floor();
    const int a = alphabet_.size();
    std::vector<std::vector<double>> amp(a, std::vector<double>(a, 0.0));
    for (int s = 0; s < a; ++s)
      amp[s][s] = 1.0;
    descend(0, alphabet_.energies(), amp, 0, k_total_);
  }

private:
  // floor_[l][b]: fewest table bits layers l.. can use while carrying b
  // more bits, assuming the smallest LUT counts and 1-bit symbols.
  void build_floor() {
    const std::size_t layers = ns_.size();
    const std::uint64_t over = opt_.memory_cap + 1;
    const int widest = *std::max_element(opt_.dm_grid.begin(), opt_.dm_grid.end());
    const int fewest = *std::min_element(opt_.dm_grid.begin(), opt_.dm_grid.end());
    floor_.assign(layers + 1, std::vector<std::uint64_t>(std::size_t(k_total_) + 1, over));
    floor_[layers][0] = 0;
    for (std::size_t l = layers; l-- > 0;) {
      const std::uint64_t alphabet = l == 0 ? std::uint64_t(alphabet_.size()) : std::uint64_t(widest);
      const std::uint64_t dms = l + 1 == layers ? 1 : std::uint64_t(fewest);
      const std::uint64_t space = saturating_pow(alphabet, ns_[l]);
      for (std::int64_t b = 0; b <= k_total_; ++b)
        for (int k = 0; k <= opt_.k_max && std::int64_t(k) * suffix_[l + 1] <= b; ++k) {
          if ((dms << k) > space)
            break;
          const std::uint64_t rest = floor_[l + 1][std::size_t(b - std::int64_t(k) * suffix_[l + 1])];
          const std::uint64_t here = (dms << k) * std::uint64_t(ns_[l]);
          floor_[l][std::size_t(b)] = std::min(floor_[l][std::size_t(b)], std::min(over, rest + here));
        }
    }
  }

  void descend(std::size_t l, const std::vector<double>& costs, const std::vector<std::vector<double>>& amp,
               std::uint64_t memory, std::int64_t k_left) {
    const int n = ns_[l];
    const std::uint64_t m = costs.size();
    const std::uint64_t width = std::uint64_t(ceil_log2(m));
    const std::uint64_t space = saturating_pow(m, n);
    const std::int64_t below = suffix_[l + 1];
    const std::uint64_t budget = opt_.memory_cap - memory;
    auto table_bits = [&](std::uint64_t entries) -> std::uint64_t {
      if (width == 0)
        return 0;
      const std::uint64_t per_entry = std::uint64_t(n) * width;
      return entries > budget / per_entry ? std::numeric_limits<std::uint64_t>::max() : entries * per_entry;
    };

    if (l + 1 == ns_.size()) {
      if (k_left > opt_.k_max)
        return;
      const std::uint64_t t = std::uint64_t(1) << k_left;
      if (t > space || table_bits(t) > budget)
        return;
      ++result_.candidates;
      const auto seqs = lowest_sums(costs, amp, n, t, std::size_t(alphabet_.size()));
      ks_.push_back(int(k_left));
      ds_.push_back(1);
      std::vector<double> mean_cost, slice_amp;
      slices(seqs, int(k_left), 1, mean_cost, slice_amp);
      record(mean_cost[0], slice_amp, memory + table_bits(t));
      ks_.pop_back();
      ds_.pop_back();
      return;
    }

    struct Option {
      int d;
      int k;
      std::uint64_t entries;
    };
    std::vector<Option> options;
    std::uint64_t most = 0;
    for (int d : opt_.dm_grid)
      for (int k = 0; k <= opt_.k_max && std::int64_t(k) * below <= k_left; ++k) {
        const std::uint64_t t = std::uint64_t(d) << k;
        if (t > space || table_bits(t) > budget)
          break;
        const std::uint64_t rest = floor_[l + 1][std::size_t(k_left - std::int64_t(k) * below)];
        if (rest > budget - table_bits(t))
          continue;
        options.push_back({d, k, t});
        most = std::max(most, t);
      }
    if (options.empty())
      return;
    const auto seqs = lowest_sums(costs, amp, n, most, std::size_t(alphabet_.size()));
    for (const auto& o : options) {
      std::vector<double> next_costs, next_amp_flat;
      slices(seqs, o.k, o.d, next_costs, next_amp_flat);
      const std::size_t a = std::size_t(alphabet_.size());
      std::vector<std::vector<double>> next_amp(o.d);
      for (int j = 0; j < o.d; ++j)
        next_amp[j].assign(next_amp_flat.begin() + j * a, next_amp_flat.begin() + (j + 1) * a);
      ks_.push_back(o.k);
      ds_.push_back(o.d);
      descend(l + 1, next_costs, next_amp, memory + table_bits(o.entries), k_left - std::int64_t(o.k) * below);
      ks_.pop_back();
      ds_.pop_back();
    }
  }

  // Slice means accumulated in table order, as LutFamily does.
  void slices(const LowestSums& seqs, int k, int d, std::vector<double>& mean_cost,
              std::vector<double>& mean_amp) const {
    const std::uint64_t per = std::uint64_t(1) << k;
    const std::size_t a = std::size_t(alphabet_.size());
    mean_cost.assign(d, 0.0);
    mean_amp.assign(std::size_t(d) * a, 0.0);
    for (int j = 0; j < d; ++j) {
      double sum = 0.0;
      for (std::uint64_t p = j * per; p < (j + 1) * per; ++p) {
        sum += seqs.cost[p];
        for (std::size_t t = 0; t < a; ++t)
          mean_amp[j * a + t] += seqs.amp[p * a + t];
      }
      mean_cost[j] = sum / double(per);
      for (std::size_t t = 0; t < a; ++t)
        mean_amp[j * a + t] /= double(per);
    }
  }

  void record(double top_cost, const std::vector<double>& amp, std::uint64_t memory) {
    SweepRecord r;
    r.kind = "lut";
    r.layers = int(ns_.size());
    r.n_vec = ns_;
    r.k_vec = ks_;
    r.m_vec = {alphabet_.size()};
    r.m_vec.insert(r.m_vec.end(), ds_.begin(), ds_.end() - 1);
    r.num_dms_vec = ds_;
    r.rate = Rational(k_total_, n_total_);
    r.mean_energy = top_cost / double(n_total_);
    r.memory_bits = memory;
    Distribution dist(amp.size());
    for (std::size_t s = 0; s < amp.size(); ++s)
      dist[s] = amp[s] / double(n_total_);
    fill_losses(r, alphabet_, dist);
    if (opt_.keep_all) {
      result_.evaluated.push_back(std::move(r));
      return;
    }
    if (std::isnan(r.rate_loss_mb))
      return;
    const auto [it, fresh] = slots_.try_emplace({r.layers, memory}, result_.evaluated.size());
    if (fresh) {
      result_.evaluated.push_back(std::move(r));
      return;
    }
    auto& held = result_.evaluated[it->second];
    if (r.rate_loss_mb < held.rate_loss_mb || (r.rate_loss_mb == held.rate_loss_mb && rational_less(r, held)))
      held = std::move(r);
  }

  const LutSearchOptions& opt_;
  Alphabet alphabet_;
  std::int64_t n_total_;
  std::int64_t k_total_;
  LutSearchResult& result_;
  Slots& slots_;
  std::vector<int> ns_;
  std::vector<std::int64_t> suffix_;
  std::vector<int> ks_;
  std::vector<int> ds_;
  std::vector<std::vector<std::uint64_t>> floor_;
};

} // namespace

LutSearchResult search_lut_hidm(const LutSearchOptions& options) {
  for (int d : options.dm_grid)
    if (d < 2)
      throw Error(ErrorCode::InvalidArgument, "LUT counts below the top layer must be >= 2");
  if (options.k_max < 0 || options.k_max > 40)
    throw Error(ErrorCode::InvalidArgument, "k_max must lie in [0, 40]");
  const Alphabet alphabet(options.alphabet_size);
  LutSearchResult result;
  LutSearch::Slots slots;
  for (int scale : options.scales) {
    if (scale < 1)
      throw Error(ErrorCode::InvalidArgument, "scale must be positive");
    const std::int64_t n_total = options.target.denominator() * scale;
    const std::int64_t k_total = options.target.numerator() * scale;
    if (n_total > std::numeric_limits<int>::max())
      throw Error(ErrorCode::InvalidArgument, "total block length overflows");
    LutSearch search(options, alphabet, n_total, k_total, result, slots);
    for (int l : options.layers)
      for (auto& ns : factorizations(int(n_total), l))
        search.run(std::move(ns));
  }
  sort_records(result.evaluated);
  result.frontier = pareto_frontier(result.evaluated);
  // Frontier rows are rebuilt so their induced losses come from the actual
  // tables rather than the search's tie-broken cost lists.
  for (auto& f : result.frontier) {
    f = reevaluate(f, alphabet);
    f.best = true;
    for (auto& r : result.evaluated)
      if (r.n_vec == f.n_vec && r.k_vec == f.k_vec && r.num_dms_vec == f.num_dms_vec)
        r = f;
  }
  return result;
}

SweepRecord lut_reference(int n, int k, const Alphabet& alphabet) {
  if (n < 1 || k < 0)
    throw Error(ErrorCode::InvalidArgument, "reference LUT needs N >= 1 and k >= 0");
  const BigUint needed = BigUint(1) << k;
  // Energies are 1 + 8 * i(i+1)/2, so a sum of n of them is n + 8 * j.
  std::vector<int> step(alphabet.size());
  for (int i = 0; i < alphabet.size(); ++i)
    step[i] = i * (i + 1) / 2;
  std::vector<BigUint> count{1};
  for (int pos = 0; pos < n; ++pos) {
    std::vector<BigUint> next(count.size() + std::size_t(step.back()), BigUint(0));
    for (std::size_t j = 0; j < count.size(); ++j)
      if (count[j] != 0)
        for (int s : step)
          next[j + std::size_t(s)] += count[j];
    count = std::move(next);
  }
  BigUint total = 0;
  for (const auto& c : count)
    total += c;
  if (needed > total)
    throw Error(ErrorCode::TooMany, "2^" + std::to_string(k) + " exceeds the number of sequences");

  BigUint left = needed;
  BigUint energy = 0;
  for (std::size_t j = 0; j < count.size() && left > 0; ++j) {
    const BigUint take = count[j] < left ? count[j] : left;
    energy += take * (std::int64_t(n) + 8 * std::int64_t(j));
    left -= take;
  }

  SweepRecord r;
  r.kind = "lut_ref";
  r.layers = 1;
  r.n_vec = {n};
  r.k_vec = {k};
  r.m_vec = {alphabet.size()};
  r.num_dms_vec = {1};
  r.rate = Rational(k, n);
  r.mean_energy = ratio(energy, needed) / n;
  r.memory_bits = needed * n * ceil_log2(std::uint64_t(alphabet.size()));
  r.rate_loss_mb = loss_mb(r.mean_energy, r.rate, alphabet);
  // Symbol counts depend on how the last energy level is split.
  r.rate_loss_induced = std::numeric_limits<double>::quiet_NaN();
  return r;
}

SweepRecord ess_reference(int n, int k, const Alphabet& alphabet) {
  const auto dm = ess_build(n, alphabet, k);
  const auto m = metrics(*dm);
  SweepRecord r;
  r.kind = "ess_ref";
  r.layers = 1;
  r.n_vec = {n};
  r.k_vec = {k};
  r.m_vec = {alphabet.size()};
  r.num_dms_vec = {1};
  r.rate = m.rate;
  r.mean_energy = m.mean_energy_per_symbol;
  r.memory_bits = m.memory_bits;
  r.rate_loss_mb = m.rate_loss_mb;
  r.rate_loss_induced = m.rate_loss_induced;
  return r;
}

SweepRecord reevaluate(const SweepRecord& record, const Alphabet& alphabet) {
  if (record.kind == "lut_ref")
    return lut_reference(record.n_vec.at(0), record.k_vec.at(0), alphabet);
  if (record.kind == "ess_ref")
    return ess_reference(record.n_vec.at(0), record.k_vec.at(0), alphabet);

  DmPtr dm;
  if (record.kind == "ccdm") {
    dm = make_ccdm(record.inner.at(0), alphabet);
  } else if (record.kind == "ccdm2") {
    dm = build_ccdm2(record.inner, record.outer, alphabet);
  } else if (record.kind == "ppm") {
    auto family = build_lut_family(alphabet.energies(), record.n_vec.at(0), record.k_vec.at(0), record.layers);
    std::vector<int> positions(record.n_vec.begin() + 1, record.n_vec.end());
    dm = ppm_build(family->luts(), positions);
  } else if (record.kind == "lut") {
    dm = build_lut_hidm(alphabet.size(), record.n_vec, record.k_vec, record.num_dms_vec);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown record kind '" + record.kind + "'");
  }
  const auto m = metrics(*dm);
  SweepRecord r = record;
  r.rate = m.rate;
  r.mean_energy = m.mean_energy_per_symbol;
  r.memory_bits = m.memory_bits;
  r.rate_loss_mb = m.rate_loss_mb;
  r.rate_loss_induced = m.rate_loss_induced;
  return r;
}

// ---- CSV ----

const char* const csv_header =
    "kind,L,N_vec,k_vec,M_vec,num_dms_vec,rate_exact,rate,rate_loss_mb,rate_loss_induced,mean_energy,memory_bits,best";

std::optional<Rational> descriptor_rate(const SweepRecord& r) {
  if (r.n_vec.empty() || r.k_vec.size() != r.n_vec.size())
    return std::nullopt;
  const std::int64_t n_total = product(r.n_vec);
  if (r.kind == "ccdm" || r.kind == "lut_ref" || r.kind == "ess_ref")
    return Rational(r.k_vec[0], r.n_vec[0]);
  if (r.kind == "lut") {
    // Layer l contributes k_l once per block of the layers above it.
    std::int64_t bits = 0;
    std::int64_t below = 1;
    for (std::size_t l = r.n_vec.size(); l-- > 0;) {
      bits += std::int64_t(r.k_vec[l]) * below;
      below *= r.n_vec[l];
    }
    return Rational(bits, n_total);
  }
  if (r.kind == "ppm") {
    const std::vector<int> positions(r.n_vec.begin() + 1, r.n_vec.end());
    return Rational(ppm_total_bits(r.k_vec[0], positions), n_total);
  }
  return std::nullopt;
}

std::string join_ints(std::span<const int> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0)
      throw Error(ErrorCode::InvalidArgument, "negative vector entry cannot be written");
    out += (i ? "-" : "") + std::to_string(v[i]);
  }
  return out;
}

std::vector<int> split_ints(std::string_view text) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('-', start);
    if (end == std::string_view::npos)
      end = text.size();
    const auto part = text.substr(start, end - start);
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
      throw Error(ErrorCode::Config, "malformed integer vector '" + std::string(text) + "'");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

void write_csv(std::ostream& out, std::span<const SweepRecord> records, const CsvMetadata& metadata) {
  for (const auto& [key, value] : metadata)
    out << "# " << key << ": " << value << '\n';
  out << csv_header << '\n';
  for (const auto& r : records) {
    out << r.kind << ',' << r.layers << ',' << join_ints(r.n_vec) << ',' << join_ints(r.k_vec) << ','
        << join_ints(r.m_vec) << ',' << join_ints(r.num_dms_vec) << ',' << to_string(r.rate) << ','
        << format_real(to_double(r.rate)) << ',' << format_real(r.rate_loss_mb) << ','
        << format_real(r.rate_loss_induced) << ',' << format_real(r.mean_energy) << ',' << r.memory_bits.str() << ','
        << (r.best ? "true" : "false") << '\n';
  }
}

std::vector<SweepRecord> read_csv(std::istream& in, CsvMetadata* metadata) {
  std::string line;
  bool header = false;
  std::vector<SweepRecord> out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!header && !line.empty() && line[0] == '#') {
      if (metadata) {
        auto body = std::string_view(line).substr(1);
        while (!body.empty() && body.front() == ' ')
          body.remove_prefix(1);
        const auto colon = body.find(": ");
        if (colon == std::string_view::npos)
          metadata->emplace_back(std::string(body), "");
        else
          metadata->emplace_back(std::string(body.substr(0, colon)), std::string(body.substr(colon + 2)));
      }
      continue;
    }
    if (!header) {
      if (line != csv_header)
        throw Error(ErrorCode::Config, "unexpected CSV header '" + line + "'");
      header = true;
      continue;
    }
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      f.push_back(cell);
    if (f.size() != 13)
      throw Error(ErrorCode::Config, "CSV line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                                         " fields, expected 13");
    try {
      SweepRecord r;
      r.kind = f[0];
      r.layers = std::stoi(f[1]);
      r.n_vec = split_ints(f[2]);
      r.k_vec = split_ints(f[3]);
      r.m_vec = split_ints(f[4]);
      r.num_dms_vec = split_ints(f[5]);
      r.rate = parse_rational(f[6]);
      r.rate_loss_mb = std::strtod(f[8].c_str(), nullptr);
      r.rate_loss_induced = std::strtod(f[9].c_str(), nullptr);
      r.mean_energy = std::strtod(f[10].c_str(), nullptr);
      r.memory_bits = BigUint(f[11]);
      if (f[12] != "true" && f[12] != "false")
        throw Error(ErrorCode::Config, "best must be true or false");
      r.best = f[12] == "true";
      if (r.layers != int(r.n_vec.size()))
        throw Error(ErrorCode::Config, "L does not match N_vec");
      if (const auto expect = descriptor_rate(r); expect && *expect != r.rate)
        throw Error(ErrorCode::Config, "rate_exact " + to_string(r.rate) + " disagrees with the descriptor (" +
                                           to_string(*expect) + ")");
      if (std::abs(std::strtod(f[7].c_str(), nullptr) - to_double(r.rate)) > 1e-9)
        throw Error(ErrorCode::Config, "rate column disagrees with rate_exact");
      out.push_back(std::move(r));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Config)
        throw;
      throw Error(ErrorCode::Config, "CSV line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::Config, "CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header)
    throw Error(ErrorCode::Config, "CSV has no header");
  return out;
}

} // namespace hidm
