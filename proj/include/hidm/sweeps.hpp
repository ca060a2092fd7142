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

#ifndef HIDM_SWEEPS_HPP
#define HIDM_SWEEPS_HPP

// Parameter sweeps, structure search and the CSV record format.

#include <iosfwd>

#include "hidm/ccdm.hpp"
#include "hidm/hierarchy.hpp"
#include "hidm/ppm.hpp"

namespace hidm {

/// kind is one of ccdm, ccdm2, ppm, lut, lut_ref, ess_ref.
struct SweepRecord {
  std::string kind;
  int layers = 1;
  std::vector<int> n_vec;
  /// For a layer whose DMs differ in k (ccdm2 inner layer) this holds the
  /// k of the first DM.
  std::vector<int> k_vec;
  std::vector<int> m_vec;
  std::vector<int> num_dms_vec;
  Rational rate;
  double rate_loss_mb = 0.0;
  double rate_loss_induced = 0.0;
  double mean_energy = 0.0;
  BigUint memory_bits;
  bool best = false;

  /// ccdm / ccdm2 only, not written to CSV: inner compositions and the
  /// outer composition.
  std::vector<Composition> inner;
  Composition outer;

  /// prod N_l and rate * prod N_l.
  std::int64_t total_length() const;
  std::int64_t total_bits() const;
};

/// Orders by (L, rate, memory_bits, kind, vectors).
void sort_records(std::vector<SweepRecord>& records);

/// Non-dominated records in (memory_bits, rate_loss_mb): memory strictly
/// increasing, loss strictly decreasing.
std::vector<SweepRecord> pareto_frontier(std::span<const SweepRecord> records);

// ---- CCDM two-layer cloud ----

/// n evenly spaced rates from lo to hi inclusive.
std::vector<Rational> rate_grid(Rational lo, Rational hi, int n);

/// D_1 at the target rate, the others at the grid rates. A grid rate asks
/// for k >= min(ceil(N * r), k_max); each DM takes the cheapest
/// (energy, counts) composition meeting its k that is not already taken,
/// lowering k one bit at a time when every such composition is taken.
std::vector<Composition> select_inner_compositions(int n1, const Alphabet& alphabet, int num_inner, Rational target,
                                                   std::span<const Rational> grid);

/// One ccdm record per inner DM (flag best on D_1) and one ccdm2 record
/// per outer composition of n2 over num_inner symbols. The ccdm2 record
/// with the lowest loss among rates >= target is flagged best.
std::vector<SweepRecord> sweep_ccdm_2layer(int n1, const Alphabet& alphabet, int num_inner, int n2,
                                           Rational target, std::span<const Rational> inner_grid);

std::shared_ptr<const HiDm> build_ccdm2(std::span<const Composition> inner, const Composition& outer,
                                        const Alphabet& alphabet);

// ---- PPM ----

/// Records for every k1 in k1_range, L in 1..l_max with L * 2^k1 <= M^N1,
/// and position vector from position_grid with product <= cap_ntot. The
/// lowest-loss record of each (k1, L) is flagged best.
std::vector<SweepRecord> sweep_ppm(int n1, const Alphabet& alphabet, std::span<const int> k1_range, int l_max,
                                   std::span<const int> position_grid, int cap_ntot);

// ---- LUT Hi-DM search ----

struct LutSearchOptions {
  Rational target{507, 320};
  int alphabet_size = 4;
  std::vector<int> layers{1, 2, 3, 4, 5};
  /// N_tot = target denominator * scale.
  std::vector<int> scales{1};
  /// Candidate LUT counts for every layer below the top.
  std::vector<int> dm_grid{2, 4, 8, 16, 32, 64, 128};
  int k_max = 40;
  std::uint64_t memory_cap = std::uint64_t(1) << 18;
  /// When false, evaluated keeps only the lowest-loss record for each
  /// (L, memory_bits) pair. The frontier is unchanged.
  bool keep_all = true;
};

struct LutSearchResult {
  std::vector<SweepRecord> evaluated;
  std::vector<SweepRecord> frontier;
  std::uint64_t candidates = 0;
};

/// Exhaustive over factorizations of N_tot into L factors >= 2, k vectors
/// hitting the target exactly, and LUT counts from the grid, skipping any
/// candidate whose tables exceed memory_cap or whose LUTs do not fit.
LutSearchResult search_lut_hidm(const LutSearchOptions& options);

/// Single LUT of the 2^k cheapest length-n sequences; the mean energy is
/// computed from energy-level counts, never building the table.
SweepRecord lut_reference(int n, int k, const Alphabet& alphabet);
SweepRecord ess_reference(int n, int k, const Alphabet& alphabet);

/// Builds the described structure and recomputes its metrics (ccdm,
/// ccdm2, ppm and lut records).
SweepRecord reevaluate(const SweepRecord& record, const Alphabet& alphabet);

// ---- CSV ----

extern const char* const csv_header;

using CsvMetadata = std::vector<std::pair<std::string, std::string>>;

void write_csv(std::ostream& out, std::span<const SweepRecord> records, const CsvMetadata& metadata);
/// Parses the format written by write_csv; ccdm compositions are not
/// recovered. Throws Config on schema violations.
std::vector<SweepRecord> read_csv(std::istream& in, CsvMetadata* metadata = nullptr);

/// Rate implied by N_vec and k_vec alone, when the kind determines it
/// (ccdm2 rows do not carry enough information).
std::optional<Rational> descriptor_rate(const SweepRecord& r);

std::string join_ints(std::span<const int> v);
std::vector<int> split_ints(std::string_view text);

} // namespace hidm

#endif // HIDM_SWEEPS_HPP
