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

#ifndef HIDM_CORE_HPP
#define HIDM_CORE_HPP

// Shared vocabulary: amplitude alphabets, bit words, Maxwell-Boltzmann
// fitting, entropy / rate loss and the interface every matcher implements.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace hidm {

using BigUint = boost::multiprecision::cpp_int;
using Rational = boost::rational<std::int64_t>;

/// Index into an output alphabet (amplitude level or virtual DM id).
using Symbol = std::uint16_t;
using SymbolSeq = std::vector<Symbol>;

/// Probabilities indexed by alphabet position.
using Distribution = std::vector<double>;

enum class ErrorCode {
  InvalidArgument,
  TargetOutOfRange,
  IndexOutOfRange,
  CompositionMismatch,
  RankOverflow,
  Infeasible,
  TooMany,
  NotInFamily,
  NotInSupport,
  BoundTooSmall,
  AlphabetMismatch,
  BlockLengthMismatch,
  NotDisjoint,
  VariableRateUnsupported,
  LengthMismatch,
  UndecodableBlock,
  UndecodableVirtual,
  NotPowerOfTwo,
  BaseNotOrdered,
  Unverifiable,
  Config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what, int layer = -1, std::int64_t position = -1);

  ErrorCode code() const noexcept { return code_; }
  /// Layer (1-based) and block position attached to decode failures, -1 otherwise.
  int layer() const noexcept { return layer_; }
  std::int64_t position() const noexcept { return position_; }

private:
  ErrorCode code_;
  int layer_;
  std::int64_t position_;
};

/// Odd amplitudes 1, 3, ..., 2M-1 with energies a^2.
class Alphabet {
public:
  explicit Alphabet(int size);

  int size() const noexcept { return size_; }
  int level(int i) const { return 2 * i + 1; }
  std::int64_t energy(int i) const { return std::int64_t(2 * i + 1) * (2 * i + 1); }
  std::vector<int> levels() const;
  std::vector<double> energies() const;
  double uniform_mean_energy() const;
  std::optional<Symbol> index_of(int amplitude) const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

private:
  int size_;
};

/// Fixed-length bit sequence, MSB-first when read as an integer.
struct BitWord {
  std::vector<std::uint8_t> bits;

  std::size_t length() const noexcept { return bits.size(); }
  BigUint value() const;
  std::string to_string() const;

  static BitWord from_value(const BigUint& value, std::size_t length);
  static BitWord parse(std::string_view text);

  friend bool operator==(const BitWord&, const BitWord&) = default;
};

/// Sum of squared amplitudes.
std::int64_t energy(std::span<const int> amplitudes);

std::vector<int> to_amplitudes(std::span<const Symbol> seq);
SymbolSeq to_symbols(std::span<const int> amplitudes, const Alphabet& alphabet);

/// Mean energy of P(a) ~ exp(-lambda a^2) over the alphabet.
double mb_mean_energy(const Alphabet& alphabet, double lambda);
Distribution mb_distribution(const Alphabet& alphabet, double lambda);

/// Maxwell-Boltzmann distribution whose mean energy equals the target.
/// Bisection on lambda in [0, 64]; throws TargetOutOfRange outside
/// [min energy, uniform mean].
Distribution mb_fit(const Alphabet& alphabet, double target_mean_energy);

/// Shannon entropy in bits, 0 log 0 = 0.
double entropy(std::span<const double> probs);

enum class LossMode { mb_same_energy, induced };

std::string_view to_string(LossMode mode);
LossMode parse_loss_mode(std::string_view text);

double rate_loss(double mean_energy_per_symbol, Rational rate, const Alphabet& alphabet,
                 LossMode mode, const Distribution* induced = nullptr);

Rational parse_rational(std::string_view text);
std::string to_string(Rational r);
double to_double(Rational r);

/// Twelve significant digits, the format used in every report.
std::string format_real(double x);
double round_real(double x);

/// floor(log2(x)) for x >= 1.
int floor_log2(const BigUint& x);
/// ceil(log2(m)) for m >= 1; 0 for m == 1.
int ceil_log2(std::uint64_t m);
/// x / y as a double without overflowing for very large operands.
double ratio(const BigUint& x, const BigUint& y);
/// base^exp, saturating at UINT64_MAX.
std::uint64_t saturating_pow(std::uint64_t base, int exp);

enum class DmKind { ccdm, lut, ess, hidm, ppm };

std::string_view to_string(DmKind kind);

/// Fixed-to-fixed distribution matcher: k input bits to N output symbols.
/// Encoding is injective on [0, 2^k) and try_decode inverts it; sequences
/// outside the image decode to nullopt.
class DistributionMatcher {
public:
  virtual ~DistributionMatcher() = default;

  virtual DmKind kind() const = 0;
  virtual int input_bits() const = 0;
  virtual int block_length() const = 0;
  virtual int alphabet_size() const = 0;

  /// Additive per-symbol costs the matcher was designed against.
  virtual std::span<const double> symbol_costs() const = 0;
  /// Mean total cost of a codeword under uniformly distributed input.
  virtual double mean_cost() const = 0;
  /// Expected number of occurrences of each output symbol per codeword.
  virtual std::vector<double> mean_symbol_counts() const = 0;
  /// Bits needed to store the encoding tables (0 for computed matchers).
  virtual BigUint memory_bits() const = 0;

  virtual SymbolSeq encode(const BigUint& index) const = 0;
  virtual std::optional<BigUint> try_decode(std::span<const Symbol> seq) const = 0;

  BigUint support_size() const { return BigUint(1) << input_bits(); }
  BigUint decode(std::span<const Symbol> seq) const;
  bool contains(std::span<const Symbol> seq) const { return try_decode(seq).has_value(); }
  SymbolSeq encode_bits(const BitWord& bits) const;
  BitWord decode_bits(std::span<const Symbol> seq) const;
  /// Left-to-right sum of symbol costs.
  double codeword_cost(std::span<const Symbol> seq) const;
};

using DmPtr = std::shared_ptr<const DistributionMatcher>;

struct Violation {
  std::string check;
  std::string witness;
};

struct VerificationReport {
  bool exhaustive = false;
  std::uint64_t inputs_checked = 0;
  bool mean_cost_checked = false;
  double brute_force_mean_cost = 0.0;
  std::vector<Violation> violations;

  bool passed() const noexcept { return violations.empty(); }
};

/// Exhaustive check when 2^k <= exhaustive_limit, otherwise `samples`
/// random inputs drawn from a generator seeded with `seed`.
VerificationReport verify_dm(const DistributionMatcher& dm, std::uint64_t exhaustive_limit,
                             std::uint64_t seed = 1, std::uint64_t samples = 1000);

std::string sequence_to_string(std::span<const Symbol> seq);

} // namespace hidm

#endif // HIDM_CORE_HPP
