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

#include "hidm/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <map>

namespace hidm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
  case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
  case ErrorCode::CompositionMismatch: return "CompositionMismatch";
  case ErrorCode::RankOverflow: return "RankOverflow";
  case ErrorCode::Infeasible: return "Infeasible";
  case ErrorCode::TooMany: return "TooMany";
  case ErrorCode::NotInFamily: return "NotInFamily";
  case ErrorCode::NotInSupport: return "NotInSupport";
  case ErrorCode::BoundTooSmall: return "BoundTooSmall";
  case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
  case ErrorCode::BlockLengthMismatch: return "BlockLengthMismatch";
  case ErrorCode::NotDisjoint: return "NotDisjoint";
  case ErrorCode::VariableRateUnsupported: return "VariableRateUnsupported";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::UndecodableBlock: return "UndecodableBlock";
  case ErrorCode::UndecodableVirtual: return "UndecodableVirtual";
  case ErrorCode::NotPowerOfTwo: return "NotPowerOfTwo";
  case ErrorCode::BaseNotOrdered: return "BaseNotOrdered";
  case ErrorCode::Unverifiable: return "Unverifiable";
  case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what, int layer, std::int64_t position)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code), layer_(layer), position_(position) {}

Alphabet::Alphabet(int size) : size_(size) {
  if (size < 1 || size > 32768)
    throw Error(ErrorCode::InvalidArgument, "alphabet size must be in [1, 32768]");
}

std::vector<int> Alphabet::levels() const {
  std::vector<int> out(size_);
  for (int i = 0; i < size_; ++i)
    out[i] = level(i);
  return out;
}

std::vector<double> Alphabet::energies() const {
  std::vector<double> out(size_);
  for (int i = 0; i < size_; ++i)
    out[i] = double(energy(i));
  return out;
}

double Alphabet::uniform_mean_energy() const {
  std::int64_t sum = 0;
  for (int i = 0; i < size_; ++i)
    sum += energy(i);
  return double(sum) / size_;
}

std::optional<Symbol> Alphabet::index_of(int amplitude) const {
  if (amplitude < 1 || amplitude % 2 == 0 || amplitude > 2 * size_ - 1)
    return std::nullopt;
  return Symbol((amplitude - 1) / 2);
}

BigUint BitWord::value() const {
  BigUint v = 0;
  for (auto b : bits) {
    v <<= 1;
    if (b)
      v |= 1;
  }
  return v;
}

std::string BitWord::to_string() const {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i])
      s[i] = '1';
  return s;
}

BitWord BitWord::from_value(const BigUint& value, std::size_t length) {
  if (value < 0 || (length < 4096 && value >= (BigUint(1) << length)))
    throw Error(ErrorCode::IndexOutOfRange, "value does not fit in " + std::to_string(length) + " bits");
  BitWord w;
  w.bits.resize(length);
  for (std::size_t i = 0; i < length; ++i)
    w.bits[length - 1 - i] = boost::multiprecision::bit_test(value, unsigned(i)) ? 1 : 0;
  return w;
}

BitWord BitWord::parse(std::string_view text) {
  BitWord w;
  w.bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1')
      throw Error(ErrorCode::InvalidArgument, "bit string contains '" + std::string(1, c) + "'");
    w.bits.push_back(c == '1');
  }
  return w;
}

std::int64_t energy(std::span<const int> amplitudes) {
  std::int64_t e = 0;
  for (int a : amplitudes)
    e += std::int64_t(a) * a;
  return e;
}

std::vector<int> to_amplitudes(std::span<const Symbol> seq) {
  std::vector<int> out(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i)
    out[i] = 2 * int(seq[i]) + 1;
  return out;
}

SymbolSeq to_symbols(std::span<const int> amplitudes, const Alphabet& alphabet) {
  SymbolSeq out(amplitudes.size());
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    auto idx = alphabet.index_of(amplitudes[i]);
    if (!idx)
      throw Error(ErrorCode::NotInSupport, "amplitude " + std::to_string(amplitudes[i]) + " outside the alphabet",
                  -1, std::int64_t(i));
    out[i] = *idx;
  }
  return out;
}

Distribution mb_distribution(const Alphabet& alphabet, double lambda) {
  // Shift by the smallest energy so large lambda does not underflow to 0/0.
  Distribution p(alphabet.size());
  const double e0 = double(alphabet.energy(0));
  double z = 0.0;
  for (int i = 0; i < alphabet.size(); ++i) {
    p[i] = std::exp(-lambda * (double(alphabet.energy(i)) - e0));
    z += p[i];
  }
  for (auto& x : p)
    x /= z;
  return p;
}

double mb_mean_energy(const Alphabet& alphabet, double lambda) {
  auto p = mb_distribution(alphabet, lambda);
  double m = 0.0;
  for (int i = 0; i < alphabet.size(); ++i)
    m += p[i] * double(alphabet.energy(i));
  return m;
}

Distribution mb_fit(const Alphabet& alphabet, double target) {
  constexpr double lambda_max = 64.0;
  constexpr int iterations = 200;
  const double lo_e = double(alphabet.energy(0));
  const double hi_e = alphabet.uniform_mean_energy();
  const double slack = 1e-12 * hi_e;
  if (!(target >= lo_e - slack && target <= hi_e + slack))
    throw Error(ErrorCode::TargetOutOfRange,
                "target mean energy " + format_real(target) + " outside [" + format_real(lo_e) + ", " +
                    format_real(hi_e) + "]");
  if (target >= hi_e - slack)
    return mb_distribution(alphabet, 0.0);

  double lo = 0.0, hi = lambda_max;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mb_mean_energy(alphabet, mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return mb_distribution(alphabet, 0.5 * (lo + hi));
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0)
      h -= p * std::log2(p);
  return h;
}

std::string_view to_string(LossMode mode) {
  return mode == LossMode::mb_same_energy ? "mb" : "induced";
}

LossMode parse_loss_mode(std::string_view text) {
  if (text == "mb" || text == "mb_same_energy")
    return LossMode::mb_same_energy;
  if (text == "induced")
    return LossMode::induced;
  throw Error(ErrorCode::InvalidArgument, "unknown rate-loss mode '" + std::string(text) + "'");
}

double rate_loss(double mean_energy_per_symbol, Rational rate, const Alphabet& alphabet, LossMode mode,
                 const Distribution* induced) {
  double h = 0.0;
  if (mode == LossMode::mb_same_energy) {
    h = entropy(mb_fit(alphabet, mean_energy_per_symbol));
  } else {
    if (!induced)
      throw Error(ErrorCode::InvalidArgument, "induced rate loss needs the induced distribution");
    h = entropy(*induced);
  }
  return h - to_double(rate);
}

Rational parse_rational(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw Error(ErrorCode::InvalidArgument, "malformed rational '" + std::string(text) + "'");
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto den = parse_int(text.substr(slash + 1));
    if (den <= 0)
      throw Error(ErrorCode::InvalidArgument, "rational denominator must be positive");
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto frac = text.substr(dot + 1);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i)
      den *= 10;
    auto whole = parse_int(text.substr(0, dot));
    auto part = frac.empty() ? 0 : parse_int(frac);
    return Rational(whole * den + part, den);
  }
  return Rational(parse_int(text));
}

std::string to_string(Rational r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double to_double(Rational r) { return double(r.numerator()) / double(r.denominator()); }

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double round_real(double x) {
  if (!std::isfinite(x))
    return x;
  return std::stod(format_real(x));
}

int floor_log2(const BigUint& x) {
  if (x <= 0)
    throw Error(ErrorCode::InvalidArgument, "log2 of a non-positive integer");
  return int(boost::multiprecision::msb(x));
}

int ceil_log2(std::uint64_t m) {
  if (m == 0)
    throw Error(ErrorCode::InvalidArgument, "log2 of zero");
  int bits = 0;
  while ((std::uint64_t(1) << bits) < m && bits < 64)
    ++bits;
  return bits;
}

double ratio(const BigUint& x, const BigUint& y) {
  if (y == 0)
    throw Error(ErrorCode::InvalidArgument, "division by zero");
  if (x == 0)
    return 0.0;
  const int bx = int(boost::multiprecision::msb(x));
  const int by = int(boost::multiprecision::msb(y));
  const int shift = std::max(bx, by) - 960;
  if (shift <= 0)
    return x.convert_to<double>() / y.convert_to<double>();
  return BigUint(x >> shift).convert_to<double>() / BigUint(y >> shift).convert_to<double>();
}

std::uint64_t saturating_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    r *= base;
  }
  return r;
}

std::string_view to_string(DmKind kind) {
  switch (kind) {
  case DmKind::ccdm: return "ccdm";
  case DmKind::lut: return "lut";
  case DmKind::ess: return "ess";
  case DmKind::hidm: return "hidm";
  case DmKind::ppm: return "ppm";
  }
  return "unknown";
}

BigUint DistributionMatcher::decode(std::span<const Symbol> seq) const {
  auto v = try_decode(seq);
  if (!v)
    throw Error(ErrorCode::NotInSupport, "sequence " + sequence_to_string(seq) + " is not a codeword");
  return *v;
}

SymbolSeq DistributionMatcher::encode_bits(const BitWord& bits) const {
  if (bits.length() != std::size_t(input_bits()))
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(input_bits()) + " input bits, got " +
                                               std::to_string(bits.length()));
  return encode(bits.value());
}

BitWord DistributionMatcher::decode_bits(std::span<const Symbol> seq) const {
  return BitWord::from_value(decode(seq), std::size_t(input_bits()));
}

double DistributionMatcher::codeword_cost(std::span<const Symbol> seq) const {
  auto costs = symbol_costs();
  double c = 0.0;
  for (auto s : seq)
    c += costs[s];
  return c;
}

std::string sequence_to_string(std::span<const Symbol> seq) {
  std::string s = "(";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i)
      s += ',';
    s += std::to_string(seq[i]);
  }
  return s + ")";
}

namespace {

BigUint random_index(std::mt19937_64& rng, int bits) {
  BigUint v = 0;
  int left = bits;
  while (left > 0) {
    const int take = std::min(left, 64);
    std::uint64_t word = rng();
    if (take < 64)
      word &= (std::uint64_t(1) << take) - 1;
    v <<= take;
    v |= word;
    left -= take;
  }
  return v;
}

} // namespace

VerificationReport verify_dm(const DistributionMatcher& dm, std::uint64_t exhaustive_limit, std::uint64_t seed,
                             std::uint64_t samples) {
  VerificationReport report;
  const int k = dm.input_bits();
  const int n = dm.block_length();
  const int m = dm.alphabet_size();
  const bool exhaustive = k < 63 && (std::uint64_t(1) << k) <= exhaustive_limit;
  report.exhaustive = exhaustive;

  std::map<SymbolSeq, BigUint> seen;
  double cost_sum = 0.0;

  auto check = [&](const BigUint& index) {
    const std::string tag = "input " + index.str();
    SymbolSeq seq;
    try {
      seq = dm.encode(index);
    } catch (const Error& e) {
      report.violations.push_back({"encode", tag + ": " + e.what()});
      return;
    }
    if (int(seq.size()) != n)
      report.violations.push_back({"length", tag + " -> length " + std::to_string(seq.size())});
    for (auto s : seq)
      if (int(s) >= m) {
        report.violations.push_back({"alphabet", tag + " -> " + sequence_to_string(seq)});
        break;
      }
    if (auto [it, fresh] = seen.emplace(seq, index); !fresh && it->second != index)
      report.violations.push_back({"injectivity", tag + " and input " + it->second.str() + " -> " +
                                                      sequence_to_string(seq)});
    auto back = dm.try_decode(seq);
    if (!back || *back != index)
      report.violations.push_back({"roundtrip", tag + " -> " + sequence_to_string(seq) + " -> " +
                                                    (back ? back->str() : std::string("undecodable"))});
    cost_sum += dm.codeword_cost(seq);
    ++report.inputs_checked;
  };

  if (exhaustive) {
    const std::uint64_t total = std::uint64_t(1) << k;
    for (std::uint64_t i = 0; i < total; ++i)
      check(BigUint(i));
    report.mean_cost_checked = true;
    report.brute_force_mean_cost = cost_sum / double(total);
    const double expect = dm.mean_cost();
    if (std::abs(report.brute_force_mean_cost - expect) > 1e-9 * std::max(1.0, std::abs(expect)))
      report.violations.push_back({"mean_cost", "declared " + format_real(expect) + ", brute force " +
                                                    format_real(report.brute_force_mean_cost)});
  } else {
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < std::max<std::uint64_t>(samples, 1); ++i)
      check(random_index(rng, k));
  }
  return report;
}

} // namespace hidm
