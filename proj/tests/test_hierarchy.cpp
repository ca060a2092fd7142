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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hidm/ccdm.hpp"
#include "hidm/ess.hpp"
#include "hidm/hierarchy.hpp"
#include "hidm/lutdm.hpp"
#include "oracles.hpp"
#include "structures.hpp"

using namespace hidm;
using namespace structures;

namespace {

struct Caught {
  ErrorCode code;
  int layer;
  std::int64_t position;
};

Caught caught(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code(), e.layer(), e.position()};
  }
  FAIL("expected an Error");
  return {ErrorCode::InvalidArgument, -1, -1};
}

} // namespace

TEST_CASE("toy two-layer encode and decode") {
  const auto s = toy();
  CHECK(s->rate() == Rational(3, 4));
  CHECK(s->total_bits() == 3);
  CHECK(to_amplitudes(s->encode_bits(BitWord::parse("001"))) == std::vector<int>{1, 1, 1, 3});
  CHECK(to_amplitudes(s->encode_bits(BitWord::parse("110"))) == std::vector<int>{1, 3, 3, 1});
  CHECK(s->decode_bits(amps({1, 1, 1, 3})).to_string() == "001");

  const auto virt = caught([&] { s->decode_checked(amps({3, 3, 3, 3})); });
  CHECK(virt.code == ErrorCode::UndecodableVirtual);
  CHECK(virt.layer == 2);
  CHECK(virt.position == 0);

  const auto block = caught([&] { s->decode_checked(amps({5, 1, 1, 1})); });
  CHECK(block.code == ErrorCode::UndecodableBlock);
  CHECK(block.layer == 1);
  CHECK(block.position == 0);

  const auto len = caught([&] { s->decode_checked(amps({1, 1})); });
  CHECK(len.code == ErrorCode::LengthMismatch);
  CHECK_FALSE(s->try_decode(amps({3, 3, 3, 3})).has_value());

  const auto m = metrics(*s);
  CHECK(m.mean_energy_per_symbol == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(m.memory_bits == 12);
  CHECK(m.layer_memory_bits == std::vector<BigUint>{8, 4});
}

TEST_CASE("caption structure N=(3,3), k=(4,3)") {
  const std::vector<int> n{3, 3}, k{4, 3}, d{3, 1};
  const auto s = build_lut_hidm(4, n, k, d);
  CHECK(s->rate() == Rational(5, 3));
  CHECK(s->n_vec() == std::vector<int>{3, 3});
  CHECK(s->k_vec() == std::vector<int>{4, 3});
  CHECK(s->m_vec() == std::vector<int>{4, 3});
  CHECK(s->num_dms_vec() == std::vector<int>{3, 1});
}

TEST_CASE("uniform single LUT has zero rate loss") {
  const auto family = build_lut_family(Alphabet(4).energies(), 3, 6, 1);
  const auto m = metrics(*family->lut(0));
  CHECK(std::abs(m.rate_loss_mb) < 1e-12);
  CHECK(std::abs(m.rate_loss_induced) < 1e-12);
}

TEST_CASE("fixed top layer reduces to a DM sequence") {
  const auto bottom = build_lut_family(Alphabet(4).energies(), 3, 4, 3);
  const auto top = build_lut_family(mean_costs(bottom->luts()), 2, 0, 1);
  const auto s = HiDm::build({bottom->luts(), top->luts()});
  CHECK(s->rate() == Rational(4, 3));
  const auto seq = top->lut(0)->encode(0);
  const auto out = s->encode(BigUint(0x5A));
  CHECK(SymbolSeq(out.begin(), out.begin() + 3) == bottom->lut(seq[0])->encode(0x5));
  CHECK(SymbolSeq(out.begin() + 3, out.end()) == bottom->lut(seq[1])->encode(0xA));
}

TEST_CASE("structure validation") {
  const auto bottom = build_lut_family(kTwoLevel, 2, 1, 2);
  const auto d1 = bottom->lut(0);
  const auto top = build_lut_family({6, 14}, 2, 1, 1);

  CHECK(caught([&] { HiDm::build({{d1, d1}, top->luts()}); }).code == ErrorCode::NotDisjoint);

  const auto other = build_lut_family(kTwoLevel, 3, 1, 1);
  CHECK(caught([&] { HiDm::build({{d1, other->lut(0)}, top->luts()}); }).code == ErrorCode::BlockLengthMismatch);

  const auto top3 = build_lut_family({6, 14, 20}, 2, 1, 1);
  CHECK(caught([&] { HiDm::build({bottom->luts(), top3->luts()}); }).code == ErrorCode::AlphabetMismatch);

  CHECK(caught([&] { HiDm::build({bottom->luts(), bottom->luts()}); }).code == ErrorCode::InvalidArgument);

  const Alphabet a4(4);
  std::vector<DmPtr> unequal{ccdm_over({1, 1, 1, 0}, a4.energies()), ccdm_over({2, 1, 0, 0}, a4.energies())};
  const auto lut_top = build_lut_family(mean_costs(unequal), 2, 1, 1);
  CHECK(caught([&] { HiDm::build({unequal, lut_top->luts()}); }).code == ErrorCode::VariableRateUnsupported);
}

TEST_CASE("disjointness checks") {
  const auto family = build_lut_family(kTwoLevel, 2, 1, 2);
  const std::vector<DmPtr> pair{family->lut(0), family->lut(1)};
  const auto ok = verify_disjoint(pair);
  CHECK(ok.disjoint);
  CHECK(ok.method == "lut-family");

  const std::vector<DmPtr> same{family->lut(0), family->lut(0)};
  const auto bad = verify_disjoint(same);
  CHECK_FALSE(bad.disjoint);
  CHECK(bad.witness == SymbolSeq{0, 0});

  const Alphabet a4(4);
  const std::vector<DmPtr> ccdms{make_ccdm(Composition{{2, 1, 1, 0}}, a4), make_ccdm(Composition{{2, 1, 1, 0}}, a4)};
  const auto c = verify_disjoint(ccdms);
  CHECK_FALSE(c.disjoint);
  CHECK(c.method == "composition");

  // Unrelated LUT and ESS sharing the cheapest sequence.
  const std::vector<DmPtr> mixed{build_lut_family(a4.energies(), 4, 3, 1)->lut(0), ess_build(4, a4, 3)};
  const auto x = verify_disjoint(mixed);
  CHECK_FALSE(x.disjoint);
  CHECK(x.witness == SymbolSeq{0, 0, 0, 0});
}

TEST_CASE("layer index") {
  const auto family = build_lut_family(Alphabet(4).energies(), 3, 4, 3);
  const LayerIndex index(family->luts());
  const auto hit = index.find(family->lut(2)->encode(11));
  REQUIRE(hit.has_value());
  CHECK(hit->dm == 2);
  CHECK(hit->index == 11);
  CHECK_FALSE(index.find(SymbolSeq{3, 3, 3}).has_value());
}

TEST_CASE("exhaustive bijectivity and metrics for structures with K_tot <= 16") {
  for (const auto& [name, dm] : small_structures()) {
    CAPTURE(name);
    REQUIRE(dm->input_bits() <= 16);
    const auto ex = oracle::exhaust(*dm);
    CHECK(ex.injective);
    CHECK(ex.roundtrip);
    if (std::pow(double(dm->alphabet_size()), dm->block_length()) <= 1 << 20)
      CHECK(oracle::support_is_exact(*dm, ex));

    const auto m = metrics(*dm);
    CHECK(m.rate == Rational(dm->input_bits(), dm->block_length()));
    CHECK(oracle::rel_close(ex.mean_cost / dm->block_length(), m.mean_energy_per_symbol, 1e-12));
    for (int s = 0; s < dm->alphabet_size(); ++s)
      CHECK(oracle::rel_close(ex.mean_counts[s] / dm->block_length(), m.amplitude_distribution[s], 1e-12));
    CHECK(verify_dm(*dm, 1 << 16).passed());
  }
}

TEST_CASE("layer memory sums") {
  const std::vector<int> n{3, 3}, k{4, 3}, d{3, 1};
  const auto s = build_lut_hidm(4, n, k, d);
  // 3 * 2^4 * 3 * 2 + 1 * 2^3 * 3 * 2
  CHECK(s->layer_memory_bits() == std::vector<BigUint>{288, 48});
  CHECK(s->memory_bits() == 336);
}
