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

#include "hidm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hidm/ccdm.hpp"
#include "hidm/ess.hpp"
#include "hidm/hierarchy.hpp"
#include "hidm/lutdm.hpp"
#include "hidm/ppm.hpp"

namespace hidm {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Config, where + ": " + what);
}

void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key()))
      fail(where, "unknown key '" + item.key() + "'");
}

int get_int(const Json& j, const std::string& where, const char* key, std::optional<int> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback)
      return *fallback;
    fail(where, std::string("missing '") + key + "'");
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer())
    fail(where, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

std::vector<int> get_ints(const Json& v, const std::string& where, const char* key) {
  if (!v.is_array())
    fail(where, std::string("'") + key + "' must be an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer())
      fail(where, std::string("'") + key + "' must be an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

std::string get_dm(const Json& j, const std::string& where) {
  if (!j.contains("dm") || !j.at("dm").is_string())
    fail(where, "missing 'dm'");
  return j.at("dm").get<std::string>();
}

// DMs of one layer, designed against `costs` (amplitude energies at layer 1,
// mean energies of the layer below above it).
std::vector<DmPtr> build_layer(const Json& j, const std::string& where, const std::vector<double>& costs,
                               bool first, bool top) {
  const auto kind = get_dm(j, where);
  const int alphabet = int(costs.size());
  auto check_alphabet = [&](int declared) {
    if (declared != alphabet)
      throw Error(ErrorCode::AlphabetMismatch, where + ": alphabet_size " + std::to_string(declared) +
                                                   " but the layer below offers " + std::to_string(alphabet));
  };

  if (kind == "lut") {
    only_keys(j, where, {"dm", "N", "k", "num_dms", "alphabet_size"});
    if (j.contains("alphabet_size"))
      check_alphabet(get_int(j, where, "alphabet_size"));
    const int num = get_int(j, where, "num_dms", 1);
    if (top && num != 1)
      fail(where, "the top layer holds a single DM");
    return build_lut_family(costs, get_int(j, where, "N"), get_int(j, where, "k"), num)->luts();
  }

  if (kind == "ccdm") {
    only_keys(j, where, {"dm", "composition", "compositions", "num_dms", "alphabet_size"});
    std::vector<std::vector<int>> comps;
    if (j.contains("composition") == j.contains("compositions"))
      fail(where, "give exactly one of 'composition' and 'compositions'");
    if (j.contains("composition")) {
      comps.push_back(get_ints(j.at("composition"), where, "composition"));
    } else {
      if (!j.at("compositions").is_array())
        fail(where, "'compositions' must be an array of count lists");
      for (const auto& c : j.at("compositions"))
        comps.push_back(get_ints(c, where, "compositions"));
    }
    if (j.contains("num_dms") && get_int(j, where, "num_dms") != int(comps.size()))
      fail(where, "num_dms does not match the number of compositions");
    if (j.contains("alphabet_size"))
      check_alphabet(get_int(j, where, "alphabet_size"));
    if (top && comps.size() != 1)
      fail(where, "the top layer holds a single DM");
    std::vector<DmPtr> out;
    for (auto& c : comps) {
      if (int(c.size()) != alphabet)
        throw Error(ErrorCode::AlphabetMismatch,
                    where + ": composition has " + std::to_string(c.size()) + " counts for alphabet " +
                        std::to_string(alphabet));
      out.push_back(std::make_shared<const CcdmMatcher>(Composition{std::move(c)}, costs));
    }
    return out;
  }

  if (kind == "ess") {
    only_keys(j, where, {"dm", "N", "k", "num_dms", "alphabet_size"});
    if (!first)
      fail(where, "ESS shapes amplitudes and is only allowed at layer 1");
    if (get_int(j, where, "num_dms", 1) != 1)
      fail(where, "an ESS layer holds a single DM");
    if (j.contains("alphabet_size"))
      check_alphabet(get_int(j, where, "alphabet_size"));
    return {ess_build(get_int(j, where, "N"), Alphabet(alphabet), get_int(j, where, "k"))};
  }

  fail(where, "unknown dm '" + kind + "'");
}

int first_alphabet(const Json& j, const std::string& where) {
  if (!j.is_object())
    fail(where, "expected an object");
  if (j.contains("alphabet_size"))
    return get_int(j, where, "alphabet_size");
  if (get_dm(j, where) == "ccdm") {
    if (j.contains("composition") && j.at("composition").is_array())
      return int(j.at("composition").size());
    if (j.contains("compositions") && j.at("compositions").is_array() && !j.at("compositions").empty() &&
        j.at("compositions")[0].is_array())
      return int(j.at("compositions")[0].size());
  }
  fail(where, "missing 'alphabet_size'");
}

DmPtr build_hidm(const Json& j) {
  only_keys(j, "hidm", {"type", "layers"});
  if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").empty())
    fail("hidm", "'layers' must be a non-empty array");
  const auto& layers = j.at("layers");
  const int alphabet = first_alphabet(layers[0], "layer 1");
  if (alphabet < 1)
    fail("layer 1", "alphabet_size must be positive");
  const auto energies = Alphabet(alphabet).energies();

  std::vector<std::vector<DmPtr>> stack;
  std::vector<double> costs = energies;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string where = "layer " + std::to_string(l + 1);
    auto dms = build_layer(layers[l], where, costs, l == 0, l + 1 == layers.size());
    // Design costs for the layer above: mean energy emitted below each DM.
    std::vector<double> next;
    for (const auto& dm : dms) {
      const auto counts = dm->mean_symbol_counts();
      double c = 0.0;
      for (std::size_t s = 0; s < counts.size(); ++s)
        c += counts[s] * costs[s];
      next.push_back(c);
    }
    stack.push_back(std::move(dms));
    costs = std::move(next);
  }
  return HiDm::build(std::move(stack));
}

DmPtr build_ppm(const Json& j) {
  only_keys(j, "ppm", {"type", "base", "positions"});
  if (!j.contains("base"))
    fail("ppm", "missing 'base'");
  const auto& base = j.at("base");
  only_keys(base, "ppm base", {"dm", "N", "k", "num_dms", "alphabet_size"});
  if (get_dm(base, "ppm base") != "lut")
    fail("ppm base", "the base family must be a lut fragment");
  const int alphabet = get_int(base, "ppm base", "alphabet_size");
  const int levels = get_int(base, "ppm base", "num_dms", 1);
  const auto positions = j.contains("positions") ? get_ints(j.at("positions"), "ppm", "positions") : std::vector<int>{};
  if (int(positions.size()) + 1 != levels)
    fail("ppm", "num_dms must equal the number of positions plus one");
  auto family = build_lut_family(Alphabet(alphabet).energies(), get_int(base, "ppm base", "N"),
                                 get_int(base, "ppm base", "k"), levels);
  return ppm_build(family->luts(), positions);
}

} // namespace

DmPtr load_structure(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object())
    fail("config", "expected an object");
  if (j.contains("type")) {
    if (!j.at("type").is_string())
      fail("config", "'type' must be a string");
    const auto type = j.at("type").get<std::string>();
    if (type == "hidm")
      return build_hidm(j);
    if (type == "ppm")
      return build_ppm(j);
    fail("config", "unknown type '" + type + "'");
  }
  const int alphabet = first_alphabet(j, "dm");
  if (alphabet < 1)
    fail("dm", "alphabet_size must be positive");
  auto dms = build_layer(j, "dm", Alphabet(alphabet).energies(), true, true);
  return dms.front();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    throw IoError("cannot read '" + path + "'");
  return ss.str();
}

DmPtr load_structure_file(const std::string& path) { return load_structure(read_file(path)); }

} // namespace hidm
