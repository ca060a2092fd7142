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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../tools/cli.hpp"
#include "hidm/config.hpp"
#include "hidm/sweeps.hpp"

using namespace hidm;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

const char* const kTwoLayer = R"({"type":"hidm","layers":[
  {"dm":"lut","N":3,"k":4,"num_dms":3,"alphabet_size":4},
  {"dm":"lut","N":3,"k":3,"num_dms":1,"alphabet_size":3}]})";

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    out.push_back(l);
  return out;
}

} // namespace

TEST_CASE("info reports exact rate and memory") {
  write("cli_two_layer.json", kTwoLayer);
  const auto r = run({"info", "--config", "cli_two_layer.json"});
  REQUIRE(r.code == cli::ok);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["rate"] == "5/3");
  CHECK(j["K_total"] == 15);
  CHECK(j["N_total"] == 9);
  CHECK(j["memory_bits"] == 336);
  CHECK(j["layer_memory_bits"] == nlohmann::json::array({288, 48}));
  CHECK(j["rate_loss"] == j["rate_loss_mb"]);

  const auto induced = nlohmann::json::parse(run({"--mode", "induced", "info", "--config", "cli_two_layer.json"}).out);
  CHECK(induced["mode"] == "induced");
  CHECK(induced["rate_loss"] == induced["rate_loss_induced"]);
}

TEST_CASE("generated bits survive encode and decode") {
  write("cli_two_layer.json", kTwoLayer);
  REQUIRE(run({"--seed", "11", "gen", "--config", "cli_two_layer.json", "--count", "10000", "--out", "cli_bits.txt"})
              .code == cli::ok);
  REQUIRE(run({"encode", "--config", "cli_two_layer.json", "--in", "cli_bits.txt", "--out", "cli_amps.txt"}).code ==
          cli::ok);
  REQUIRE(run({"decode", "--config", "cli_two_layer.json", "--in", "cli_amps.txt", "--out", "cli_back.txt"}).code ==
          cli::ok);
  const auto bits = lines(read_file("cli_bits.txt"));
  const auto amps = lines(read_file("cli_amps.txt"));
  CHECK(bits.size() == 10000u);
  CHECK(bits == lines(read_file("cli_back.txt")));
  for (std::size_t i = 0; i < amps.size(); i += 1000) {
    std::istringstream in(amps[i]);
    int a = 0, count = 0;
    while (in >> a) {
      ++count;
      CHECK((a == 1 || a == 3 || a == 5 || a == 7));
    }
    CHECK(count == 9);
  }

  // Same seed, same bits; another seed, other bits.
  CHECK(run({"--seed", "11", "gen", "--config", "cli_two_layer.json", "--count", "10000"}).out ==
        read_file("cli_bits.txt"));
  CHECK(run({"--seed", "12", "gen", "--config", "cli_two_layer.json", "--count", "10000"}).out !=
        read_file("cli_bits.txt"));
}

TEST_CASE("exit codes") {
  write("cli_two_layer.json", kTwoLayer);
  CHECK(run({"info", "--config", "cli_missing.json"}).code == cli::io);
  CHECK(run({"info"}).code == cli::validation);
  CHECK(run({"info", "--config", "cli_two_layer.json", "--bogus"}).code == cli::validation);
  CHECK(run({}).code == cli::validation);

  write("cli_bad.json", R"({"dm":"lut","N":4,"k":5,"alphabet_size":4,"extra":0})");
  const auto bad = run({"info", "--config", "cli_bad.json"});
  CHECK(bad.code == cli::validation);
  CHECK(bad.err.find("Config") != std::string::npos);

  write("cli_amps_bad.txt", "1 1 1 1 1 1 1 1 1\n7 7 7 7 7 7 7 7 7\n");
  const auto dec = run({"decode", "--config", "cli_two_layer.json", "--in", "cli_amps_bad.txt"});
  CHECK(dec.code == cli::validation);
  CHECK(dec.err.find("line 2") != std::string::npos);
  CHECK(dec.err.find("Undecodable") != std::string::npos);

  write("cli_bits_bad.txt", "0101\n");
  CHECK(run({"encode", "--config", "cli_two_layer.json", "--in", "cli_bits_bad.txt"}).code == cli::validation);
  CHECK(run({"encode", "--config", "cli_two_layer.json", "--in", "cli_two_layer.json", "--out",
             "/nonexistent/dir/out.txt"})
            .code != cli::ok);
}

TEST_CASE("verify") {
  write("cli_two_layer.json", kTwoLayer);
  const auto r = run({"verify", "--config", "cli_two_layer.json"});
  CHECK(r.code == cli::ok);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["passed"] == true);
  CHECK(j["exhaustive"] == true);
  CHECK(j["inputs_checked"] == 32768);

  const auto sampled = nlohmann::json::parse(
      run({"verify", "--config", "cli_two_layer.json", "--exhaustive-limit", "1024", "--samples", "300"}).out);
  CHECK(sampled["exhaustive"] == false);
  CHECK(sampled["inputs_checked"] == 300);
}

TEST_CASE("sweeps write readable CSV") {
  SUBCASE("ppm") {
    const auto r = run({"sweep", "ppm", "--n1", "3", "--k1-min", "1", "--k1-max", "4", "--layers", "3", "--positions",
                        "2-4-8", "--cap-ntot", "32", "--out", "cli_ppm.csv"});
    REQUIRE(r.code == cli::ok);
    std::ifstream in("cli_ppm.csv");
    CsvMetadata meta;
    const auto rows = read_csv(in, &meta);
    CHECK_FALSE(rows.empty());
    bool tool = false, sweep = false;
    for (const auto& [k, v] : meta) {
      tool = tool || (k == "tool" && v.rfind("hidm", 0) == 0);
      sweep = sweep || (k == "sweep" && v == "ppm");
    }
    CHECK(tool);
    CHECK(sweep);
  }
  SUBCASE("ccdm2") {
    const auto r = run({"sweep", "ccdm2", "--n1", "8", "--num-inner", "3", "--n2", "3", "--target", "5/4"});
    REQUIRE(r.code == cli::ok);
    std::istringstream in(r.out);
    const auto rows = read_csv(in);
    CHECK(rows.size() == 3u + 10u);
  }
  SUBCASE("lutsearch") {
    const auto r = run({"sweep", "lutsearch", "--target", "13/8", "--layers", "2", "--memory-cap", "65536",
                        "--dm-grid", "2-4", "--k-max", "20", "--ref-n", "8-16", "--frontier-only"});
    REQUIRE(r.code == cli::ok);
    std::istringstream in(r.out);
    const auto rows = read_csv(in);
    int refs = 0;
    for (const auto& row : rows)
      refs += row.kind == "lut_ref" || row.kind == "ess_ref";
    CHECK(refs == 4);
    CHECK(rows.size() > 4u);
  }
  CHECK(run({"sweep", "lutsearch", "--target", "x"}).code == cli::validation);
  CHECK(run({"sweep", "ppm", "--positions", "3"}).code == cli::validation);
}
