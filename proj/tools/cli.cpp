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

#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hidm/config.hpp"
#include "hidm/core.hpp"
#include "hidm/hierarchy.hpp"
#include "hidm/ppm.hpp"
#include "hidm/sweeps.hpp"

#ifndef HIDM_VERSION
#define HIDM_VERSION "0.0.0"
#endif

namespace hidm::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string in;
  std::string out;
  std::string target = "507/320";
  std::string mode = "mb";
  std::uint64_t seed = 1;
  int layers = 5;

  // verify / gen
  std::uint64_t samples = 1000;
  std::uint64_t exhaustive_limit = std::uint64_t(1) << 16;
  std::uint64_t count = 10000;

  // sweep ccdm2
  std::string ccdm_target = "159/100";
  int n1 = 32;
  int alphabet = 4;
  int num_inner = 8;
  int n2 = 10;
  std::string grid_lo = "7/5";
  std::string grid_hi = "17/10";
  int grid_points = 7;

  // sweep ppm
  int ppm_n1 = 10;
  int ppm_layers = 4;
  int k1_min = 1;
  int k1_max = 20;
  std::string positions = "2-4-8-16-32-64-128-256-512-1024";
  int cap_ntot = 1024;

  // sweep lutsearch
  std::uint64_t memory_cap = 102400;
  std::string dm_grid = "2-4-8-16-32-64-128";
  std::string scales = "1";
  int k_max = 40;
  std::string ref_n = "20-32-40-64-80-160-320";
  bool frontier_only = false;
};

/// Output sink: the named file, or the caller's stream when no path is set.
class Sink {
public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_)
        throw IoError("cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }
  void close(const std::string& path) {
    stream_->flush();
    if (!*stream_)
      throw IoError("write to '" + (path.empty() ? std::string("stdout") : path) + "' failed");
  }

private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!line.empty())
      out.push_back(line);
  }
  return out;
}

Json number_or_string(const BigUint& v) {
  if (v <= std::numeric_limits<std::uint64_t>::max())
    return Json(static_cast<std::uint64_t>(v));
  return Json(v.str());
}

Json real(double x) {
  if (std::isnan(x))
    return Json(nullptr);
  return Json(x);
}

Json int_vector(const std::vector<int>& v) { return Json(v); }

Json structure_json(const DistributionMatcher& dm) {
  Json j;
  j["kind"] = std::string(to_string(dm.kind()));
  if (const auto* h = dynamic_cast<const HiDm*>(&dm)) {
    j["L"] = h->layer_count();
    j["N_vec"] = int_vector(h->n_vec());
    j["k_vec"] = int_vector(h->k_vec());
    j["M_vec"] = int_vector(h->m_vec());
    j["num_dms_vec"] = int_vector(h->num_dms_vec());
  } else if (const auto* p = dynamic_cast<const PpmStructure*>(&dm)) {
    j["L"] = p->levels();
    j["N1"] = p->base().front()->block_length();
    j["k1"] = p->base().front()->input_bits();
    j["positions"] = int_vector(p->positions());
  }
  return j;
}

int cmd_info(const Options& o, std::ostream& out) {
  const auto dm = load_structure_file(o.config);
  const auto m = metrics(*dm);
  const auto mode = parse_loss_mode(o.mode);
  Json j = structure_json(*dm);
  j["N_total"] = dm->block_length();
  j["K_total"] = dm->input_bits();
  j["rate"] = to_string(m.rate);
  j["rate_decimal"] = real(to_double(m.rate));
  j["mean_energy_per_symbol"] = real(m.mean_energy_per_symbol);
  Json dist = Json::array();
  for (double p : m.amplitude_distribution)
    dist.push_back(real(p));
  j["amplitude_distribution"] = dist;
  j["mode"] = std::string(to_string(mode));
  j["rate_loss"] = real(mode == LossMode::induced ? m.rate_loss_induced : m.rate_loss_mb);
  j["rate_loss_mb"] = real(m.rate_loss_mb);
  j["rate_loss_induced"] = real(m.rate_loss_induced);
  j["memory_bits"] = number_or_string(m.memory_bits);
  Json layers = Json::array();
  for (const auto& b : m.layer_memory_bits)
    layers.push_back(number_or_string(b));
  j["layer_memory_bits"] = layers;
  Sink sink(o.out, out);
  *sink << j.dump(2) << '\n';
  sink.close(o.out);
  return ok;
}

int cmd_encode(const Options& o, std::ostream& out) {
  const auto dm = load_structure_file(o.config);
  const auto lines = lines_of(read_file(o.in));
  Sink sink(o.out, out);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto bits = BitWord::parse(lines[i]);
    if (int(bits.length()) != dm->input_bits())
      throw Error(ErrorCode::LengthMismatch, "line " + std::to_string(i + 1) + " has " +
                                                 std::to_string(bits.length()) + " bits, expected " +
                                                 std::to_string(dm->input_bits()));
    const auto amps = to_amplitudes(dm->encode_bits(bits));
    for (std::size_t t = 0; t < amps.size(); ++t)
      *sink << (t ? " " : "") << amps[t];
    *sink << '\n';
  }
  sink.close(o.out);
  return ok;
}

std::vector<int> parse_amplitudes(const std::string& line, std::size_t line_no) {
  std::vector<int> amps;
  std::istringstream in(line);
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size())
      throw Error(ErrorCode::InvalidArgument,
                  "line " + std::to_string(line_no) + ": '" + token + "' is not an integer amplitude");
    amps.push_back(v);
  }
  return amps;
}

int cmd_decode(const Options& o, std::ostream& out) {
  const auto dm = load_structure_file(o.config);
  const Alphabet alphabet(dm->alphabet_size());
  const auto lines = lines_of(read_file(o.in));
  Sink sink(o.out, out);
  // The layered decoders report which layer and block failed.
  const auto* hidm = dynamic_cast<const HiDm*>(dm.get());
  const auto* ppm = dynamic_cast<const PpmStructure*>(dm.get());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      const auto seq = to_symbols(parse_amplitudes(lines[i], i + 1), alphabet);
      const BitWord bits = hidm ? hidm->decode_checked(seq) : ppm ? ppm->decode_checked(seq) : dm->decode_bits(seq);
      *sink << bits.to_string() << '\n';
    } catch (const Error& e) {
      std::string_view what = e.what();
      const auto prefix = std::string(to_string(e.code())) + ": ";
      if (what.starts_with(prefix))
        what.remove_prefix(prefix.size());
      if (what.starts_with("line "))
        throw;
      throw Error(e.code(), "line " + std::to_string(i + 1) + ": " + std::string(what), e.layer(), e.position());
    }
  }
  sink.close(o.out);
  return ok;
}

int cmd_gen(const Options& o, std::ostream& out) {
  const auto dm = load_structure_file(o.config);
  std::mt19937_64 rng(o.seed);
  Sink sink(o.out, out);
  std::string line(std::size_t(dm->input_bits()), '0');
  for (std::uint64_t i = 0; i < o.count; ++i) {
    for (auto& c : line)
      c = (rng() >> 63) ? '1' : '0';
    *sink << line << '\n';
  }
  sink.close(o.out);
  return ok;
}

Json disjoint_json(const DisjointReport& r, int layer) {
  Json j;
  j["layer"] = layer;
  j["disjoint"] = r.disjoint;
  j["method"] = r.method;
  if (!r.disjoint) {
    j["first"] = r.first;
    j["second"] = r.second;
    j["witness"] = sequence_to_string(r.witness);
  }
  return j;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const auto dm = load_structure_file(o.config);
  const auto report = verify_dm(*dm, o.exhaustive_limit, o.seed, o.samples);
  bool passed = report.passed();

  Json disjoint = Json::array();
  auto check_layer = [&](std::span<const DmPtr> dms, int layer) {
    if (dms.size() < 2)
      return;
    try {
      const auto r = verify_disjoint(dms);
      passed = passed && r.disjoint;
      disjoint.push_back(disjoint_json(r, layer));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Unverifiable)
        throw;
      Json j;
      j["layer"] = layer;
      j["disjoint"] = nullptr;
      j["method"] = "unverifiable";
      disjoint.push_back(j);
    }
  };
  if (const auto* h = dynamic_cast<const HiDm*>(dm.get()))
    for (int l = 1; l <= h->layer_count(); ++l)
      check_layer(h->layer(l), l);
  else if (const auto* p = dynamic_cast<const PpmStructure*>(dm.get()))
    check_layer(p->base(), 1);

  Json j;
  j["passed"] = passed;
  j["exhaustive"] = report.exhaustive;
  j["inputs_checked"] = report.inputs_checked;
  j["seed"] = o.seed;
  j["mean_cost"] = real(dm->mean_cost());
  if (report.mean_cost_checked)
    j["brute_force_mean_cost"] = real(report.brute_force_mean_cost);
  Json violations = Json::array();
  for (const auto& v : report.violations)
    violations.push_back(Json{{"check", v.check}, {"witness", v.witness}});
  j["violations"] = violations;
  j["disjoint"] = disjoint;
  Sink sink(o.out, out);
  *sink << j.dump(2) << '\n';
  sink.close(o.out);
  return passed ? ok : validation;
}

CsvMetadata base_metadata(const Options& o, const std::string& sweep) {
  return {{"tool", std::string("hidm ") + HIDM_VERSION},
          {"sweep", sweep},
          {"mode", std::string(to_string(parse_loss_mode(o.mode)))},
          {"kbit", "1024"},
          {"seed", std::to_string(o.seed)}};
}

int write_records(const Options& o, std::ostream& out, std::span<const SweepRecord> records,
                  const CsvMetadata& metadata) {
  Sink sink(o.out, out);
  write_csv(*sink, records, metadata);
  sink.close(o.out);
  return ok;
}

int cmd_sweep_ccdm2(const Options& o, std::ostream& out) {
  const Alphabet alphabet(o.alphabet);
  const auto target = parse_rational(o.ccdm_target);
  const auto grid = rate_grid(parse_rational(o.grid_lo), parse_rational(o.grid_hi), o.grid_points);
  auto records = sweep_ccdm_2layer(o.n1, alphabet, o.num_inner, o.n2, target, grid);
  sort_records(records);
  auto meta = base_metadata(o, "ccdm2");
  meta.insert(meta.end(), {{"N1", std::to_string(o.n1)},
                           {"alphabet_size", std::to_string(o.alphabet)},
                           {"num_inner", std::to_string(o.num_inner)},
                           {"N2", std::to_string(o.n2)},
                           {"target", to_string(target)},
                           {"inner_grid", o.grid_lo + ".." + o.grid_hi + " x" + std::to_string(o.grid_points)}});
  return write_records(o, out, records, meta);
}

int cmd_sweep_ppm(const Options& o, std::ostream& out) {
  const Alphabet alphabet(o.alphabet);
  if (o.k1_min > o.k1_max)
    throw Error(ErrorCode::InvalidArgument, "--k1-min exceeds --k1-max");
  std::vector<int> k1;
  for (int k = o.k1_min; k <= o.k1_max; ++k)
    k1.push_back(k);
  const auto positions = split_ints(o.positions);
  auto records = sweep_ppm(o.ppm_n1, alphabet, k1, o.ppm_layers, positions, o.cap_ntot);
  sort_records(records);
  auto meta = base_metadata(o, "ppm");
  meta.insert(meta.end(), {{"N1", std::to_string(o.ppm_n1)},
                           {"alphabet_size", std::to_string(o.alphabet)},
                           {"k1_range", std::to_string(o.k1_min) + ".." + std::to_string(o.k1_max)},
                           {"L_max", std::to_string(o.ppm_layers)},
                           {"position_grid", o.positions},
                           {"cap_Ntot", std::to_string(o.cap_ntot)}});
  return write_records(o, out, records, meta);
}

int cmd_sweep_lutsearch(const Options& o, std::ostream& out) {
  LutSearchOptions s;
  s.target = parse_rational(o.target);
  s.alphabet_size = o.alphabet;
  s.layers.clear();
  for (int l = 1; l <= o.layers; ++l)
    s.layers.push_back(l);
  s.scales = split_ints(o.scales);
  s.dm_grid = split_ints(o.dm_grid);
  s.k_max = o.k_max;
  s.memory_cap = o.memory_cap;
  s.keep_all = !o.frontier_only;
  auto result = search_lut_hidm(s);

  std::vector<SweepRecord> records = o.frontier_only ? result.frontier : std::move(result.evaluated);
  const Alphabet alphabet(o.alphabet);
  for (int n : split_ints(o.ref_n)) {
    const auto k = std::int64_t(n) * s.target.numerator() / s.target.denominator();
    records.push_back(lut_reference(n, int(k), alphabet));
    records.push_back(ess_reference(n, int(k), alphabet));
  }
  sort_records(records);
  auto meta = base_metadata(o, "lutsearch");
  meta.insert(meta.end(), {{"target", to_string(s.target)},
                           {"alphabet_size", std::to_string(o.alphabet)},
                           {"L_max", std::to_string(o.layers)},
                           {"scales", o.scales},
                           {"dm_grid", o.dm_grid},
                           {"k_max", std::to_string(o.k_max)},
                           {"memory_cap_bits", std::to_string(o.memory_cap)},
                           {"candidates", std::to_string(result.candidates)},
                           {"frontier_size", std::to_string(result.frontier.size())},
                           {"reference_N", o.ref_n}});
  return write_records(o, out, records, meta);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Hierarchical distribution matching toolkit", "hidm"};
  app.set_version_flag("--version", HIDM_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", o.seed, "Seed for sampled checks and generated inputs");
  app.add_option("--mode", o.mode, "Headline rate-loss mode")->check(CLI::IsMember({"mb", "induced"}));

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Structure description (JSON)")->required();
    sub->add_option("--out", o.out, "Output file (default stdout)");
    sub->fallthrough();
  };

  auto* info = app.add_subcommand("info", "Print the metrics of a structure as JSON");
  info->alias("build");
  with_config(info);

  auto* encode = app.add_subcommand("encode", "Map bit lines to amplitude lines");
  with_config(encode);
  encode->add_option("--in", o.in, "Bits file, one codeword per line")->required();

  auto* decode = app.add_subcommand("decode", "Map amplitude lines back to bit lines");
  with_config(decode);
  decode->add_option("--in", o.in, "Amplitudes file, one codeword per line")->required();

  auto* gen = app.add_subcommand("gen", "Write random bit lines for a structure");
  with_config(gen);
  gen->add_option("--count", o.count, "Number of lines");

  auto* verify = app.add_subcommand("verify", "Check bijectivity, support and disjointness");
  with_config(verify);
  verify->add_option("--samples", o.samples, "Random inputs when not exhaustive");
  verify->add_option("--exhaustive-limit", o.exhaustive_limit, "Largest 2^K checked exhaustively");

  auto* sweep = app.add_subcommand("sweep", "Write a parameter sweep as CSV");
  sweep->require_subcommand(1);
  sweep->fallthrough();

  auto* ccdm2 = sweep->add_subcommand("ccdm2", "Two-layer CCDM cloud");
  ccdm2->fallthrough();
  ccdm2->add_option("--out", o.out, "CSV path (default stdout)");
  ccdm2->add_option("--target", o.ccdm_target, "Target rate of D_1");
  ccdm2->add_option("--n1", o.n1, "Inner block length");
  ccdm2->add_option("--alphabet", o.alphabet, "Amplitude count");
  ccdm2->add_option("--num-inner", o.num_inner, "Number of inner CCDMs");
  ccdm2->add_option("--n2", o.n2, "Outer block length");
  ccdm2->add_option("--grid-lo", o.grid_lo, "Lowest inner grid rate");
  ccdm2->add_option("--grid-hi", o.grid_hi, "Highest inner grid rate");
  ccdm2->add_option("--grid-points", o.grid_points, "Inner grid size");

  auto* ppm = sweep->add_subcommand("ppm", "Pulse-position hierarchy over a LUT base");
  ppm->fallthrough();
  ppm->add_option("--out", o.out, "CSV path (default stdout)");
  ppm->add_option("--n1", o.ppm_n1, "Base block length");
  ppm->add_option("--alphabet", o.alphabet, "Amplitude count");
  ppm->add_option("--k1-min", o.k1_min, "Smallest base k");
  ppm->add_option("--k1-max", o.k1_max, "Largest base k");
  ppm->add_option("--layers", o.ppm_layers, "Largest L");
  ppm->add_option("--positions", o.positions, "Allowed position counts, '-'-joined powers of two");
  ppm->add_option("--cap-ntot", o.cap_ntot, "Bound on the product of position counts");

  auto* lut = sweep->add_subcommand("lutsearch", "Exact-rate LUT hierarchy search");
  lut->fallthrough();
  lut->add_option("--out", o.out, "CSV path (default stdout)");
  lut->add_option("--target", o.target, "Exact target rate");
  lut->add_option("--alphabet", o.alphabet, "Amplitude count");
  lut->add_option("--layers", o.layers, "Largest L");
  lut->add_option("--memory-cap", o.memory_cap, "Table memory bound in bits");
  lut->add_option("--dm-grid", o.dm_grid, "LUT counts below the top layer, '-'-joined");
  lut->add_option("--scales", o.scales, "Multiples of the target denominator, '-'-joined");
  lut->add_option("--k-max", o.k_max, "Largest per-layer k");
  lut->add_option("--ref-n", o.ref_n, "Block lengths of the single-LUT and ESS reference rows");
  lut->add_flag("--frontier-only", o.frontier_only, "Omit dominated candidates");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : validation;
  }

  try {
    if (*info)
      return cmd_info(o, out);
    if (*encode)
      return cmd_encode(o, out);
    if (*decode)
      return cmd_decode(o, out);
    if (*gen)
      return cmd_gen(o, out);
    if (*verify)
      return cmd_verify(o, out);
    if (*ccdm2)
      return cmd_sweep_ccdm2(o, out);
    if (*ppm)
      return cmd_sweep_ppm(o, out);
    if (*lut)
      return cmd_sweep_lutsearch(o, out);
  } catch (const IoError& e) {
    err << "hidm: " << e.what() << '\n';
    return io;
  } catch (const Error& e) {
    err << "hidm: " << e.what() << '\n';
    return validation;
  } catch (const std::bad_alloc&) {
    err << "hidm: out of memory\n";
    return validation;
  }
  return validation;
}

} // namespace hidm::cli
