// Copyright 2026 The voipqos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: run scenarios, regenerate the knowledge seed,
// list and dump presets.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "voipqos/error.hpp"
#include "voipqos/harness.hpp"
#include "voipqos/kernels.hpp"

using namespace voipqos;

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop QoS control for simulated VoIP calls"};
  app.require_subcommand(1);

  std::string scenario;
  std::uint64_t seed = 1;
  std::string mode = "control";
  std::string learning;
  std::string out_dir = "out";
  if (const char* env = std::getenv("VOIPQOS_OUT")) out_dir = env;

  auto* run = app.add_subcommand("run", "Run a scenario");
  run->add_option("--scenario", scenario, "Preset name or scenario JSON file")->required();
  run->add_option("--seed", seed, "RNG seed");
  run->add_option("--mode", mode, "calibrate | control | baseline")
      ->check(CLI::IsMember({"calibrate", "control", "baseline"}));
  run->add_option("--learning", learning, "on | off (default: scenario setting)")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--out", out_dir, "Output directory");

  std::string emit_seed;
  auto* cal = app.add_subcommand("calibrate", "Measure every catalog action and print the knowledge seed");
  cal->add_option("--seed", seed, "RNG seed");
  cal->add_option("--emit-seed", emit_seed, "Write the seed table include file here");

  auto* list = app.add_subcommand("presets", "List built-in scenarios");
  std::string dump_name;
  auto* dump = app.add_subcommand("scenario", "Print a preset as JSON");
  dump->add_option("name", dump_name, "Preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      for (const auto& n : harness::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (*dump) {
      const auto s = harness::preset(dump_name);
      if (!s) {
        std::cerr << "unknown preset '" << dump_name << "'\n";
        return 1;
      }
      std::cout << harness::to_json(*s).dump(2) << "\n";
      return 0;
    }
    if (*cal) {
      const auto kb_seed = harness::calibrate(seed);
      const auto table = harness::emit_seed_table(kb_seed);
      if (emit_seed.empty()) {
        std::cout << table;
      } else {
        std::ofstream f(emit_seed, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + emit_seed);
        f << table;
      }
      return 0;
    }

    const auto sc = harness::load_scenario(scenario);
    harness::RunOptions opts;
    opts.seed = seed;
    opts.mode = harness::parse_mode(mode);
    if (!learning.empty()) opts.learning = learning == "on";
    const auto result = harness::run(sc, opts);
    harness::write_outputs(result, out_dir);

    const auto& s = result.summary;
    std::fprintf(stderr, "%s seed=%llu mode=%s isa=%s\n", sc.name.c_str(), static_cast<unsigned long long>(seed),
                 mode.c_str(), std::string(kernels::to_string(kernels::active_isa())).c_str());
    for (const auto& c : s["calls"]) {
      std::fprintf(stderr, "  call %d: delay %.1f ms, loss %.4f, MOS %.2f, windows ok %.0f%%\n",
                   c["call_id"].get<int>(), c["avg_delay_ms"].get<double>(), c["avg_loss"].get<double>(),
                   c["mos"].get<double>(), 100.0 * c["satisfaction_fraction"].get<double>());
    }
    if (opts.mode == harness::Mode::Control && !result.constraints_satisfied()) return 2;
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
