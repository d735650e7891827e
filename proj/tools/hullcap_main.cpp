/*
 * Copyright (c) 2026 The hullcap Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hullcap/io.hpp"
#include "hullcap/pipeline.hpp"

namespace {

const char* const kStages[] = {"synth", "carve", "visibility", "aggregate", "fit", "refine", "eval"};

// First bare word on the command line, skipping option values.
std::string first_word(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" || arg == "--seed" || arg == "--out") {
      ++i;
    } else if (!arg.empty() && arg[0] != '-') {
      return arg;
    }
  }
  return {};
}

int run(const std::string& stage, const std::string& config_path, std::optional<std::int64_t> seed,
        const std::string& out) {
  hullcap::Config cfg = hullcap::Config::load(config_path);
  if (seed) cfg.set("scene.seed", std::to_string(*seed));
  if (!out.empty()) cfg.set("paths.root", out);
  hullcap::Pipeline pipeline(std::move(cfg));
  pipeline.log = [](const std::string& line) { std::cerr << line << '\n'; };

  if (stage == "synth") pipeline.synth();
  else if (stage == "carve") pipeline.carve();
  else if (stage == "visibility") pipeline.visibility();
  else if (stage == "aggregate") pipeline.aggregate();
  else if (stage == "fit") std::cout << hullcap::format_report(pipeline.fit());
  else if (stage == "refine") std::cout << hullcap::format_report(pipeline.refine());
  else if (stage == "eval") std::cout << hullcap::format_report(pipeline.eval());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hullcap: multi-view head capture on a visual-hull voxel grid"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::int64_t> seed;
  std::string out;
  app.add_option("--config", config_path, "Pipeline configuration file")->required();
  app.add_option("--seed", seed, "Overrides scene.seed");
  app.add_option("--out", out, "Overrides paths.root");

  app.add_subcommand("synth", "Generate a synthetic scene directory");
  app.add_subcommand("carve", "Carve the visual hull and derive the global grid");
  app.add_subcommand("visibility", "Render hull depths and per-voxel visibility");
  app.add_subcommand("aggregate", "Fuse image features into the global volume");
  app.add_subcommand("fit", "Train the dual estimators on the global grid");
  app.add_subcommand("refine", "Train the dual estimators on local grids");
  app.add_subcommand("eval", "Point-to-surface report of a mesh against the scan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const std::string word = first_word(argc, argv);
    if (!word.empty() && !app.get_subcommand_no_throw(word))
      std::cerr << "error: unknown subcommand '" << word << "'\n\n" << app.help();
    else
      std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  std::string stage;
  for (const char* name : kStages) {
    if (app.got_subcommand(name)) stage = name;
  }
  try {
    return run(stage, config_path, seed, out);
  } catch (const std::exception& e) {
    std::cerr << "hullcap " << stage << ": " << e.what() << '\n';
    return 1;
  }
}
