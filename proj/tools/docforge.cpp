/* Copyright 2026 The Docforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// docforge command-line entry point.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "docforge/config.hpp"
#include "docforge/errors.hpp"
#include "docforge/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Document-level pretraining experiments on synthetic corpora"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  for (const auto& name : docforge::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "run config file")->required();
    sub->add_option("--set", overrides, "override a config entry (key=value)");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto config = docforge::Config::load(config_path);
    for (const auto& o : overrides) config.apply_override(o);
    docforge::run_command(command, config, std::cout, std::cerr);
  } catch (const docforge::ParseError& e) {
    std::cerr << "docforge " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const docforge::ConfigError& e) {
    std::cerr << "docforge " << command << ": config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "docforge " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
