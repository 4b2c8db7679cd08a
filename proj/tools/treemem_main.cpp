#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "treemem/errors.hpp"
#include "treemem/report.hpp"

// treemem <mode> --config <path> [--out <dir>]
//
// The positional mode must agree with the config's "mode" field; a config
// without one inherits it from the command line. Exit codes: 0 success,
// 2 validation error, 3 solver failure, 4 invariant violation.
int main(int argc, char** argv) {
  CLI::App app{"Solvers for averaging operators on truncated regular trees: single "
               "Dirichlet equation, obstacle problems, the two membranes problem, and a "
               "Monte Carlo check via the two-board game"};
  app.name("treemem");

  std::string mode, config_path, out_dir;
  app.add_option("mode", mode, "single|obstacle|tmp|game|check")->required();
  app.add_option("--config", config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default: config out_dir or '.')");

  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    nlohmann::json raw;
    try {
      in >> raw;
    } catch (const nlohmann::json::parse_error& e) {
      throw treemem::Error(treemem::Errc::InvalidConfig,
                           std::string("config is not valid JSON: ") + e.what());
    }
    if (!raw.is_object()) throw treemem::Error(treemem::Errc::InvalidConfig, "config must be a JSON object");
    if (!raw.contains("mode"))
      raw["mode"] = mode;
    else if (raw["mode"] != mode)
      throw treemem::Error(treemem::Errc::InvalidConfig,
                           "command-line mode disagrees with the config's mode");
    return treemem::run_config(raw, out_dir);
  } catch (const treemem::Error& e) {
    std::cerr << "treemem: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "treemem: " << e.what() << "\n";
    return 3;
  }
}
