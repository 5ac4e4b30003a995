#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "squatguard/errors.hpp"
#include "squatguard/scenarios.hpp"

namespace sg = squatguard;

int main(int argc, char** argv) {
  CLI::App app{"squatguard attack scenario runner"};
  app.require_subcommand(1);

  sg::ScenarioOptions opts;
  std::string id, report_path;

  CLI::App* run = app.add_subcommand("run", "replay one scenario");
  run->add_option("--id", id, "S1 or S2")->required();
  run->add_option("--mode", opts.mode, "dual_approval or single_admin");
  run->add_option("--variant", opts.variant, "attack or control");
  run->add_option("--ablation", opts.ablation,
                  "none, signing, dual_approval, or trust_floor");
  run->add_flag("--clean-sbom", opts.clean_sbom,
                "S2: the look-alike declares a clean dependency set");
  run->add_option("--seed", opts.seed, "deterministic seed (default 42)");
  run->add_option("--report", report_path, "also write the report JSON here");

  CLI::App* list = app.add_subcommand("list", "list scenario ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  if (list->parsed()) {
    for (const auto& s : sg::scenario_ids()) std::cout << s << "\n";
    return 0;
  }

  try {
    sg::ScenarioReport rep = sg::run_scenario(id, opts);
    std::string rendered = rep.to_json().dump(2);
    std::cout << rendered << "\n";
    if (!report_path.empty()) {
      std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
      out << rendered << "\n";
      if (!out) {
        std::cerr << "error: could not write report: " << report_path << "\n";
        return 1;
      }
    }
    return rep.overall_pass ? 0 : 1;
  } catch (const sg::ApiError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
