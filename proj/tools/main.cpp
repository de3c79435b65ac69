#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "symtensor/saito.hpp"
#include "symtensor/scenario.hpp"

namespace {

int run_one(const std::string& text, std::uint64_t seed,
            const std::optional<std::string>& only, const std::string& json_path) {
  symt::ScenarioOutcome outcome;
  try {
    symt::Scenario s = symt::parse_scenario(text);
    outcome = symt::run_scenario(s, seed, only);
  } catch (const symt::Error& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  }
  std::cout << symt::render_human(outcome);
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) {
      std::cerr << "cannot write " << json_path << "\n";
      return 2;
    }
    out << symt::render_json(outcome);
  }
  return outcome.report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact verification of metric-pencil and prepotential identities"};
  app.require_subcommand(1);

  std::string json_path;
  std::uint64_t seed = 20240917ull;
  std::string only;
  app.add_option("--json", json_path, "write the machine-readable report to this path");
  app.add_option("--seed", seed, "seed for the rational sample points");
  app.add_option("--only", only, "run only the identity with this name");

  std::string file;
  CLI::App* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("file", file, "scenario file")->required();
  run->fallthrough();

  CLI::App* list = app.add_subcommand("list-catalog", "print the built-in group catalog");
  list->fallthrough();

  CLI::App* suite = app.add_subcommand("suite", "run all bundled scenarios");
  suite->fallthrough();

  CLI11_PARSE(app, argc, argv);
  std::optional<std::string> only_opt;
  if (!only.empty()) only_opt = only;

  if (run->parsed()) {
    std::ifstream in(file);
    if (!in) {
      std::cerr << "cannot read " << file << "\n";
      return 2;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return run_one(buf.str(), seed, only_opt, json_path);
  }

  if (list->parsed()) {
    std::cout << "built-in groups:\n";
    for (const auto& name : symt::catalog_names()) {
      if (name == "I2(m)") {
        std::cout << "  I2(m), m >= 3 (parametric)\n";
        continue;
      }
      symt::CoxeterDatum cd = symt::catalog_entry(name);
      std::cout << "  " << cd.name << ": degrees";
      for (long d : cd.degrees) std::cout << " " << d;
      std::cout << "\n";
      for (std::size_t i = 0; i < cd.invariants.size(); ++i)
        std::cout << "    t" << (i + 1) << " = "
                  << symt::to_string(cd.invariants[i]) << "\n";
    }
    symt::CoxeterDatum i25 = symt::catalog_entry("I2(5)");
    std::cout << "  I2(5) sample: t1 = " << symt::to_string(i25.invariants[0]) << "\n";
    return 0;
  }

  if (suite->parsed()) {
    int failures = 0;
    std::ostringstream all_json;
    all_json << "[\n";
    bool first = true;
    for (const auto& b : symt::bundled_scenarios()) {
      std::cout << "=== " << b.name << " ===\n";
      symt::ScenarioOutcome outcome;
      try {
        symt::Scenario s = symt::parse_scenario(b.text);
        outcome = symt::run_scenario(s, seed, only_opt);
      } catch (const symt::Error& e) {
        std::cerr << "scenario error in " << b.name << ": " << e.what() << "\n";
        return 2;
      }
      std::cout << symt::render_human(outcome) << "\n";
      if (!outcome.report.all_passed()) ++failures;
      if (!first) all_json << ",\n";
      first = false;
      all_json << symt::render_json(outcome);
    }
    all_json << "]\n";
    if (!json_path.empty()) {
      std::ofstream out(json_path);
      out << all_json.str();
    }
    std::cout << (failures == 0 ? "suite: all scenarios passed"
                                : "suite: " + std::to_string(failures) + " scenario(s) failed")
              << "\n";
    return failures == 0 ? 0 : 1;
  }
  return 2;
}
