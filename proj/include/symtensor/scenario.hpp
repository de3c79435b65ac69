#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symtensor/errors.hpp"
#include "symtensor/report.hpp"

namespace symt {

/// One batch verification job, parsed from the line-oriented scenario
/// format: `key = value` entries under bracketed section headers, with
/// expression values in the expression grammar.
struct Scenario {
  std::string name;
  std::string kind;  // pencil-check | saito | modified-saito | wdvv | sl2 | frobenius | conformal
  std::vector<std::string> coords;
  std::vector<std::string> symbols;
  // raw bindings in declaration order (metric entries, fields, parameters,
  // rewrite rules, catalog references)
  std::vector<std::pair<std::string, std::string>> bindings;
  std::optional<std::uint64_t> seed;

  std::optional<std::string> get(const std::string& key) const;
  std::vector<std::string> get_all(const std::string& key) const;
};

Scenario parse_scenario(const std::string& text);

struct ScenarioOutcome {
  Scenario scenario;
  std::uint64_t seed = 0;
  Report report;
  std::vector<std::string> printed;  // extra rendered values (transformed F, ...)
};

/// Executes the pipeline for the scenario kind. Scenario-level problems
/// (unknown keys, undeclared variables, bad kinds) throw ScenarioError /
/// SyntaxError; identity failures are recorded in the report.
ScenarioOutcome run_scenario(const Scenario& s, std::uint64_t seed,
                             const std::optional<std::string>& only = std::nullopt);

std::string render_human(const ScenarioOutcome& o);
std::string render_json(const ScenarioOutcome& o);

/// Scenarios compiled into the binary; `suite` runs them all.
struct BundledScenario {
  const char* name;
  const char* text;
};
const std::vector<BundledScenario>& bundled_scenarios();

}  // namespace symt
