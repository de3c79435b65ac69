#pragma once

#include <string>
#include <vector>

namespace symt {

enum class CheckStatus { pass, fail, skipped };

/// One verified identity. `name` is a stable machine-readable anchor for the
/// identity being checked; `witness` carries the first non-vanishing
/// normalized component when the check fails.
struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  std::string witness;
  std::string note;
};

struct Report {
  std::vector<CheckResult> checks;

  void add_pass(const std::string& name, const std::string& note = "") {
    checks.push_back({name, CheckStatus::pass, "", note});
  }
  void add_fail(const std::string& name, const std::string& witness,
                const std::string& note = "") {
    checks.push_back({name, CheckStatus::fail, witness, note});
  }
  void add_skip(const std::string& name, const std::string& note = "") {
    checks.push_back({name, CheckStatus::skipped, "", note});
  }
  void add(const std::string& name, bool ok, const std::string& witness = "",
           const std::string& note = "") {
    if (ok)
      add_pass(name, note);
    else
      add_fail(name, witness, note);
  }
  void merge(const Report& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }

  bool all_passed() const {
    for (const auto& c : checks)
      if (c.status == CheckStatus::fail) return false;
    return true;
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

}  // namespace symt
