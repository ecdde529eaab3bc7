#pragma once

#include <string>
#include <vector>

namespace esl {

/// One violated invariant: a stable rule id, a human-readable detail and the
/// offending element (state name, agent name, ...).
struct Violation {
  std::string rule;
  std::string detail;
  std::string element;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  void add(std::string rule, std::string detail, std::string element) {
    violations.push_back({std::move(rule), std::move(detail), std::move(element)});
  }
};

}  // namespace esl
