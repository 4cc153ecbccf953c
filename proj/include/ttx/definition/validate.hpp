#pragma once

#include <string>
#include <vector>

#include "ttx/definition/model.hpp"

namespace ttx::definition {

struct ValidationReport {
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool ok() const { return errors.empty(); }
};

// Checks every structural invariant of a definition (unique ids, resolvable
// references, time bounds, pattern compilation, template placeholders, ...)
// and adds reachability findings as warnings.
ValidationReport Validate(const ExerciseDefinition& definition);

// Static reachability of injects, tools and milestones from exercise start.
//
// "Automatic" reachability assumes trainees may invoke any available tool and
// email any address at any time, and that a deadline trigger may always fire.
// Items reachable only when an instructor delivers a Manual inject are listed
// as manual-only rather than unreachable.
struct ReachabilityReport {
  std::vector<std::string> unreachable_injects;
  std::vector<std::string> manual_only_injects;
  std::vector<std::string> unsatisfiable_milestones;
  std::vector<std::string> manual_only_milestones;
  std::vector<std::string> locked_tools;  // never unlocked, even with instructor help
};

ReachabilityReport LintReachability(const ExerciseDefinition& definition);

}  // namespace ttx::definition
