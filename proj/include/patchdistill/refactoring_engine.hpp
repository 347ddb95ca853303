#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "patchdistill/refactoring.hpp"
#include "patchdistill/source_tree.hpp"
#include "patchdistill/test_report.hpp"

namespace pd {

struct ReapplyPlan {
  std::vector<Refactoring> refactorings;  // detection order
  std::vector<std::string> notes;
};

class ReapplyConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replays the plan on `base` (test files included, so references from tests
// follow renames). Renames run before extracts; renames go outermost scope
// first so later subjects resolve through earlier ones. All or nothing:
// throws ReapplyConflict when a subject is missing, a new name is taken, an
// extraction is not possible, or the result does not check.
SourceTree reapply(const SourceTree& base, const ReapplyPlan& plan);

// Applies a single refactoring; same contract as reapply.
SourceTree apply_refactoring(const SourceTree& base, const Refactoring& r);

// True iff the selected tests produce identical outcome vectors on both trees.
bool verify_behavior(const SourceTree& base, const SourceTree& refactored, const TestSelection& suite);

}  // namespace pd
