#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "patchdistill/change_model.hpp"
#include "patchdistill/patch_search.hpp"
#include "patchdistill/refactoring.hpp"
#include "patchdistill/source_tree.hpp"
#include "patchdistill/validation.hpp"

namespace pd {

struct ExtractOptions {
  SearchBudget budget;  // `start` is reset when extraction begins
  bool detect_refactorings = true;
  // Report reapply-conflict instead of continuing without refactorings.
  bool strict_reapply = false;
  unsigned jobs = 1;
  std::string commit_id;
};

struct StageTimes {
  double detect = 0;
  double reapply = 0;
  double suites = 0;
  double diff = 0;
  double search = 0;
  double total = 0;
};

struct CommitReport {
  std::string id;
  Outcome outcome = Outcome::ZeroCandidates;
  std::string detail;
  StageTimes times;
  double budget_secs = 0;
  std::vector<Refactoring> refactorings;
  bool refactorings_applied = false;
  std::size_t token_units = 0;  // before coarsening
  std::size_t units = 0;        // after coarsening
  std::size_t regression_tests = 0;
  std::size_t fixed_tests = 0;
  std::vector<std::string> triggering;
  std::vector<std::string> flaky;
  bool weak_regression = false;  // no regression tests to guard the search
  std::size_t candidates = 0;
  std::size_t visited = 0;
  std::size_t validations = 0;
  std::string patch_path;
  std::vector<std::string> notes;

  // 0 patch, 10 clean no-patch outcome, 20 setup or harness failure.
  int exit_code() const;
};

nlohmann::ordered_json to_json(const CommitReport& r);
CommitReport commit_report_from_json(const nlohmann::json& j);

struct ExtractResult {
  CommitReport report;
  SourceTree vprime;
  std::optional<Patch> patch;
};

// detect, reapply, prepare suites, diff, search, decide. Stage failures
// become outcomes; only programming errors escape.
ExtractResult extract(const SourceTree& old_version, const SourceTree& new_version, const Harness& harness,
                      const ExtractOptions& options);

// patch.diff and vprime/ when a patch was found; report.json always.
void write_outputs(ExtractResult& result, const std::filesystem::path& out);

}  // namespace pd
