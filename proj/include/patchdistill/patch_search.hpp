#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchdistill/change_model.hpp"
#include "patchdistill/source_tree.hpp"
#include "patchdistill/validation.hpp"

namespace pd {

enum class Outcome {
  Patch,
  ZeroCandidates,
  MultipleCandidates,
  TooLarge,
  Timeout,
  NoTriggeringTest,
  ReapplyConflict,
  Unbuildable,
};

const char* to_string(Outcome o);

struct SearchBudget {
  using Clock = std::chrono::steady_clock;

  std::chrono::milliseconds wall{std::chrono::minutes(40)};
  std::size_t max_units = 30;
  // Search stops once this many distinct candidates are known; 0 never stops.
  std::size_t max_candidates = 2;
  Clock::time_point start = Clock::now();  // commit start, not search start

  Clock::time_point deadline() const { return start + wall; }
  bool expired() const { return Clock::now() >= deadline(); }
};

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Subset = std::vector<std::size_t>;  // ascending unit indices

// Non-empty subsets of {0..k-1} by ascending size, then lexicographically.
class SubsetStream {
 public:
  explicit SubsetStream(std::size_t k);
  // False once every subset was produced.
  bool next(Subset& out);
  std::uint64_t position() const { return position_; }  // of the last subset

 private:
  std::size_t k_;
  Subset cur_;
  std::uint64_t position_ = 0;
  bool started_ = false;
  bool done_ = false;
};

// Materialized stream; throws TooLarge when |chgs| > budget.max_units and
// BudgetExceeded when the deadline passes.
std::vector<Subset> enumerate(const ChangeSeq& chgs, const SearchBudget& budget);

std::uint64_t subset_mask(const Subset& s);

struct CandidatePatch {
  Subset units;
  std::uint64_t tree_hash = 0;
  std::size_t regression_passed = 0;
  std::set<std::string> triggering_passed;
  std::string diff;  // unified diff against V'_{n-1}
};

struct SearchOptions {
  unsigned jobs = 1;
};

struct SearchResult {
  std::vector<CandidatePatch> candidates;  // distinct trees, enumeration order
  std::vector<Subset> candidate_subsets;   // every visited subset that passed
  std::size_t visited = 0;
  std::size_t validations = 0;  // harness round trips (deduplicated trees skip them)
  bool stopped_early = false;
};

// Applies each subset to `vprime`, validates, collects candidates. The
// result does not depend on `options.jobs`. Throws TooLarge, BudgetExceeded,
// or std::invalid_argument for an empty triggering set.
SearchResult search(const SourceTree& vprime, const ChangeSeq& chgs, const Harness& harness, const SuitePair& suites,
                    const std::set<std::string>& triggering, const SearchBudget& budget,
                    const SearchOptions& options = {});

struct Decision {
  Outcome outcome = Outcome::ZeroCandidates;
  std::optional<Patch> patch;
};

Decision decide(const std::vector<CandidatePatch>& candidates, const ChangeSeq& chgs);

}  // namespace pd
