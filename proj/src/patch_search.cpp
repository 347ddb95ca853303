#include "patchdistill/patch_search.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

namespace pd {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Patch:
      return "patch";
    case Outcome::ZeroCandidates:
      return "zero-candidates";
    case Outcome::MultipleCandidates:
      return "multiple-candidates";
    case Outcome::TooLarge:
      return "too-large";
    case Outcome::Timeout:
      return "timeout";
    case Outcome::NoTriggeringTest:
      return "no-triggering-test";
    case Outcome::ReapplyConflict:
      return "reapply-conflict";
    case Outcome::Unbuildable:
      return "unbuildable";
  }
  return "?";
}

SubsetStream::SubsetStream(std::size_t k) : k_(k), done_(k == 0) {}

bool SubsetStream::next(Subset& out) {
  if (done_) return false;
  if (!started_) {
    started_ = true;
    cur_ = {0};
  } else {
    const std::size_t size = cur_.size();
    std::size_t i = size;
    while (i > 0 && cur_[i - 1] == k_ - size + (i - 1)) --i;
    if (i == 0) {
      if (size == k_) {
        done_ = true;
        return false;
      }
      cur_.resize(size + 1);
      for (std::size_t j = 0; j <= size; ++j) cur_[j] = j;
    } else {
      ++cur_[i - 1];
      for (std::size_t j = i; j < size; ++j) cur_[j] = cur_[j - 1] + 1;
    }
    ++position_;
  }
  out = cur_;
  return true;
}

std::vector<Subset> enumerate(const ChangeSeq& chgs, const SearchBudget& budget) {
  if (chgs.size() > budget.max_units) {
    throw TooLarge(std::to_string(chgs.size()) + " change units exceed the limit of " +
                   std::to_string(budget.max_units));
  }
  std::vector<Subset> out;
  SubsetStream stream(chgs.size());
  for (Subset s; stream.next(s);) {
    if (budget.expired()) throw BudgetExceeded("budget exhausted during enumeration");
    out.push_back(s);
  }
  return out;
}

std::uint64_t subset_mask(const Subset& s) {
  std::uint64_t m = 0;
  for (auto i : s) m |= std::uint64_t{1} << i;
  return m;
}

namespace {

struct Visit {
  std::uint64_t position;
  Subset units;
  std::uint64_t hash;
  Validation validation;
  std::string diff;
};

}  // namespace

SearchResult search(const SourceTree& vprime, const ChangeSeq& chgs, const Harness& harness, const SuitePair& suites,
                    const std::set<std::string>& triggering, const SearchBudget& budget,
                    const SearchOptions& options) {
  if (triggering.empty()) throw std::invalid_argument("no triggering test");
  if (chgs.size() > budget.max_units) {
    throw TooLarge(std::to_string(chgs.size()) + " change units exceed the limit of " +
                   std::to_string(budget.max_units));
  }
  if (chgs.size() >= 64) throw TooLarge("change sequence too long to enumerate");

  const ChangeApplier applier(vprime);
  std::mutex mu;
  SubsetStream stream(chgs.size());
  bool exhausted = false;
  bool over_budget = false;
  std::exception_ptr failure;
  // Earliest position per distinct candidate tree; the search may stop at
  // the max_candidates-th of these, and nothing after it is kept.
  std::map<std::uint64_t, std::uint64_t> first_candidate;
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max();
  std::map<std::uint64_t, Validation> memo;
  std::vector<Visit> visits;
  std::size_t validations = 0;

  auto update_limit = [&] {
    if (budget.max_candidates == 0 || first_candidate.size() < budget.max_candidates) return;
    std::vector<std::uint64_t> firsts;
    for (const auto& [h, pos] : first_candidate) firsts.push_back(pos);
    std::sort(firsts.begin(), firsts.end());
    limit = std::min(limit, firsts[budget.max_candidates - 1]);
  };

  auto worker = [&] {
    while (true) {
      Subset subset;
      std::uint64_t position;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (exhausted || over_budget || failure) return;
        if (!stream.next(subset)) {
          exhausted = true;
          return;
        }
        position = stream.position();
        if (position > limit) {
          exhausted = true;
          return;
        }
        if (budget.expired()) {
          over_budget = true;
          return;
        }
      }
      try {
        ChangeSeq seq;
        for (auto i : subset) seq.push_back(chgs[i]);
        const SourceTree tree = applier.apply(seq);
        const SourceTree program = tree.program_files();
        const std::uint64_t hash = program.hash();
        std::optional<Validation> known;
        {
          std::lock_guard<std::mutex> lock(mu);
          auto it = memo.find(hash);
          if (it != memo.end()) known = it->second;
        }
        Validation v;
        if (known) {
          v = *known;
        } else {
          v = validate(program, suites, triggering, harness);
        }
        std::string text;
        if (v.verdict == Verdict::Candidate) text = to_unified_diff(vprime, tree);
        std::lock_guard<std::mutex> lock(mu);
        if (!known) {
          ++validations;
          memo.emplace(hash, v);
        }
        if (v.verdict == Verdict::Candidate) {
          auto [it, inserted] = first_candidate.emplace(hash, position);
          if (!inserted) it->second = std::min(it->second, position);
          update_limit();
        }
        visits.push_back({position, std::move(subset), hash, std::move(v), std::move(text)});
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned i = 0; i < jobs; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (over_budget) throw BudgetExceeded("budget exhausted after " + std::to_string(visits.size()) + " subsets");

  std::sort(visits.begin(), visits.end(), [](const Visit& a, const Visit& b) { return a.position < b.position; });
  SearchResult result;
  result.validations = validations;
  result.stopped_early = limit != std::numeric_limits<std::uint64_t>::max();
  std::set<std::uint64_t> seen;
  for (const auto& v : visits) {
    if (v.position > limit) continue;
    ++result.visited;
    if (v.validation.verdict != Verdict::Candidate) continue;
    result.candidate_subsets.push_back(v.units);
    if (!seen.insert(v.hash).second) continue;
    result.candidates.push_back({v.units, v.hash, v.validation.regression_passed, v.validation.triggering_passed, v.diff});
  }
  return result;
}

Decision decide(const std::vector<CandidatePatch>& candidates, const ChangeSeq& chgs) {
  Decision d;
  if (candidates.empty()) {
    d.outcome = Outcome::ZeroCandidates;
    return d;
  }
  if (candidates.size() > 1) {
    d.outcome = Outcome::MultipleCandidates;
    return d;
  }
  d.outcome = Outcome::Patch;
  Patch p;
  for (auto i : candidates[0].units) p.units.push_back(chgs.at(i));
  p.diff = candidates[0].diff;
  d.patch = std::move(p);
  return d;
}

}  // namespace pd
