// Acceptance run: one PASS/FAIL line per criterion. Arguments select
// criteria by number; none runs all eight.
#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "manifest_fixture.hpp"
#include "patchdistill/corpus.hpp"
#include "patchdistill/evaluation.hpp"
#include "patchdistill/refactoring_engine.hpp"
#include "patchdistill/refactoring_miner.hpp"

using namespace pd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string secs(double s) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << s << "s";
  return os.str();
}

const MiniLangHarness kHarness;

// The corpus shared by criteria 2 and 3.
const std::vector<corpus::Commit>& shared_corpus() {
  static const auto commits = corpus::generate_corpus(1, 20);
  return commits;
}

bool matches(const ExtractResult& r, const std::string& truth) {
  return r.patch && normalize_patch_text(r.patch->diff) == normalize_patch_text(truth);
}

Result motivating_example() {
  const auto t0 = Clock::now();
  const ExtractResult r = extract(fixtures::inliner_old(), fixtures::inliner_new(), kHarness, {});
  const double t = since(t0);
  const bool ok = r.report.outcome == Outcome::Patch && r.patch &&
                  r.patch->diff == std::string(fixtures::kInlinerGroundTruth) && t < 10;
  return {ok, std::string("outcome ") + to_string(r.report.outcome) + ", byte-equal " +
                  (r.patch && r.patch->diff == fixtures::kInlinerGroundTruth ? "yes" : "no") + ", " + secs(t)};
}

Result corpus_precision() {
  const auto t0 = Clock::now();
  std::map<corpus::Category, std::size_t> emitted, matched, total;
  std::size_t wrong_unsupported = 0;
  for (const auto& c : shared_corpus()) {
    const ExtractResult r = extract(c.old_version, c.new_version, kHarness, {});
    ++total[c.category];
    if (!r.patch) continue;
    ++emitted[c.category];
    const bool m = matches(r, c.truth);
    matched[c.category] += m;
    if (c.category == corpus::Category::FixUnsupported) ++wrong_unsupported;
  }
  const double t = since(t0);
  std::size_t e = 0, m = 0;
  for (auto [_, n] : emitted) e += n;
  for (auto [_, n] : matched) m += n;
  const bool sized = total[corpus::Category::PureFix] == 20 && total[corpus::Category::FixRefactoring] == 20 &&
                     total[corpus::Category::FixUnsupported] == 20;
  const bool ok = sized && e == m && wrong_unsupported == 0 && t < 15 * 60;
  std::ostringstream d;
  d << shared_corpus().size() << " commits, emitted " << e << ", matched " << m << " (pure " << matched[corpus::Category::PureFix]
    << "/" << emitted[corpus::Category::PureFix] << ", refactoring " << matched[corpus::Category::FixRefactoring] << "/"
    << emitted[corpus::Category::FixRefactoring] << "), unsupported emitted " << emitted[corpus::Category::FixUnsupported]
    << ", " << secs(t);
  return {ok, d.str()};
}

Result refactoring_ablation() {
  const auto t0 = Clock::now();
  std::size_t with = 0, with_ok = 0, without = 0, without_ok = 0;
  ExtractOptions off;
  off.detect_refactorings = false;
  for (const auto& c : shared_corpus()) {
    if (c.category != corpus::Category::FixRefactoring) continue;
    const ExtractResult a = extract(c.old_version, c.new_version, kHarness, {});
    with += a.patch.has_value();
    with_ok += matches(a, c.truth);
    const ExtractResult b = extract(c.old_version, c.new_version, kHarness, off);
    without += b.patch.has_value();
    without_ok += matches(b, c.truth);
  }
  const bool ok = without < with && 2 * without <= with && without_ok == without && with_ok == with;
  std::ostringstream d;
  d << "emitted " << with << " with detection (" << with_ok << " matched), " << without << " without (" << without_ok
    << " matched), " << secs(since(t0));
  return {ok, d.str()};
}

Result oracle_equivalence() {
  const auto t0 = Clock::now();
  corpus::Rng rng(4);
  std::size_t mismatches = 0, largest = 0, with_candidates = 0;
  for (int i = 0; i < 200; ++i) {
    const auto inst = corpus::random_instance(rng, 12);
    const SuitePair suites = prepare_suites(inst.old_version, inst.new_version, kHarness);
    const auto trig = triggering_tests(inst.old_version, suites, kHarness);
    const ChangeSeq chgs = coarsen(diff(inst.old_version, inst.new_version), inst.old_version);
    largest = std::max(largest, chgs.size());
    if (chgs.size() > 12 || trig.empty()) {
      ++mismatches;
      continue;
    }
    std::set<std::uint64_t> naive;
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << chgs.size()); ++m) {
      ChangeSeq sub;
      for (std::size_t j = 0; j < chgs.size(); ++j) {
        if (m >> j & 1) sub.push_back(chgs[j]);
      }
      const SourceTree t = pd::apply(inst.old_version, sub).program_files();
      if (validate(t, suites, trig, kHarness).verdict == pd::Verdict::Candidate) naive.insert(m);
    }
    SearchBudget all;
    all.max_candidates = 0;
    const SearchResult r = search(inst.old_version, chgs, kHarness, suites, trig, all);
    std::set<std::uint64_t> found;
    for (const auto& s : r.candidate_subsets) found.insert(subset_mask(s));
    mismatches += found != naive;
    with_candidates += !naive.empty();
  }
  const double t = since(t0);
  std::ostringstream d;
  d << "200 instances (max |Chgs| " << largest << ", " << with_candidates << " with candidates), " << mismatches
    << " mismatches, " << secs(t);
  return {mismatches == 0 && t < 5 * 60, d.str()};
}

Result diff_round_trip() {
  corpus::Rng rng(5);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    SourceTree base, target;
    switch (i % 4) {
      case 0: {
        const auto inst = corpus::random_instance(rng, 12);
        base = inst.old_version;
        target = inst.new_version;
        break;
      }
      case 1: {
        const auto inj = corpus::inject_refactoring(rng, static_cast<RefactoringKind>(i / 4 % 8));
        base = inj.before;
        target = inj.after;
        break;
      }
      case 2:
        base = corpus::random_project(rng).program;
        target = corpus::random_project(rng).program;
        break;
      default: {
        const auto inj = corpus::inject_refactoring(rng, static_cast<RefactoringKind>(i / 4 % 8));
        base = inj.after;
        target = corpus::random_instance(rng, 12).new_version;
        break;
      }
    }
    try {
      const SourceTree applied = pd::apply(base.program_files(), diff(base, target));
      std::set<std::string> a, b;
      for (const auto& [p, _] : applied.files) a.insert(p);
      for (const auto& [p, _] : target.program_files().files) b.insert(p);
      failures += !(a == b && diff(applied, target).empty());
    } catch (const std::exception&) {
      ++failures;
    }
  }
  return {failures == 0, "1000 pairs, " + std::to_string(failures) + " failures"};
}

Result refactoring_round_trip() {
  corpus::Rng rng(6);
  std::size_t failures = 0, renames = 0, behavior = 0;
  std::string first;
  for (int k = 0; k < 8; ++k) {
    const auto kind = static_cast<RefactoringKind>(k);
    for (int i = 0; i < 25; ++i) {
      const auto inj = corpus::inject_refactoring(rng, kind);
      const auto found = detect(inj.before, inj.after);
      bool ok = found.size() == 1 && found[0].kind == kind && found[0].subject == inj.refactoring.subject &&
                found[0].new_name == inj.refactoring.new_name;
      if (ok) {
        try {
          ok = reapply(inj.before, {found, {}}) == inj.after;
        } catch (const ReapplyConflict&) {
          ok = false;
        }
      }
      if (!ok && first.empty()) first = std::string(to_string(kind)) + " " + inj.refactoring.subject;
      failures += !ok;
      const bool rename = kind != RefactoringKind::ExtractMethod && kind != RefactoringKind::ExtractVariable;
      if (rename) {
        ++renames;
        behavior += verify_behavior(inj.before, inj.after, std::nullopt);
      }
    }
  }
  std::ostringstream d;
  d << "200 injections, " << failures << " round-trip failures" << (first.empty() ? "" : " (first: " + first + ")")
    << ", verify_behavior " << behavior << "/" << renames << " on rename plans";
  return {failures == 0 && behavior == renames, d.str()};
}

Result budget_behavior() {
  const auto big = corpus::wide_commit(7, 40);
  const ExtractResult a = extract(big.old_version, big.new_version, kHarness, {});
  ExtractOptions ten;
  ten.budget.wall = std::chrono::seconds(10);
  const auto slow = corpus::wide_commit(7, 24);
  const ExtractResult b = extract(slow.old_version, slow.new_version, kHarness, ten);
  const double t = b.report.times.total;
  const bool ok = a.report.outcome == Outcome::TooLarge && a.report.units == 40 &&
                  b.report.outcome == Outcome::Timeout && t >= 9.0 && t <= 11.0;
  std::ostringstream d;
  d << "40 units -> " << to_string(a.report.outcome) << "; 24 units at 10s -> " << to_string(b.report.outcome)
    << " after " << secs(t);
  return {ok, d.str()};
}

Result p_same() {
  const fs::path dir = make_scratch_dir("acceptance-psame");
  const EvalResult r = run_eval(load_manifest(fixtures::write_calc_manifest(dir, 4)), {});
  fs::remove_all(dir);
  std::ostringstream d;
  d << "P_same = " << r.metrics.p_same << " over " << r.metrics.total << " commits";
  return {r.metrics.total == 10 && r.metrics.p_same == 0.4 && r.metrics.p_same + r.metrics.p_diff == 1.0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"motivating example reproduces the guard-if patch", motivating_example},
      {"synthetic corpus precision", corpus_precision},
      {"refactoring ablation", refactoring_ablation},
      {"brute-force oracle equivalence", oracle_equivalence},
      {"diff/apply round-trip", diff_round_trip},
      {"refactoring round-trip", refactoring_round_trip},
      {"budget behavior", budget_behavior},
      {"P_same arithmetic", p_same},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(n)) continue;
    Result v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << n << " " << criteria[i].first << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
