#include "patchdistill/pipeline.hpp"

#include <chrono>

#include "patchdistill/refactoring_engine.hpp"
#include "patchdistill/refactoring_miner.hpp"

namespace pd {

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::optional<Outcome> outcome_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(Outcome::Unbuildable); ++i) {
    if (s == to_string(static_cast<Outcome>(i))) return static_cast<Outcome>(i);
  }
  return std::nullopt;
}

}  // namespace

int CommitReport::exit_code() const {
  switch (outcome) {
    case Outcome::Patch:
      return 0;
    case Outcome::Unbuildable:
      return 20;
    default:
      return 10;
  }
}

nlohmann::ordered_json to_json(const CommitReport& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["outcome"] = to_string(r.outcome);
  j["detail"] = r.detail;
  j["times"] = {{"detect", r.times.detect}, {"reapply", r.times.reapply}, {"suites", r.times.suites},
                {"diff", r.times.diff},     {"search", r.times.search},   {"total", r.times.total}};
  j["budget_secs"] = r.budget_secs;
  auto refs = nlohmann::ordered_json::array();
  for (const auto& x : r.refactorings) refs.push_back(to_json(x));
  j["refactorings"] = refs;
  j["refactorings_applied"] = r.refactorings_applied;
  j["token_units"] = r.token_units;
  j["units"] = r.units;
  j["regression_tests"] = r.regression_tests;
  j["fixed_tests"] = r.fixed_tests;
  j["triggering"] = r.triggering;
  j["flaky"] = r.flaky;
  j["weak_regression"] = r.weak_regression;
  j["candidates"] = r.candidates;
  j["visited"] = r.visited;
  j["validations"] = r.validations;
  j["patch"] = r.patch_path;
  j["notes"] = r.notes;
  return j;
}

CommitReport commit_report_from_json(const nlohmann::json& j) {
  CommitReport r;
  r.id = j.value("id", "");
  r.outcome = outcome_from_string(j.value("outcome", "")).value_or(Outcome::Unbuildable);
  r.detail = j.value("detail", "");
  if (j.contains("times")) {
    const auto& t = j.at("times");
    r.times = {t.value("detect", 0.0), t.value("reapply", 0.0), t.value("suites", 0.0),
               t.value("diff", 0.0),   t.value("search", 0.0),  t.value("total", 0.0)};
  }
  r.budget_secs = j.value("budget_secs", 0.0);
  for (const auto& x : j.value("refactorings", nlohmann::json::array())) r.refactorings.push_back(refactoring_from_json(x));
  r.refactorings_applied = j.value("refactorings_applied", false);
  r.token_units = j.value("token_units", std::size_t{0});
  r.units = j.value("units", std::size_t{0});
  r.regression_tests = j.value("regression_tests", std::size_t{0});
  r.fixed_tests = j.value("fixed_tests", std::size_t{0});
  r.triggering = j.value("triggering", std::vector<std::string>{});
  r.flaky = j.value("flaky", std::vector<std::string>{});
  r.weak_regression = j.value("weak_regression", false);
  r.candidates = j.value("candidates", std::size_t{0});
  r.visited = j.value("visited", std::size_t{0});
  r.validations = j.value("validations", std::size_t{0});
  r.patch_path = j.value("patch", "");
  r.notes = j.value("notes", std::vector<std::string>{});
  return r;
}

ExtractResult extract(const SourceTree& old_version, const SourceTree& new_version, const Harness& harness,
                      const ExtractOptions& options) {
  const auto start = Clock::now();
  SearchBudget budget = options.budget;
  budget.start = start;

  ExtractResult out;
  CommitReport& rep = out.report;
  rep.id = options.commit_id;
  rep.budget_secs = std::chrono::duration<double>(budget.wall).count();
  auto finish = [&](Outcome o, std::string detail) {
    rep.outcome = o;
    rep.detail = std::move(detail);
    rep.times.total = secs_since(start);
    return out;
  };

  const SourceTree old_v = normalize(old_version);
  const SourceTree new_v = normalize(new_version);

  // Refactoring detection and reapplication.
  SourceTree vprime = old_v;
  if (options.detect_refactorings) {
    auto t = Clock::now();
    rep.refactorings = detect(old_v, new_v);
    rep.times.detect = secs_since(t);
    if (!rep.refactorings.empty()) {
      t = Clock::now();
      try {
        vprime = reapply(old_v, {rep.refactorings, {}});
        rep.refactorings_applied = true;
      } catch (const ReapplyConflict& e) {
        if (options.strict_reapply) return finish(Outcome::ReapplyConflict, e.what());
        rep.notes.push_back(std::string("reapply conflict, continuing without refactorings: ") + e.what());
      }
      if (rep.refactorings_applied && !verify_behavior(old_v, vprime, std::nullopt)) {
        if (options.strict_reapply) return finish(Outcome::ReapplyConflict, "refactored version behaves differently");
        rep.notes.push_back("refactored version behaves differently, continuing without refactorings");
        vprime = old_v;
        rep.refactorings_applied = false;
      }
      rep.times.reapply = secs_since(t);
    }
  }
  out.vprime = vprime;

  // Suites.
  auto t = Clock::now();
  SuitePair suites;
  std::set<std::string> triggering;
  try {
    suites = prepare_suites(old_v, new_v, harness);
    suites.regression_tests = vprime.test_files();
    triggering = triggering_tests(vprime, suites, harness);
  } catch (const HarnessError& e) {
    rep.times.suites = secs_since(t);
    return finish(Outcome::Unbuildable, e.what());
  }
  rep.times.suites = secs_since(t);
  rep.regression_tests = suites.regression.size();
  rep.fixed_tests = suites.fixed.size();
  rep.flaky.assign(suites.flaky.begin(), suites.flaky.end());
  rep.triggering.assign(triggering.begin(), triggering.end());
  rep.weak_regression = suites.regression.empty();
  for (const auto& line : suites.log) rep.notes.push_back(line);
  if (triggering.empty()) return finish(Outcome::NoTriggeringTest, "no test of the new version fails on the old one");

  // Change sequence.
  t = Clock::now();
  ChangeSeq chgs;
  try {
    const ChangeSeq tokens = diff(vprime, new_v);
    rep.token_units = tokens.size();
    chgs = coarsen(tokens, vprime);
  } catch (const DiffError& e) {
    rep.times.diff = secs_since(t);
    return finish(Outcome::TooLarge, e.what());
  } catch (const std::length_error& e) {
    rep.times.diff = secs_since(t);
    return finish(Outcome::TooLarge, e.what());
  }
  rep.times.diff = secs_since(t);
  rep.units = chgs.size();
  if (chgs.empty()) return finish(Outcome::ZeroCandidates, "no program changes");
  if (chgs.size() > budget.max_units) {
    return finish(Outcome::TooLarge, std::to_string(chgs.size()) + " change units exceed the limit of " +
                                         std::to_string(budget.max_units));
  }

  // Search and decision.
  t = Clock::now();
  SearchResult found;
  try {
    found = search(vprime, chgs, harness, suites, triggering, budget, {options.jobs});
  } catch (const BudgetExceeded& e) {
    rep.times.search = secs_since(t);
    return finish(Outcome::Timeout, e.what());
  } catch (const TooLarge& e) {
    rep.times.search = secs_since(t);
    return finish(Outcome::TooLarge, e.what());
  }
  rep.times.search = secs_since(t);
  rep.candidates = found.candidates.size();
  rep.visited = found.visited;
  rep.validations = found.validations;
  Decision d = decide(found.candidates, chgs);
  if (d.patch) {
    d.patch->commit_id = options.commit_id;
    d.patch->budget_spent_secs = secs_since(start);
    out.patch = std::move(d.patch);
  }
  std::string detail;
  if (d.outcome == Outcome::MultipleCandidates) {
    detail = std::to_string(found.candidates.size()) + (found.stopped_early ? "+" : "") + " candidates";
  }
  return finish(d.outcome, detail);
}

void write_outputs(ExtractResult& result, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  if (result.patch) {
    write_file_atomic(out / "patch.diff", result.patch->diff);
    write_tree(result.vprime, out / "vprime");
    result.report.patch_path = (out / "patch.diff").string();
  }
  write_file_atomic(out / "report.json", to_json(result.report).dump(2) + "\n");
}

}  // namespace pd
