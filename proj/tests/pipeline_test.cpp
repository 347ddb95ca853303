#include <doctest.h>

#include <chrono>

#include "fixtures.hpp"
#include "patchdistill/corpus.hpp"
#include "patchdistill/pipeline.hpp"
#include "patchdistill/subprocess.hpp"

using namespace pd;
namespace fs = std::filesystem;

namespace {

const MiniLangHarness kHarness;

ExtractResult run(const SourceTree& a, const SourceTree& b, ExtractOptions o = {}) { return extract(a, b, kHarness, o); }

std::string commit_diff(const SourceTree& a, const SourceTree& b) {
  return to_unified_diff(normalize(a).program_files(), normalize(b).program_files());
}

corpus::Commit find_commit(const std::string& change) {
  for (const auto& c : corpus::generate_corpus(11, 5)) {
    if (c.change == change) return c;
  }
  FAIL("no commit with change " << change);
  return {};
}

// Config driving the bundled CLI as an external harness.
ExternalConfig cli_harness() {
  ExternalConfig c;
  c.build_cmd = std::string(PD_CLI) + " minilang check .";
  c.test_cmd = std::string(PD_CLI) + " minilang test . {tests} --format tap";
  c.result_format = ResultFormat::Tap;
  return c;
}

}  // namespace

TEST_CASE("the inliner commit yields the guard-if patch") {
  const auto t0 = std::chrono::steady_clock::now();
  const ExtractResult r = run(fixtures::inliner_old(), fixtures::inliner_new());
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(10));
  CHECK(r.report.outcome == Outcome::Patch);
  CHECK(r.report.exit_code() == 0);
  REQUIRE(r.patch);
  CHECK(normalize_patch_text(r.patch->diff) == normalize_patch_text(fixtures::kInlinerGroundTruth));
  REQUIRE(r.report.refactorings.size() == 1);
  CHECK(r.report.refactorings[0].kind == RefactoringKind::ExtractVariable);
  CHECK(r.report.refactorings_applied);
  CHECK(r.report.units == 3);
  CHECK(r.report.token_units > r.report.units);
  CHECK(r.report.triggering == std::vector<std::string>{"InlinerTest.test_singleton_getter_is_not_inlined"});
  CHECK_FALSE(r.report.weak_regression);
  CHECK(r.vprime.files.at("src/inline/Inliner.ml4j") == normalize(fixtures::inliner_tree(fixtures::kInlinerRefactored,
                                                                                         fixtures::kInlinerTestOld))
                                                             .files.at("src/inline/Inliner.ml4j"));
}

TEST_CASE("without refactoring detection the inliner commit has no concise patch") {
  ExtractOptions o;
  o.detect_refactorings = false;
  o.budget.wall = std::chrono::seconds(2);
  const ExtractResult r = run(fixtures::inliner_old(), fixtures::inliner_new(), o);
  CHECK(r.report.refactorings.empty());
  CHECK(r.report.outcome != Outcome::Patch);
  CHECK(r.report.units > 3);
}

TEST_CASE("a pure fix distills to the whole commit") {
  const auto c = find_commit("");
  const ExtractResult r = run(c.old_version, c.new_version);
  REQUIRE(r.report.outcome == Outcome::Patch);
  CHECK(r.patch->diff == commit_diff(c.old_version, c.new_version));
  CHECK(r.report.refactorings.empty());
  CHECK(r.vprime == normalize(c.old_version));
}

TEST_CASE("a fix mixed with a new feature never yields a patch") {
  const auto c = find_commit("new-feature");
  const ExtractResult r = run(c.old_version, c.new_version);
  CHECK((r.report.outcome == Outcome::MultipleCandidates || r.report.outcome == Outcome::ZeroCandidates));
  CHECK_FALSE(r.patch);
  CHECK(r.report.exit_code() == 10);
}

// Renaming the fixed method while editing its body is not detected. Whether
// that is caught depends on the old suite calling the method.
TEST_CASE("a missed rename-with-edit is caught only by an old test of the method") {
  const auto tree = [](const std::string& name, bool fixed, bool old_test) {
    SourceTree t;
    const std::string guard = fixed ? "        if (units == 3) {\n            return 9;\n        }\n" : "";
    t.files["src/bank/Purse.ml4j"] = "package bank;\n\nclass Purse {\n    int " + name + "(int units) {\n" + guard +
                                     "        return units * 2;\n    }\n\n    int peek() {\n        return 5;\n    }\n}\n";
    std::string tests = "    void test_peek() {\n        assert new Purse().peek() == 5;\n    }\n";
    if (old_test) tests += "    void test_two() {\n        assert new Purse()." + name + "(2) == 4;\n    }\n";
    t.files["tests/bank/PurseTest.ml4j"] = "package bank;\n\nclass PurseTest {\n" + tests + "}\n";
    if (fixed) {
      t.files["tests/bank/PurseFixTest.ml4j"] = "package bank;\n\nclass PurseFixTest {\n    void test_three() {\n"
                                                "        assert new Purse()." + name + "(3) == 9;\n    }\n}\n";
    }
    return t;
  };

  const ExtractResult covered = run(tree("put", false, true), tree("deposit", true, true));
  CHECK(covered.report.refactorings.empty());
  CHECK(covered.report.outcome == Outcome::ZeroCandidates);

  // Known false positive: nothing exercises put, so rename+fix is the unique
  // candidate.
  const ExtractResult blind = run(tree("put", false, false), tree("deposit", true, false));
  CHECK(blind.report.refactorings.empty());
  REQUIRE(blind.report.outcome == Outcome::Patch);
  CHECK(blind.patch->diff.find("deposit") != std::string::npos);
}

TEST_CASE("stage failures become outcomes") {
  SourceTree broken = fixtures::inliner_old();
  broken.files["src/inline/Node.ml4j"] = "package inline; class Node { int x = ; }";
  const ExtractResult u = run(broken, fixtures::inliner_new());
  CHECK(u.report.outcome == Outcome::Unbuildable);
  CHECK(u.report.exit_code() == 20);
  CHECK_FALSE(u.report.detail.empty());

  const ExtractResult same = run(fixtures::inliner_old(), fixtures::inliner_old());
  CHECK(same.report.outcome == Outcome::NoTriggeringTest);
  CHECK(same.report.exit_code() == 10);

  const auto wide = corpus::wide_commit(3, 40);
  const ExtractResult big = run(wide.old_version, wide.new_version);
  CHECK(big.report.outcome == Outcome::TooLarge);
  CHECK(big.report.units == 40);

  ExtractOptions quick;
  quick.budget.wall = std::chrono::milliseconds(300);
  const auto mid = corpus::wide_commit(3, 22);
  const ExtractResult slow = run(mid.old_version, mid.new_version, quick);
  CHECK(slow.report.outcome == Outcome::Timeout);
  CHECK(slow.report.times.total >= 0.3);
  CHECK(slow.report.times.total < 0.3 * 1.5);
  CHECK(slow.report.budget_secs == doctest::Approx(0.3));
}

TEST_CASE("a test-free old version flags weak regression") {
  SourceTree old_v = fixtures::inliner_old();
  old_v.files.erase("tests/inline/InlinerTest.ml4j");
  const ExtractResult r = run(old_v, fixtures::inliner_new());
  CHECK(r.report.weak_regression);
  CHECK(r.report.regression_tests == 0);
}

TEST_CASE("outputs are written and the patch applies to vprime") {
  ExtractResult r = run(fixtures::inliner_old(), fixtures::inliner_new());
  const fs::path out = make_scratch_dir("pipeline-out");
  write_outputs(r, out / "x");
  CHECK(fs::exists(out / "x" / "patch.diff"));
  CHECK(fs::exists(out / "x" / "vprime" / "src" / "inline" / "Inliner.ml4j"));
  const auto j = nlohmann::json::parse(read_file(out / "x" / "report.json"));
  CHECK(j.at("outcome") == "patch");
  CHECK(j.at("patch") == (out / "x" / "patch.diff").string());

  const auto p = run_command({"patch", "-p1", "-s", "-i", (out / "x" / "patch.diff").string()},
                             {out / "x" / "vprime", {}}, std::chrono::seconds(10));
  CHECK(p.exit_code == 0);
  CHECK(load_tree(out / "x" / "vprime").program_files() == normalize(fixtures::inliner_new()).program_files());

  // No patch: only the report.
  ExtractResult none = run(fixtures::inliner_old(), fixtures::inliner_old());
  write_outputs(none, out / "y");
  CHECK(fs::exists(out / "y" / "report.json"));
  CHECK_FALSE(fs::exists(out / "y" / "patch.diff"));
  CHECK_FALSE(fs::exists(out / "y" / "vprime"));
  fs::remove_all(out);
}

TEST_CASE("report json is stable and round-trips") {
  const ExtractResult r = run(fixtures::inliner_old(), fixtures::inliner_new());
  const auto j = to_json(r.report);
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  const std::vector<std::string> want = {"id",           "outcome",          "detail",      "times",
                                         "budget_secs",  "refactorings",     "refactorings_applied",
                                         "token_units",  "units",            "regression_tests",
                                         "fixed_tests",  "triggering",       "flaky",       "weak_regression",
                                         "candidates",   "visited",          "validations", "patch",
                                         "notes"};
  CHECK(keys == want);
  const CommitReport back = commit_report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back) == j);
}

TEST_CASE("the external harness over the cli agrees with the in-process one") {
  const ExternalHarness ext(cli_harness());
  const SourceTree old_v = fixtures::inliner_old();
  const SourceTree new_v = fixtures::inliner_new();
  const SuitePair si = prepare_suites(old_v, new_v, kHarness);
  const SuitePair se = prepare_suites(old_v, new_v, ext);
  CHECK(si.regression == se.regression);
  CHECK(si.fixed == se.fixed);

  const ExtractResult in = run(old_v, new_v);
  const ExtractResult out = extract(old_v, new_v, ext, {});
  CHECK(out.report.outcome == in.report.outcome);
  CHECK(out.report.triggering == in.report.triggering);
  REQUIRE(out.patch);
  CHECK(out.patch->diff == in.patch->diff);

  // Verdicts of every subset of the inliner change sequence.
  const ChangeSeq chgs = coarsen(diff(in.vprime, new_v), in.vprime);
  SuitePair s = si;
  s.regression_tests = in.vprime.test_files();
  const std::set<std::string> trig(in.report.triggering.begin(), in.report.triggering.end());
  SubsetStream stream(chgs.size());
  for (Subset sub; stream.next(sub);) {
    ChangeSeq seq;
    for (auto i : sub) seq.push_back(chgs[i]);
    const SourceTree t = pd::apply(in.vprime, seq).program_files();
    CHECK(validate(t, s, trig, kHarness).verdict == validate(t, s, trig, ext).verdict);
  }
}

TEST_CASE("cli exit codes") {
  const fs::path dir = make_scratch_dir("pipeline-cli");
  write_tree(fixtures::inliner_old(), dir / "old");
  write_tree(fixtures::inliner_new(), dir / "new");
  auto cli = [&](std::vector<std::string> args) {
    args.insert(args.begin(), PD_CLI);
    return run_command(args, {}, std::chrono::seconds(60));
  };
  const auto ok = cli({"extract", "--old", (dir / "old").string(), "--new", (dir / "new").string()});
  CHECK(ok.exit_code == 0);
  CHECK(normalize_patch_text(ok.out) == normalize_patch_text(fixtures::kInlinerGroundTruth));
  CHECK(cli({"extract", "--old", (dir / "old").string(), "--new", (dir / "old").string()}).exit_code == 10);
  CHECK(cli({"extract", "--old", (dir / "nope").string(), "--new", (dir / "new").string()}).exit_code == 20);
  CHECK(cli({"extract", "--old", (dir / "old").string()}).exit_code == 20);

  const auto mined = cli({"mine", "--old", (dir / "old").string(), "--new", (dir / "new").string(),
                          "--dump-refactorings"});
  CHECK(mined.exit_code == 0);
  const auto j = nlohmann::json::parse(mined.out);
  REQUIRE(j.size() == 1);
  CHECK(j[0].at("kind") == "ExtractVariable");

  const auto tests = cli({"minilang", "test", (dir / "new").string(), "--format", "tap"});
  CHECK(tests.exit_code == 0);
  CHECK(parse_tap(tests.out).results.size() == 5);
  const auto xml = cli({"minilang", "test", (dir / "old").string(), "--format", "junit-xml"});
  CHECK(parse_junit_xml(xml.out).results.size() == 4);
  fs::remove_all(dir);
}
