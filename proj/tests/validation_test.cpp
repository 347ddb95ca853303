#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "patchdistill/change_model.hpp"
#include "patchdistill/refactoring_engine.hpp"
#include "patchdistill/refactoring_miner.hpp"
#include "patchdistill/validation.hpp"

using namespace pd;

namespace {

const char* kMath = R"(package m;
class MathUtil {
    static int twice(int x) {
        return x + x;
    }
}
)";

const char* kMathTests = R"(package m;
class MathTest {
    void test_zero() { assert MathUtil.twice(0) == 0; }
    void test_one() { assert MathUtil.twice(1) == 2; }
    void test_two() { assert MathUtil.twice(2) == 4; }
    void test_neg() { assert MathUtil.twice(-1) == -2; }
    void test_wrong() { assert MathUtil.twice(3) == 7; }
}
)";

SourceTree math_tree() {
  SourceTree t;
  t.files["src/m/MathUtil.ml4j"] = kMath;
  t.files["tests/m/MathTest.ml4j"] = kMathTests;
  return t;
}

SourceTree vprime_of(const SourceTree& old_v, const SourceTree& new_v) {
  return reapply(old_v, {detect(old_v, new_v), {}});
}

}  // namespace

TEST_CASE("suites drop tests failing on their own version") {
  const MiniLangHarness h;
  const SuitePair s = prepare_suites(math_tree(), math_tree(), h);
  CHECK(s.regression.size() == 4);
  CHECK(s.regression.count("MathTest.test_wrong") == 0);
  CHECK(s.fixed == s.regression);
  CHECK(s.flaky.empty());
  CHECK(triggering_tests(math_tree(), s, h).empty());
}

TEST_CASE("unbuildable versions are rejected") {
  SourceTree broken = math_tree();
  broken.files["src/m/MathUtil.ml4j"] = "package m; class MathUtil { static int twice(int x) { return y; } }";
  const MiniLangHarness h;
  CHECK_FALSE(h.compile_check(broken.program_files()).ok);
  CHECK_THROWS_AS(prepare_suites(broken, math_tree(), h), HarnessError);
  CHECK_THROWS_AS(prepare_suites(math_tree(), broken, h), HarnessError);
}

TEST_CASE("the new singleton-getter test is the only triggering test") {
  const MiniLangHarness h;
  const SourceTree old_v = fixtures::inliner_old();
  const SourceTree new_v = fixtures::inliner_new();
  const SuitePair s = prepare_suites(old_v, new_v, h);
  CHECK(s.regression.size() == 4);
  CHECK(s.fixed.size() == 5);
  const auto trig = triggering_tests(vprime_of(old_v, new_v), s, h);
  CHECK(trig == std::set<std::string>{"InlinerTest.test_singleton_getter_is_not_inlined"});
  CHECK(triggering_tests(old_v, s, h) == trig);
}

TEST_CASE("validation verdicts") {
  const MiniLangHarness h;
  const SourceTree old_v = fixtures::inliner_old();
  const SourceTree new_v = fixtures::inliner_new();
  const SuitePair s = prepare_suites(old_v, new_v, h);
  const SourceTree vp = vprime_of(old_v, new_v);
  const auto trig = triggering_tests(vp, s, h);

  CHECK(validate(vp.program_files(), s, trig, h).verdict == Verdict::NonFixing);
  const ChangeSeq chgs = coarsen(diff(vp, new_v), vp);
  const auto full = validate(pd::apply(vp, chgs).program_files(), s, trig, h);
  CHECK(full.verdict == Verdict::Candidate);
  CHECK(full.regression_passed == 4);
  CHECK(full.triggering_passed == trig);

  SourceTree no_decl = vp.program_files();
  no_decl.files.erase("src/inline/Compiler.ml4j");
  CHECK(validate(no_decl, s, trig, h).verdict == Verdict::Illegal);

  SourceTree regress = new_v.program_files();
  auto& text = regress.files["src/inline/Inliner.ml4j"];
  text.replace(text.find("value.uses > 1"), 14, "value.uses > 0");
  CHECK(validate(regress, s, trig, h).verdict == Verdict::Regressing);
}

TEST_CASE("verdicts do not depend on test order") {
  const MiniLangHarness h;
  const SourceTree old_v = fixtures::inliner_old();
  const SourceTree new_v = fixtures::inliner_new();
  SuitePair s = prepare_suites(old_v, new_v, h);
  const auto a = h.run_suite(new_v, s.fixed);
  // TestReport is name-ordered regardless of how the selection was built.
  std::set<std::string> reversed(s.fixed.rbegin(), s.fixed.rend());
  CHECK(h.run_suite(new_v, reversed) == a);
}

TEST_CASE("tap and junit parsing") {
  const auto tap = parse_tap("TAP version 13\n1..3\nok 1 - A.test_a\nnot ok 2 - A.test_b\nok 3 - A.test_c # SKIP slow\n");
  REQUIRE(tap.results.size() == 3);
  CHECK(tap.passed("A.test_a"));
  CHECK_FALSE(tap.passed("A.test_b"));
  CHECK(tap.passed("A.test_c"));

  const auto xml = parse_junit_xml(R"(<?xml version="1.0"?>
<testsuite name="s" tests="3">
  <testcase classname="A" name="test_a" time="0.1"/>
  <testcase classname="A" name="test_b"><failure message="x &lt; y">boom</failure></testcase>
  <testcase classname="A" name="test_c"><error message="npe"/></testcase>
</testsuite>
)");
  REQUIRE(xml.results.size() == 3);
  CHECK(xml.find("A.test_a")->outcome == TestOutcome::Pass);
  CHECK(xml.find("A.test_b")->outcome == TestOutcome::Fail);
  CHECK(xml.find("A.test_c")->outcome == TestOutcome::Error);
}

TEST_CASE("external harness config") {
  const auto c = parse_external_config(
      R"({"build_cmd": "true", "test_cmd": "run {tests}", "result_format": "junit-xml", "result_file": "out.xml",
          "env": {"A": "1"}, "test_timeout_secs": 2.5, "workdir": "scaffold"})",
      "/base");
  CHECK(c.result_format == ResultFormat::JUnitXml);
  CHECK(c.test_timeout == std::chrono::milliseconds(2500));
  CHECK(c.env.at("A") == "1");
  CHECK(c.workdir == std::filesystem::path("/base/scaffold"));
  CHECK_THROWS_AS(parse_external_config(R"({"result_format": "tap"})"), ConfigError);
  CHECK_THROWS_AS(parse_external_config(R"({"test_cmd": "x", "result_format": "xml"})"), ConfigError);
  CHECK_THROWS_AS(parse_external_config(R"({"test_cmd": "x", "result_format": "exitcode-per-test"})"), ConfigError);
  CHECK_THROWS_AS(parse_external_config("not json"), ConfigError);
}

TEST_CASE("external harness with exit codes per test") {
  ExternalConfig c;
  c.build_cmd = "test -f src/a.ml4j";
  c.test_list_cmd = "printf 'alpha\\nbeta\\nslow\\n'";
  c.test_cmd = "case {test} in alpha) grep -q good src/a.ml4j;; slow) sleep 5;; *) false;; esac";
  c.result_format = ResultFormat::ExitCodePerTest;
  c.test_timeout = std::chrono::milliseconds(300);
  const ExternalHarness h(c);

  SourceTree t;
  t.files["src/a.ml4j"] = "good";
  CHECK(h.compile_check(t).ok);
  CHECK_FALSE(h.compile_check(SourceTree{}).ok);
  const auto r = h.run_suite(t, std::nullopt);
  CHECK(r.passed("alpha"));
  CHECK(r.find("beta")->outcome == TestOutcome::Fail);
  CHECK(r.find("slow")->outcome == TestOutcome::Fail);
  CHECK(r.find("slow")->message == "timeout");
  CHECK_THROWS_AS(h.run_suite(t, std::set<std::string>{"gamma"}), HarnessError);
  t.files["src/a.ml4j"] = "bad";
  CHECK_FALSE(h.run_suite(t, std::set<std::string>{"alpha"}).passed("alpha"));
}

TEST_CASE("external harness leaves the input untouched and cleans up") {
  auto copies = [] {
    std::size_t n = 0;
    for (const auto& e : std::filesystem::directory_iterator(scratch_root())) {
      n += e.path().filename().string().rfind("harness-", 0) == 0;
    }
    return n;
  };
  const std::size_t before = copies();
  ExternalConfig c;
  c.test_cmd = "rm -f src/a.ml4j; echo 'ok 1 - t'";
  const ExternalHarness h(c);
  SourceTree t;
  t.files["src/a.ml4j"] = "x";
  CHECK(h.run_suite(t, std::nullopt).passed("t"));
  CHECK(t.files.count("src/a.ml4j") == 1);
  CHECK(copies() == before);
}

TEST_CASE("flaky tests are excluded after disagreeing runs") {
  const auto scratch = make_scratch_dir("flaky");
  const auto counter = scratch / "count";
  ExternalConfig c;
  // `steady` always passes; `flaky` fails on every second invocation.
  c.test_cmd = "n=$(cat " + counter.string() + " 2>/dev/null || echo 0); n=$((n+1)); echo $n > " +
               counter.string() + "; echo 'ok 1 - steady'; if [ $((n % 2)) -eq 0 ]; then echo 'not ok 2 - flaky'; " +
               "else echo 'ok 2 - flaky'; fi";
  const ExternalHarness h(c);
  SourceTree t;
  t.files["src/a.ml4j"] = "x";
  const SuitePair s = prepare_suites(t, t, h);
  CHECK(s.flaky == std::set<std::string>{"flaky"});
  CHECK(s.regression == std::set<std::string>{"steady"});
  CHECK(s.fixed == std::set<std::string>{"steady"});
  bool logged = false;
  for (const auto& line : s.log) logged = logged || line.find("flaky") != std::string::npos;
  CHECK(logged);
  std::filesystem::remove_all(scratch);
}
