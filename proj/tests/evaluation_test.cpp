#include <doctest.h>

#include "manifest_fixture.hpp"
#include "patchdistill/corpus.hpp"
#include "patchdistill/evaluation.hpp"
#include "patchdistill/subprocess.hpp"

using namespace pd;
namespace fs = std::filesystem;

namespace {

CommitEval row(const std::string& project, std::size_t n1, std::size_t n2, Outcome o = Outcome::Patch) {
  CommitEval c;
  c.id = project + std::to_string(n1);
  c.project = project;
  c.n1 = n1;
  c.n2 = n2;
  c.report.outcome = o;
  c.generated = o == Outcome::Patch;
  return c;
}

}  // namespace

TEST_CASE("p_same on a ten-commit manifest with four commit-identical patches") {
  const fs::path dir = make_scratch_dir("eval-calc");
  const auto manifest = fixtures::write_calc_manifest(dir, 4);
  EvalOptions o;
  o.out = dir / "out";
  o.plot = true;
  const EvalResult r = run_eval(load_manifest(manifest), o);
  const CorpusMetrics& m = r.metrics;
  CHECK(m.total == 10);
  CHECK(m.commit_identical == 4);
  CHECK(m.p_same == 0.4);
  CHECK(m.p_diff == 1.0 - m.p_same);
  CHECK(m.precision == static_cast<double>(m.matched) / static_cast<double>(m.generated));
  CHECK(m.recall == static_cast<double>(m.matched) / 10.0);
  // The pure fixes distil; the tangled commits have two candidates each.
  CHECK(m.generated == 4);
  CHECK(m.matched == 4);
  CHECK(m.outcomes.at("patch") == 4);
  CHECK(m.outcomes.at("multiple-candidates") == 6);
  std::size_t sum = 0;
  for (const auto& [_, n] : m.outcomes) sum += n;
  CHECK(sum == m.total);
  CHECK(m.projects.at("pure").ratio == 1.0);
  CHECK(m.projects.at("tangled").ratio == 0.5);

  for (const char* f : {"metrics.csv", "metrics.json", "runtime.csv", "runtime.svg"}) CHECK(fs::exists(o.out / f));
  CHECK(fs::exists(o.out / "commits" / "calc-0" / "patch.diff"));
  CHECK(fs::exists(o.out / "commits" / "calc-9" / "report.json"));
  const auto j = nlohmann::json::parse(read_file(o.out / "metrics.json"));
  CHECK(j.at("p_same") == 0.4);
  std::size_t lines = 0;
  for (char c : read_file(o.out / "metrics.csv")) lines += c == '\n';
  CHECK(lines == 11);
  fs::remove_all(dir);
}

TEST_CASE("commit workers do not change the metrics") {
  const fs::path dir = make_scratch_dir("eval-jobs");
  const Manifest m = load_manifest(fixtures::write_calc_manifest(dir, 7));
  EvalOptions one, three;
  three.commit_jobs = 3;
  const EvalResult a = run_eval(m, one);
  const EvalResult b = run_eval(m, three);
  CHECK(a.metrics.p_same == doctest::Approx(0.7));
  REQUIRE(a.commits.size() == b.commits.size());
  for (std::size_t i = 0; i < a.commits.size(); ++i) {
    CHECK(a.commits[i].id == b.commits[i].id);
    CHECK(a.commits[i].report.outcome == b.commits[i].report.outcome);
    CHECK(a.commits[i].matched == b.commits[i].matched);
  }
  fs::remove_all(dir);
}

TEST_CASE("archived versions load like directories") {
  const fs::path dir = make_scratch_dir("eval-tar");
  fixtures::write_calc_manifest(dir, 4);
  for (const char* v : {"old", "new"}) {
    const auto r = run_command({"tar", "czf", std::string(v) + ".tar.gz", "-C", v, "."}, {dir / "calc-0", {}},
                               std::chrono::seconds(10));
    REQUIRE(r.exit_code == 0);
  }
  const std::string text = R"({"commits": [{"id": "a", "old": "calc-0/old.tar.gz", "new": "calc-0/new.tar.gz",
                                 "truth": "calc-0/truth.diff"}]})";
  write_file(dir / "tar.json", text);
  const EvalResult r = run_eval(load_manifest(dir / "tar.json"), {});
  CHECK(r.commits.at(0).matched);
  CHECK(r.commits.at(0).project == "default");
  fs::remove_all(dir);
}

TEST_CASE("bug-fixing change ratio") {
  const CorpusMetrics m = compute_metrics({row("a", 60, 40), row("a", 40, 23), row("b", 10, 10, Outcome::Timeout)});
  CHECK(m.projects.at("a").n1 == 100);
  CHECK(m.projects.at("a").n2 == 63);
  CHECK(m.projects.at("a").ratio == doctest::Approx(0.63));
  CHECK(m.projects.at("b").ratio == 1.0);
  CHECK(m.overall.ratio == doctest::Approx(73.0 / 110.0));
  CHECK(m.generated == 2);
  CHECK(m.matched == 0);
  CHECK(m.precision == 0.0);
  const CorpusMetrics empty = compute_metrics({});
  CHECK(empty.total == 0);
  CHECK(empty.precision == 0.0);
}

TEST_CASE("manifest errors") {
  CHECK_THROWS_AS(parse_manifest("{"), ManifestError);
  CHECK_THROWS_AS(parse_manifest(R"({"jobs": []})"), ManifestError);
  CHECK_THROWS_AS(parse_manifest(R"({"commits": [{"id": "a", "old": "o", "new": "n"}]})"), ManifestError);
  CHECK_THROWS_AS(parse_manifest(R"({"commits": [{"id": "a", "old": "o", "new": "n", "truth": "t"},
                                                 {"id": "a", "old": "o", "new": "n", "truth": "t"}]})"),
                  ManifestError);
  CHECK_THROWS_AS(parse_manifest(R"({"commits": [{"id": 3, "old": "o", "new": "n", "truth": "t"}]})"), ManifestError);
  const Manifest m = parse_manifest(R"({"harness": "h.json", "commits": [{"id": "a", "old": "o", "new": "/n",
      "truth": "t", "budget_mins": 0.5, "max_units": 12}]})", "/base");
  CHECK(m.harness == fs::path("/base/h.json"));
  CHECK(m.commits[0].old_path == fs::path("/base/o"));
  CHECK(m.commits[0].new_path == fs::path("/n"));
  CHECK(*m.commits[0].budget_mins == 0.5);
  CHECK(*m.commits[0].max_units == 12);

  const fs::path dir = make_scratch_dir("eval-missing");
  fixtures::write_calc_manifest(dir, 4);
  fs::remove(dir / "calc-3" / "truth.diff");
  CHECK_THROWS_AS(load_manifest(dir / "manifest.json"), ManifestError);
  CHECK_THROWS_AS(load_manifest(dir / "absent.json"), ManifestError);
  fs::remove_all(dir);
}

TEST_CASE("runtime rows") {
  CommitReport a;
  a.id = "a";
  a.units = 3;
  a.times.total = 0.25;
  a.outcome = Outcome::Patch;
  const auto one = report_runtime({a});
  REQUIRE(one.size() == 1);
  CHECK(one[0].units == 3);
  CHECK(one[0].seconds == 0.25);
  CHECK(runtime_csv(one) == "id,units,seconds,outcome\na,3,0.250000,patch\n");

  CommitReport t = a;
  t.outcome = Outcome::Timeout;
  t.budget_secs = 600;
  t.times.total = 600.7;
  CHECK(report_runtime({t})[0].seconds == 600);
  CHECK(report_runtime({t})[0].outcome == Outcome::Timeout);
  CHECK_THROWS_AS(report_runtime({}), std::invalid_argument);
  CHECK(runtime_svg(one).find("<circle") != std::string::npos);
}

TEST_CASE("median run time grows with commit size") {
  const MiniLangHarness h;
  std::vector<CommitReport> reports;
  // Sizes far enough apart that the exponential search dominates timer noise.
  const std::size_t sizes[] = {1, 3, 6, 12};
  for (std::size_t i = 0; i < 20; ++i) {
    const auto c = corpus::wide_commit(i, sizes[i % 4]);
    reports.push_back(extract(c.old_version, c.new_version, h, {}).report);
    CHECK(reports.back().outcome == Outcome::Patch);
    CHECK(reports.back().units == sizes[i % 4]);
  }
  const auto medians = median_by_size(report_runtime(reports));
  CHECK(medians.size() == 4);
  double prev = 0;
  for (const auto& [bucket, secs] : medians) {
    CHECK(secs >= prev);
    prev = secs;
  }
}
