#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <set>

#include "patchdistill/corpus.hpp"
#include "patchdistill/evaluation.hpp"
#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/minilang/interpreter.hpp"
#include "patchdistill/pipeline.hpp"
#include "patchdistill/refactoring_miner.hpp"

namespace fs = std::filesystem;
using namespace pd;

namespace {

constexpr int kExitError = 20;

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tap(const TestReport& r) {
  std::string out = "TAP version 13\n1.." + std::to_string(r.results.size()) + "\n";
  std::size_t i = 0;
  for (const auto& t : r.results) {
    out += std::string(t.outcome == TestOutcome::Pass ? "ok " : "not ok ") + std::to_string(++i) + " - " + t.name;
    if (t.outcome != TestOutcome::Pass) {
      std::string msg = t.message;
      for (auto& c : msg) {
        if (c == '\n') c = ' ';
      }
      out += std::string(" # ") + to_string(t.outcome) + (msg.empty() ? "" : ": " + msg);
    }
    out += "\n";
  }
  return out;
}

std::string junit(const TestReport& r) {
  std::size_t failures = 0, errors = 0;
  for (const auto& t : r.results) {
    failures += t.outcome == TestOutcome::Fail;
    errors += t.outcome == TestOutcome::Error;
  }
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<testsuite name=\"minilang\" tests=\"" +
                    std::to_string(r.results.size()) + "\" failures=\"" + std::to_string(failures) +
                    "\" errors=\"" + std::to_string(errors) + "\">\n";
  for (const auto& t : r.results) {
    const auto dot = t.name.rfind('.');
    const std::string cls = dot == std::string::npos ? "" : t.name.substr(0, dot);
    const std::string name = dot == std::string::npos ? t.name : t.name.substr(dot + 1);
    out += "  <testcase classname=\"" + xml_escape(cls) + "\" name=\"" + xml_escape(name) + "\"";
    if (t.outcome == TestOutcome::Pass) {
      out += "/>\n";
    } else {
      const char* tag = t.outcome == TestOutcome::Fail ? "failure" : "error";
      out += "><" + std::string(tag) + " message=\"" + xml_escape(t.message) + "\"/></testcase>\n";
    }
  }
  return out + "</testsuite>\n";
}

std::chrono::milliseconds minutes(double m) {
  return std::chrono::milliseconds(static_cast<long long>(std::llround(m * 60000.0)));
}

struct BudgetFlags {
  double budget_mins = 40;
  std::size_t max_units = 30;
  std::size_t max_candidates = 2;
  unsigned jobs = 1;
  bool no_refactoring = false;
  bool strict_reapply = false;

  void add(CLI::App* app) {
    app->add_option("--budget-mins", budget_mins, "wall-clock budget per commit")->capture_default_str();
    app->add_option("--max-units", max_units, "largest change sequence searched")->capture_default_str();
    app->add_option("--stop-after", max_candidates, "stop once this many candidates are known; 0 searches all")
        ->capture_default_str();
    app->add_option("--jobs", jobs, "validation threads (commit workers for eval)")->capture_default_str();
    app->add_flag("--no-refactoring", no_refactoring, "skip refactoring detection and reapplication");
    app->add_flag("--strict-reapply", strict_reapply, "report reapply-conflict instead of falling back");
  }

  ExtractOptions options() const {
    ExtractOptions o;
    o.budget.wall = minutes(budget_mins);
    o.budget.max_units = max_units;
    o.budget.max_candidates = max_candidates;
    o.detect_refactorings = !no_refactoring;
    o.strict_reapply = strict_reapply;
    o.jobs = jobs;
    return o;
  }
};

int cmd_extract(const fs::path& old_path, const fs::path& new_path, const fs::path& harness_cfg,
                const fs::path& out, const std::string& id, const BudgetFlags& flags) {
  const auto harness = make_harness(harness_cfg);
  ExtractOptions o = flags.options();
  o.commit_id = id;
  ExtractResult r = extract(load_tree(old_path), load_tree(new_path), *harness, o);
  if (!out.empty()) write_outputs(r, out);
  std::cerr << to_string(r.report.outcome);
  if (!r.report.detail.empty()) std::cerr << ": " << r.report.detail;
  std::cerr << "\n";
  if (out.empty() && r.patch) std::cout << r.patch->diff;
  if (!out.empty()) std::cout << to_json(r.report).dump(2) << "\n";
  return r.report.exit_code();
}

int cmd_eval(const fs::path& manifest_path, const fs::path& out, bool plot, const BudgetFlags& flags) {
  const Manifest m = load_manifest(manifest_path);
  EvalOptions o;
  o.extract = flags.options();
  o.extract.jobs = 1;
  o.commit_jobs = flags.jobs;
  o.out = out;
  o.plot = plot;
  const EvalResult r = run_eval(m, o);
  const auto& x = r.metrics;
  std::cout << "commits " << x.total << ", generated " << x.generated << ", matched " << x.matched << "\n"
            << "precision " << x.precision << ", recall " << x.recall << "\n"
            << "P_same " << x.p_same << ", P_diff " << x.p_diff << "\n";
  for (const auto& [o, n] : x.outcomes) std::cout << "  " << o << ": " << n << "\n";
  return 0;
}

int cmd_runtime(const std::vector<fs::path>& inputs, const fs::path& svg) {
  std::vector<CommitReport> reports;
  auto load = [&](const fs::path& p) { reports.push_back(commit_report_from_json(nlohmann::json::parse(read_file(p)))); };
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (e.is_regular_file() && e.path().filename() == "report.json") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      for (const auto& p : found) load(p);
    } else {
      load(in);
    }
  }
  const auto rows = report_runtime(reports);
  std::cout << runtime_csv(rows);
  if (!svg.empty()) write_file_atomic(svg, runtime_svg(rows));
  return 0;
}

int cmd_mine(const fs::path& old_path, const fs::path& new_path, bool matching) {
  const SourceTree a = normalize(load_tree(old_path));
  const SourceTree b = normalize(load_tree(new_path));
  if (matching) {
    const ElementMatching m = match_elements(a, b);
    for (const auto& [o, n] : m.matched) {
      std::cout << to_string(o.kind) << " " << o.qualified_name << " -> " << n.qualified_name << "\n";
    }
    for (const auto& o : m.removed) std::cout << to_string(o.kind) << " " << o.qualified_name << " removed\n";
    for (const auto& n : m.added) std::cout << to_string(n.kind) << " " << n.qualified_name << " added\n";
    return 0;
  }
  std::cout << dump_refactorings(detect(a, b));
  return 0;
}

int cmd_corpus(const fs::path& out, std::uint64_t seed, std::size_t per_category, const std::vector<std::size_t>& wide) {
  auto commits = corpus::generate_corpus(seed, per_category);
  for (auto lines : wide) commits.push_back(corpus::wide_commit(seed, lines));
  corpus::write_corpus(commits, out);
  std::cout << commits.size() << " commits written to " << out.string() << "\n";
  return 0;
}

int cmd_minilang(const std::string& action, const fs::path& dir, const std::vector<std::string>& tests,
                 const std::string& format) {
  const SourceTree tree = load_tree(dir);
  if (action == "check") {
    const auto diags = ml::check(tree);
    for (const auto& d : diags) std::cerr << d.str() << "\n";
    return diags.empty() ? 0 : 1;
  }
  const ml::Program p = ml::analyze(tree);
  if (action == "list") {
    for (const auto& t : ml::list_tests(p)) std::cout << t << "\n";
    return 0;
  }
  TestSelection sel;
  if (!tests.empty()) sel = std::set<std::string>(tests.begin(), tests.end());
  const TestReport r = ml::run_tests(p, sel);
  if (format == "junit-xml") {
    std::cout << junit(r);
  } else if (format == "tap") {
    std::cout << tap(r);
  } else {
    for (const auto& t : r.results) {
      std::cout << to_string(t.outcome) << " " << t.name << (t.message.empty() ? "" : "  " + t.message) << "\n";
    }
  }
  return r.pass_count() == r.results.size() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patchdistill: extract concise bug-fixing patches from consecutive versions"};
  app.require_subcommand(1);

  BudgetFlags flags;
  fs::path old_path, new_path, harness_cfg, out;
  std::string id;
  auto* extract_cmd = app.add_subcommand("extract", "distill the patch of one commit");
  extract_cmd->add_option("--old", old_path, "buggy version (directory or .tar.gz)")->required();
  extract_cmd->add_option("--new", new_path, "fixed version (directory or .tar.gz)")->required();
  extract_cmd->add_option("--harness", harness_cfg, "external harness config (JSON); in-process MiniLang if absent");
  extract_cmd->add_option("--out", out, "write patch.diff, vprime/ and report.json here");
  extract_cmd->add_option("--id", id, "commit id for the report");
  flags.add(extract_cmd);

  fs::path manifest;
  bool plot = false;
  auto* eval_cmd = app.add_subcommand("eval", "run a manifest of commits and compute corpus metrics");
  eval_cmd->add_option("--manifest", manifest, "manifest.json")->required();
  eval_cmd->add_option("--out", out, "output directory")->required();
  eval_cmd->add_flag("--plot", plot, "also write runtime.svg");
  flags.add(eval_cmd);

  std::vector<fs::path> reports;
  fs::path svg;
  auto* runtime_cmd = app.add_subcommand("runtime", "size-vs-time table from report.json files");
  runtime_cmd->add_option("reports", reports, "report files or directories searched for report.json")->required();
  runtime_cmd->add_option("--svg", svg, "write a scatter plot");

  bool dump = false, matching = false;
  auto* mine_cmd = app.add_subcommand("mine", "detect refactorings between two versions");
  mine_cmd->add_option("--old", old_path)->required();
  mine_cmd->add_option("--new", new_path)->required();
  mine_cmd->add_flag("--dump-refactorings", dump, "print detected refactorings as JSON (default)");
  mine_cmd->add_flag("--matching", matching, "print the element matching instead");

  std::uint64_t seed = 1;
  std::size_t per_category = 20;
  std::vector<std::size_t> wide;
  auto* corpus_cmd = app.add_subcommand("corpus", "generate a synthetic ledger corpus");
  corpus_cmd->add_option("--out", out)->required();
  corpus_cmd->add_option("--seed", seed)->capture_default_str();
  corpus_cmd->add_option("--per-category", per_category)->capture_default_str();
  corpus_cmd->add_option("--wide", wide, "also add single-method commits with this many inserted lines");

  std::string ml_action, format = "text";
  fs::path ml_dir;
  std::vector<std::string> tests;
  auto* ml_cmd = app.add_subcommand("minilang", "check, list or run a MiniLang tree");
  ml_cmd->add_option("action", ml_action)->required()->check(CLI::IsMember({"check", "list", "test"}));
  ml_cmd->add_option("dir", ml_dir)->required();
  ml_cmd->add_option("tests", tests, "test names to run (all when omitted)");
  ml_cmd->add_option("--format", format)->check(CLI::IsMember({"text", "tap", "junit-xml"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*extract_cmd) return cmd_extract(old_path, new_path, harness_cfg, out, id, flags);
    if (*eval_cmd) return cmd_eval(manifest, out, plot, flags);
    if (*runtime_cmd) return cmd_runtime(reports, svg);
    if (*mine_cmd) return cmd_mine(old_path, new_path, matching);
    if (*corpus_cmd) return cmd_corpus(out, seed, per_category, wide);
    if (*ml_cmd) return cmd_minilang(ml_action, ml_dir, tests, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
