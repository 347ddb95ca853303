#include "patchdistill/validation.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/minilang/interpreter.hpp"
#include "patchdistill/subprocess.hpp"

namespace pd {

namespace fs = std::filesystem;

MiniLangHarness::MiniLangHarness(std::chrono::milliseconds per_test_timeout) : timeout_(per_test_timeout) {}

CompileResult MiniLangHarness::compile_check(const SourceTree& tree) const {
  CompileResult out;
  for (const auto& d : ml::check(tree)) out.diagnostics.push_back(d.str());
  out.ok = out.diagnostics.empty();
  return out;
}

TestReport MiniLangHarness::run_suite(const SourceTree& tree, const TestSelection& selection) const {
  ml::RunOptions options;
  options.per_test_timeout = timeout_;
  return ml::run_tests(tree, selection, options);
}

namespace {

std::string unescape_xml(std::string s) {
  static const std::pair<const char*, const char*> entities[] = {
      {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (const auto& [from, to] : entities) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += std::string_view(to).size()) {
      s.replace(pos, std::string_view(from).size(), to);
    }
  }
  return s;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

std::string shell_quote(const std::string& s) { return "'" + replace_all(s, "'", "'\\''") + "'"; }

// Removes the scratch copy on scope exit.
struct ScratchDir {
  fs::path path;
  ~ScratchDir() {
    std::error_code ec;
    if (!path.empty()) fs::remove_all(path, ec);
  }
};

std::string join(const std::set<std::string>& names, const std::string& sep) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : sep) + n;
  return out;
}

}  // namespace

TestReport parse_tap(const std::string& text) {
  static const std::regex line_re(R"(^\s*(not )?ok\b\s*(\d+)?\s*(?:-\s*)?(.*?)\s*(?:#\s*(\w+).*)?$)");
  TestReport report;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) continue;
    std::string directive = m[4].str();
    std::transform(directive.begin(), directive.end(), directive.begin(), ::toupper);
    TestResult r;
    r.name = m[3].str();
    if (r.name.empty()) r.name = m[2].str();
    r.outcome = (!m[1].matched || directive == "SKIP") ? TestOutcome::Pass : TestOutcome::Fail;
    report.add(r);
  }
  return report;
}

TestReport parse_junit_xml(const std::string& text) {
  static const std::regex attr_re(R"re((\w+)\s*=\s*"([^"]*)")re");
  TestReport report;
  std::size_t pos = 0;
  while ((pos = text.find("<testcase", pos)) != std::string::npos) {
    const std::size_t tag_end = text.find('>', pos);
    if (tag_end == std::string::npos) break;
    const std::string attrs = text.substr(pos + 9, tag_end - pos - 9);
    std::string body;
    std::size_t next = tag_end + 1;
    if (text[tag_end - 1] != '/') {
      const std::size_t close = text.find("</testcase>", tag_end);
      body = text.substr(tag_end + 1, close == std::string::npos ? std::string::npos : close - tag_end - 1);
      next = close == std::string::npos ? text.size() : close + 11;
    }
    std::string cls, name;
    for (auto it = std::sregex_iterator(attrs.begin(), attrs.end(), attr_re); it != std::sregex_iterator(); ++it) {
      if ((*it)[1] == "classname") cls = unescape_xml((*it)[2]);
      if ((*it)[1] == "name") name = unescape_xml((*it)[2]);
    }
    TestResult r;
    r.name = cls.empty() ? name : cls + "." + name;
    if (body.find("<failure") != std::string::npos) {
      r.outcome = TestOutcome::Fail;
    } else if (body.find("<error") != std::string::npos) {
      r.outcome = TestOutcome::Error;
    } else {
      r.outcome = TestOutcome::Pass;
    }
    report.add(r);
    pos = next;
  }
  return report;
}

ExternalConfig parse_external_config(const std::string& json_text, const fs::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("harness config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("harness config: expected an object");
  ExternalConfig c;
  auto str = [&](const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
  };
  try {
    str("build_cmd", c.build_cmd);
    str("test_cmd", c.test_cmd);
    str("test_list_cmd", c.test_list_cmd);
    str("result_file", c.result_file);
    const std::string format = j.value("result_format", std::string("tap"));
    if (format == "junit-xml") {
      c.result_format = ResultFormat::JUnitXml;
    } else if (format == "tap") {
      c.result_format = ResultFormat::Tap;
    } else if (format == "exitcode-per-test") {
      c.result_format = ResultFormat::ExitCodePerTest;
    } else {
      throw ConfigError("harness config: unknown result_format " + format);
    }
    if (j.contains("workdir")) {
      fs::path w = j.at("workdir").get<std::string>();
      c.workdir = w.is_relative() && !base_dir.empty() ? base_dir / w : w;
    }
    if (j.contains("env")) {
      for (const auto& [k, v] : j.at("env").items()) c.env[k] = v.get<std::string>();
    }
    if (j.contains("test_timeout_secs")) {
      c.test_timeout = std::chrono::milliseconds(static_cast<long>(j.at("test_timeout_secs").get<double>() * 1000));
    }
    if (j.contains("build_timeout_secs")) {
      c.build_timeout = std::chrono::milliseconds(static_cast<long>(j.at("build_timeout_secs").get<double>() * 1000));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("harness config: ") + e.what());
  }
  if (c.test_cmd.empty()) throw ConfigError("harness config: test_cmd is required");
  if (c.result_format == ResultFormat::ExitCodePerTest && c.test_list_cmd.empty()) {
    throw ConfigError("harness config: exitcode-per-test needs test_list_cmd");
  }
  return c;
}

ExternalConfig load_external_config(const fs::path& path) {
  return parse_external_config(read_file(path), fs::absolute(path).parent_path());
}

ExternalHarness::ExternalHarness(ExternalConfig config) : config_(std::move(config)) {}

fs::path ExternalHarness::materialize(const SourceTree& tree) const {
  const fs::path dir = make_scratch_dir("harness");
  if (!config_.workdir.empty()) {
    fs::copy(config_.workdir, dir, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  }
  write_tree(tree, dir);
  return dir;
}

CompileResult ExternalHarness::compile_check(const SourceTree& tree) const {
  CompileResult out;
  if (config_.build_cmd.empty()) {
    out.ok = true;
    return out;
  }
  ScratchDir dir{materialize(tree)};
  const auto r = run_shell(config_.build_cmd, {dir.path, config_.env}, config_.build_timeout);
  out.ok = r.exit_code == 0;
  if (!out.ok) {
    out.diagnostics.push_back(r.timed_out ? "build timed out" : "build failed with exit code " + std::to_string(r.exit_code));
    if (!r.err.empty()) out.diagnostics.push_back(r.err);
  }
  return out;
}

TestReport ExternalHarness::run_suite(const SourceTree& tree, const TestSelection& selection) const {
  ScratchDir dir{materialize(tree)};
  CommandOptions opts{dir.path, config_.env};

  std::optional<std::set<std::string>> known;
  if (!config_.test_list_cmd.empty()) {
    const auto r = run_shell(config_.test_list_cmd, opts, config_.build_timeout);
    if (r.exit_code != 0) throw HarnessError("test_list_cmd failed: " + r.err);
    std::set<std::string> names;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) {
      while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
      if (!line.empty()) names.insert(line);
    }
    known = names;
  }
  if (selection && known) {
    for (const auto& n : *selection) {
      if (!known->count(n)) throw HarnessError("unknown test: " + n);
    }
  }
  const std::set<std::string> wanted = selection ? *selection : known.value_or(std::set<std::string>{});
  opts.env["PD_TESTS"] = join(wanted, " ");

  if (!config_.build_cmd.empty()) {
    const auto b = run_shell(config_.build_cmd, opts, config_.build_timeout);
    if (b.exit_code != 0) {
      if (wanted.empty()) throw HarnessError("build failed");
      TestReport report;
      for (const auto& n : wanted) report.add({n, TestOutcome::Error, "build failed"});
      return report;
    }
  }

  TestReport report;
  if (config_.result_format == ResultFormat::ExitCodePerTest) {
    for (const auto& n : wanted) {
      const auto r = run_shell(replace_all(config_.test_cmd, "{test}", shell_quote(n)), opts, config_.test_timeout);
      if (r.exit_code == 0) {
        report.add({n, TestOutcome::Pass, ""});
      } else {
        report.add({n, TestOutcome::Fail, r.timed_out ? "timeout" : "exit code " + std::to_string(r.exit_code)});
      }
    }
    return report;
  }

  std::string quoted;
  for (const auto& n : wanted) quoted += (quoted.empty() ? "" : " ") + shell_quote(n);
  const auto batch_timeout = config_.test_timeout * static_cast<long>(std::max<std::size_t>(1, wanted.size()));
  const auto r = run_shell(replace_all(config_.test_cmd, "{tests}", quoted), opts, batch_timeout);
  std::string text = r.out;
  if (config_.result_format == ResultFormat::JUnitXml && !config_.result_file.empty()) {
    std::error_code ec;
    text = fs::exists(dir.path / config_.result_file, ec) ? read_file(dir.path / config_.result_file) : "";
  }
  const TestReport parsed =
      config_.result_format == ResultFormat::Tap ? parse_tap(text) : parse_junit_xml(text);
  if (!selection) {
    report = parsed;
    for (const auto& n : wanted) {
      if (!report.find(n)) report.add({n, TestOutcome::Error, r.timed_out ? "timeout" : "not reported"});
    }
    return report;
  }
  for (const auto& n : wanted) {
    const TestResult* found = parsed.find(n);
    if (found) {
      report.add(*found);
    } else {
      report.add({n, r.timed_out ? TestOutcome::Fail : TestOutcome::Error, r.timed_out ? "timeout" : "not reported"});
    }
  }
  return report;
}

namespace {

struct VersionRuns {
  std::set<std::string> passing;
  std::set<std::string> flaky;
};

VersionRuns run_repeated(const SourceTree& tree, const Harness& harness) {
  const int runs = harness.deterministic() ? 1 : 3;
  std::vector<TestReport> reports;
  for (int i = 0; i < runs; ++i) reports.push_back(harness.run_suite(tree, std::nullopt));
  VersionRuns out;
  std::set<std::string> names;
  for (const auto& r : reports) {
    const auto n = r.names();
    names.insert(n.begin(), n.end());
  }
  for (const auto& name : names) {
    std::set<TestOutcome> seen;
    for (const auto& r : reports) {
      const TestResult* t = r.find(name);
      seen.insert(t ? t->outcome : TestOutcome::Error);
    }
    if (seen.size() > 1) {
      out.flaky.insert(name);
    } else if (*seen.begin() == TestOutcome::Pass) {
      out.passing.insert(name);
    }
  }
  return out;
}

}  // namespace

SuitePair prepare_suites(const SourceTree& old_version, const SourceTree& new_version, const Harness& harness) {
  for (const auto* v : {&old_version, &new_version}) {
    const auto c = harness.compile_check(v->program_files());
    if (!c.ok) {
      throw HarnessError(std::string(v == &old_version ? "old" : "new") + " version does not compile" +
                         (c.diagnostics.empty() ? "" : ": " + c.diagnostics.front()));
    }
  }
  const VersionRuns old_runs = run_repeated(old_version, harness);
  const VersionRuns new_runs = run_repeated(new_version, harness);
  SuitePair s;
  s.flaky = old_runs.flaky;
  s.flaky.insert(new_runs.flaky.begin(), new_runs.flaky.end());
  for (const auto& n : old_runs.passing) {
    if (!s.flaky.count(n)) s.regression.insert(n);
  }
  for (const auto& n : new_runs.passing) {
    if (!s.flaky.count(n)) s.fixed.insert(n);
  }
  s.regression_tests = old_version.test_files();
  s.fixed_tests = new_version.test_files();
  s.log.push_back("regression suite: " + std::to_string(s.regression.size()) + " tests");
  s.log.push_back("fixed suite: " + std::to_string(s.fixed.size()) + " tests");
  for (const auto& n : s.flaky) s.log.push_back("flaky, excluded: " + n);
  return s;
}

std::set<std::string> triggering_tests(const SourceTree& version, const SuitePair& suites, const Harness& harness) {
  if (suites.fixed.empty()) return {};
  const SourceTree tree = version.program_files().with_tests_from(suites.fixed_tests);
  std::set<std::string> failing;
  if (!harness.compile_check(version.program_files()).ok) return suites.fixed;
  TestReport report;
  try {
    report = harness.run_suite(tree, suites.fixed);
  } catch (const HarnessError&) {
    return suites.fixed;
  }
  for (const auto& n : suites.fixed) {
    if (!report.passed(n)) failing.insert(n);
  }
  return failing;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Illegal:
      return "illegal";
    case Verdict::Regressing:
      return "regressing";
    case Verdict::NonFixing:
      return "non-fixing";
    case Verdict::Candidate:
      return "candidate";
  }
  return "?";
}

Validation validate(const SourceTree& program, const SuitePair& suites, const std::set<std::string>& triggering,
                    const Harness& harness) {
  Validation v;
  if (!harness.compile_check(program).ok) return v;

  if (!suites.regression.empty()) {
    TestReport report;
    try {
      report = harness.run_suite(program.with_tests_from(suites.regression_tests), suites.regression);
    } catch (const HarnessError&) {
      v.verdict = Verdict::Regressing;
      return v;
    }
    for (const auto& n : suites.regression) {
      if (report.passed(n)) ++v.regression_passed;
    }
    if (v.regression_passed != suites.regression.size()) {
      v.verdict = Verdict::Regressing;
      return v;
    }
  }

  v.verdict = Verdict::NonFixing;
  if (triggering.empty()) return v;
  TestReport report;
  try {
    report = harness.run_suite(program.with_tests_from(suites.fixed_tests), triggering);
  } catch (const HarnessError&) {
    return v;
  }
  for (const auto& n : triggering) {
    if (report.passed(n)) v.triggering_passed.insert(n);
  }
  if (!v.triggering_passed.empty()) v.verdict = Verdict::Candidate;
  return v;
}

std::unique_ptr<Harness> make_harness(const fs::path& config_path) {
  if (config_path.empty()) return std::make_unique<MiniLangHarness>();
  return std::make_unique<ExternalHarness>(load_external_config(config_path));
}

}  // namespace pd
