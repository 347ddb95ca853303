#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchdistill/source_tree.hpp"
#include "patchdistill/test_report.hpp"

namespace pd {

struct CompileResult {
  bool ok = false;
  std::vector<std::string> diagnostics;
};

// Compile/test oracle. Implementations keep no mutable state, so one
// instance may serve several worker threads at once.
class Harness {
 public:
  virtual ~Harness() = default;

  virtual CompileResult compile_check(const SourceTree& tree) const = 0;
  // Runs the selected tests of `tree` (program and test files). Unknown test
  // names raise HarnessError.
  virtual TestReport run_suite(const SourceTree& tree, const TestSelection& selection) const = 0;
  // False when repeated runs may disagree; suites are then run three times.
  virtual bool deterministic() const = 0;
  virtual std::string name() const = 0;
};

class MiniLangHarness : public Harness {
 public:
  explicit MiniLangHarness(std::chrono::milliseconds per_test_timeout = std::chrono::milliseconds(1000));

  CompileResult compile_check(const SourceTree& tree) const override;
  TestReport run_suite(const SourceTree& tree, const TestSelection& selection) const override;
  bool deterministic() const override { return true; }
  std::string name() const override { return "minilang"; }

 private:
  std::chrono::milliseconds timeout_;
};

enum class ResultFormat { JUnitXml, Tap, ExitCodePerTest };

struct ExternalConfig {
  // Run through /bin/sh inside a disposable copy of the tree. `{test}` in
  // test_cmd is replaced by the test name (exitcode-per-test), `{tests}` by
  // the space-separated selection. PD_TESTS carries the selection as well.
  std::string build_cmd;
  std::string test_cmd;
  std::string test_list_cmd;  // one test name per output line
  ResultFormat result_format = ResultFormat::Tap;
  std::string result_file;    // junit-xml: report path below the copy; stdout when empty
  std::filesystem::path workdir;  // scaffold copied under the tree when set
  std::map<std::string, std::string> env;
  std::chrono::milliseconds test_timeout{30000};
  std::chrono::milliseconds build_timeout{300000};
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON object with the ExternalConfig keys; timeouts as `test_timeout_secs`
// and `build_timeout_secs`. Relative workdir paths resolve against the
// config file's directory.
ExternalConfig load_external_config(const std::filesystem::path& path);
ExternalConfig parse_external_config(const std::string& json_text, const std::filesystem::path& base_dir = {});

class ExternalHarness : public Harness {
 public:
  explicit ExternalHarness(ExternalConfig config);

  CompileResult compile_check(const SourceTree& tree) const override;
  TestReport run_suite(const SourceTree& tree, const TestSelection& selection) const override;
  bool deterministic() const override { return false; }
  std::string name() const override { return "external"; }

  const ExternalConfig& config() const { return config_; }

 private:
  std::filesystem::path materialize(const SourceTree& tree) const;
  ExternalConfig config_;
};

// Parsers for the external result formats. Names are `Class.method` for
// JUnit (classname attribute, then name) and the description for TAP.
TestReport parse_tap(const std::string& text);
TestReport parse_junit_xml(const std::string& text);

struct SuitePair {
  std::set<std::string> regression;  // T_{n-1}: pass on the old version
  std::set<std::string> fixed;       // T_n: pass on the new version
  SourceTree regression_tests;       // test files T_{n-1} runs from
  SourceTree fixed_tests;            // test files T_n runs from
  std::set<std::string> flaky;       // excluded after disagreeing runs
  std::vector<std::string> log;
};

// Throws HarnessError when either version does not compile.
SuitePair prepare_suites(const SourceTree& old_version, const SourceTree& new_version, const Harness& harness);

// Tests of T_n failing when run against the program files of `version`.
std::set<std::string> triggering_tests(const SourceTree& version, const SuitePair& suites, const Harness& harness);

enum class Verdict { Illegal, Regressing, NonFixing, Candidate };

const char* to_string(Verdict v);

struct Validation {
  Verdict verdict = Verdict::Illegal;
  std::size_t regression_passed = 0;
  std::set<std::string> triggering_passed;
};

// `program` holds the program files of the candidate tree; the test files
// come from the suites.
Validation validate(const SourceTree& program, const SuitePair& suites, const std::set<std::string>& triggering,
                    const Harness& harness);

std::unique_ptr<Harness> make_harness(const std::filesystem::path& config_path);

}  // namespace pd
