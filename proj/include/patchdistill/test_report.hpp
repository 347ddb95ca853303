#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pd {

enum class TestOutcome { Pass, Fail, Error };

const char* to_string(TestOutcome outcome);

struct TestResult {
  std::string name;  // fully-qualified: Class.test_method
  TestOutcome outcome = TestOutcome::Error;
  std::string message;

  bool operator==(const TestResult&) const = default;
};

// Results ordered by test name.
struct TestReport {
  std::vector<TestResult> results;

  bool operator==(const TestReport&) const = default;

  void add(TestResult result);  // keeps the ordering invariant
  const TestResult* find(const std::string& name) const;
  bool passed(const std::string& name) const;
  std::set<std::string> names() const;
  std::set<std::string> failing() const;  // fail or error
  std::size_t pass_count() const;
  // Outcome vector in name order; used for equivalence checks.
  std::vector<TestOutcome> outcomes() const;
};

// nullopt selects every test.
using TestSelection = std::optional<std::set<std::string>>;

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pd
