#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/test_report.hpp"

namespace pd::ml {

struct Object;

// null | int | bool | string | object reference
using Value = std::variant<std::monostate, std::int64_t, bool, std::string, std::shared_ptr<Object>>;

struct Object {
  const ClassDecl* cls = nullptr;
  std::vector<Value> fields;
};

// Null dereference, division by zero, missing method, stack overflow.
class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AssertionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExecutionTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::chrono::milliseconds per_test_timeout{1000};
  int max_call_depth = 400;
};

std::string display(const Value& v);

// Fully-qualified names of all test methods, sorted.
std::vector<std::string> list_tests(const Program& program);

// Runs the selected tests of an analyzed program. Tests declared in files
// with diagnostics report `error`; if any program (non-test) file has
// diagnostics every test reports `error`. Assertion failures and timeouts
// are `fail`, runtime faults are `error`. Throws HarnessError for unknown
// test names in the selection.
TestReport run_tests(const Program& program, const TestSelection& selection,
                     const RunOptions& options = {});
TestReport run_tests(const SourceTree& tree, const TestSelection& selection,
                     const RunOptions& options = {});

// Calls a static, parameterless method. Throws RuntimeFault, AssertionFailed
// or ExecutionTimeout.
Value invoke_static(const Program& program, const std::string& cls, const std::string& method,
                    const RunOptions& options = {});

}  // namespace pd::ml
