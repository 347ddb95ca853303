#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "patchdistill/minilang/ast.hpp"

namespace pd::ml {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, int line, int column)
      : std::runtime_error(message), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Parses one source file. Lexical errors are reported as SyntaxError too so
// callers only need one handler. Methods named `test_*` are flagged as tests
// when `path` lies under the test root.
CompilationUnit parse(std::string_view text, const std::string& path);

// Parses a standalone expression (used for refactoring parameters).
Expr parse_expression(std::string_view text);

}  // namespace pd::ml
