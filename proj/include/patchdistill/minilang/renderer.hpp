#pragma once

#include <string>

#include "patchdistill/minilang/ast.hpp"

namespace pd::ml {

// Canonical layout: one statement per line, four-space indentation, a blank
// line around methods. Output is LF-terminated and byte-deterministic.
std::string render(const CompilationUnit& unit);

std::string render(const Expr& expr);
// Single statement at the given indentation depth (may span several lines).
std::string render(const Stmt& stmt, int depth = 0);
std::string render(const MethodDecl& method, int depth = 1);

}  // namespace pd::ml
