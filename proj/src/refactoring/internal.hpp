#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "patchdistill/minilang/ast.hpp"
#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/source_tree.hpp"

namespace pd::detail {

using Block = std::vector<ml::Stmt>;
using StmtPath = std::vector<std::pair<Block*, std::size_t>>;

struct Occurrence {
  StmtPath path;  // enclosing statements from the method body inward
  ml::Expr* expr = nullptr;
};

// Structural matches of `pattern` in the method, source order, never nested
// and never the whole target of an assignment.
std::vector<Occurrence> find_occurrences(ml::MethodDecl& m, const ml::Expr& pattern);

struct StmtRun {
  Block* block = nullptr;
  std::size_t begin = 0;
  std::size_t count = 0;
};

// First contiguous run of statements rendering to `rendered`, pre-order.
std::optional<StmtRun> find_statements(ml::MethodDecl& m, const std::vector<std::string>& rendered);

// Locals (including parameters) referenced anywhere in a method.
bool method_uses_name(const ml::MethodDecl& m, const std::string& name);
bool method_declares(const ml::MethodDecl& m, const std::string& name);

// Slots declared by the statements themselves (nested declarations included).
std::vector<int> declared_slots(const std::vector<ml::Stmt>& stmts);

SourceTree render_units(const std::vector<ml::CompilationUnit>& units);

struct ClassLoc {
  ml::CompilationUnit* unit = nullptr;
  ml::ClassDecl* cls = nullptr;
};

// Splits `pkg.Class.rest...` by finding the class in the program.
std::optional<std::pair<ClassLoc, std::vector<std::string>>> resolve(ml::Program& program,
                                                                     const std::string& qualified);

// Token edit distance between two texts (removed + inserted tokens).
std::size_t token_distance(const std::string& a, const std::string& b);

}  // namespace pd::detail
