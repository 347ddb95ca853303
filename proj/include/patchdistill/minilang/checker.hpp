#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "patchdistill/minilang/ast.hpp"
#include "patchdistill/source_tree.hpp"

namespace pd::ml {

struct Diagnostic {
  std::string file;
  int line = 0;
  int column = 0;
  std::string message;

  // `path:line:col: message`
  std::string str() const;
  bool operator==(const Diagnostic&) const = default;
};

// A parsed and name-resolved tree. Bindings and static types are written
// into the AST nodes; files that failed to parse are absent from `units`.
class Program {
 public:
  std::vector<CompilationUnit> units;
  std::vector<Diagnostic> diagnostics;
  std::set<std::string> broken_files;  // files with at least one diagnostic

  bool clean() const { return diagnostics.empty(); }
  const ClassDecl* find_class(const std::string& name) const;
  const CompilationUnit* unit_of_class(const std::string& name) const;
  const MethodDecl* find_method(const std::string& cls, const std::string& method) const;
  // Index of the field within its class, or -1.
  int field_index(const std::string& cls, const std::string& field) const;

  void reindex();

 private:
  std::map<std::string, std::pair<std::size_t, std::size_t>> class_index_;
};

// Parses every file and resolves names. Never throws on bad input: syntax
// errors become diagnostics.
Program analyze(const SourceTree& tree);

// Resolves names in already-parsed units (annotating them in place).
Program analyze(std::vector<CompilationUnit> units);

// Name resolution, call arity, simple typing, reachability and definite
// return. Empty iff the tree "compiles".
std::vector<Diagnostic> check(const SourceTree& tree);

}  // namespace pd::ml
