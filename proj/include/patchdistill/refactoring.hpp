#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pd {

enum class RefactoringKind {
  RenameClass,
  RenameMethod,
  RenameVariable,
  RenameField,
  RenameParameter,
  RenamePackage,
  ExtractMethod,
  ExtractVariable,
};

const char* to_string(RefactoringKind kind);
std::optional<RefactoringKind> refactoring_kind_from_string(const std::string& name);
bool is_rename(RefactoringKind kind);

struct SourceLocation {
  std::string file;
  int line = 0;
  int column = 0;
  std::size_t begin = 0;  // token range in the file
  std::size_t end = 0;

  bool operator==(const SourceLocation&) const = default;
};

struct TypedName {
  std::string type;
  std::string name;

  bool operator==(const TypedName&) const = default;
};

// Everything needed to replay one refactoring on the old version.
//
// Renames name their subject by its qualified name in the old version:
// `pkg`, `pkg.Class`, `pkg.Class.member`, `pkg.Class.method.var`.
// Extracts name the source method `pkg.Class.method` after all renames of
// the same commit have been applied.
struct Refactoring {
  RefactoringKind kind = RefactoringKind::RenameClass;
  std::string subject;
  std::string new_name;
  SourceLocation span;  // subject (renames) or extracted code (extracts)

  // RenameVariable: which declaration of that name, in source order.
  int ordinal = 0;

  // ExtractVariable
  std::string var_type;
  std::string expression;        // rendered initializer
  std::vector<int> occurrences;  // indices among the matches of `expression`

  // ExtractMethod
  std::vector<TypedName> params;
  std::vector<std::string> args;    // caller-side locals, one per parameter
  std::vector<std::string> statements;  // rendered extracted statements
  std::string return_type = "void";
  bool is_static = false;
  std::string insert_after;  // method the new one follows

  bool operator==(const Refactoring&) const = default;
};

// Deterministic order: kind, then subject, then new name.
bool refactoring_less(const Refactoring& a, const Refactoring& b);

// {kind, subject, new_name, span} plus kind-specific detail.
nlohmann::ordered_json to_json(const Refactoring& r);
Refactoring refactoring_from_json(const nlohmann::json& j);

}  // namespace pd
