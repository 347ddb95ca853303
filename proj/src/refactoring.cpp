#include "patchdistill/refactoring.hpp"

#include <array>
#include <tuple>

namespace pd {

namespace {

constexpr std::array<const char*, 8> kKindNames = {
    "RenameClass",     "RenameMethod",  "RenameVariable", "RenameField",
    "RenameParameter", "RenamePackage", "ExtractMethod",  "ExtractVariable",
};

}  // namespace

const char* to_string(RefactoringKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<RefactoringKind> refactoring_kind_from_string(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (name == kKindNames[i]) return static_cast<RefactoringKind>(i);
  }
  return std::nullopt;
}

bool is_rename(RefactoringKind kind) {
  return kind != RefactoringKind::ExtractMethod && kind != RefactoringKind::ExtractVariable;
}

bool refactoring_less(const Refactoring& a, const Refactoring& b) {
  return std::tie(a.kind, a.subject, a.new_name, a.ordinal) < std::tie(b.kind, b.subject, b.new_name, b.ordinal);
}

nlohmann::ordered_json to_json(const Refactoring& r) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(r.kind);
  j["subject"] = r.subject;
  j["new_name"] = r.new_name;
  j["span"] = {{"file", r.span.file},
               {"line", r.span.line},
               {"column", r.span.column},
               {"begin", r.span.begin},
               {"end", r.span.end}};
  switch (r.kind) {
    case RefactoringKind::RenameVariable:
      j["ordinal"] = r.ordinal;
      break;
    case RefactoringKind::ExtractVariable:
      j["type"] = r.var_type;
      j["expression"] = r.expression;
      j["occurrences"] = r.occurrences;
      break;
    case RefactoringKind::ExtractMethod: {
      auto params = nlohmann::ordered_json::array();
      for (const auto& p : r.params) params.push_back({{"type", p.type}, {"name", p.name}});
      j["params"] = params;
      j["args"] = r.args;
      j["statements"] = r.statements;
      j["return_type"] = r.return_type;
      j["static"] = r.is_static;
      j["insert_after"] = r.insert_after;
      break;
    }
    default:
      break;
  }
  return j;
}

Refactoring refactoring_from_json(const nlohmann::json& j) {
  Refactoring r;
  const auto kind = refactoring_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown refactoring kind " + j.at("kind").get<std::string>());
  r.kind = *kind;
  r.subject = j.at("subject").get<std::string>();
  r.new_name = j.value("new_name", "");
  if (j.contains("span")) {
    const auto& s = j["span"];
    r.span.file = s.value("file", "");
    r.span.line = s.value("line", 0);
    r.span.column = s.value("column", 0);
    r.span.begin = s.value("begin", std::size_t{0});
    r.span.end = s.value("end", std::size_t{0});
  }
  r.ordinal = j.value("ordinal", 0);
  r.var_type = j.value("type", "");
  r.expression = j.value("expression", "");
  if (j.contains("occurrences")) r.occurrences = j["occurrences"].get<std::vector<int>>();
  if (j.contains("params")) {
    for (const auto& p : j["params"]) r.params.push_back({p.at("type"), p.at("name")});
  }
  if (j.contains("args")) r.args = j["args"].get<std::vector<std::string>>();
  if (j.contains("statements")) r.statements = j["statements"].get<std::vector<std::string>>();
  r.return_type = j.value("return_type", "void");
  r.is_static = j.value("static", false);
  r.insert_after = j.value("insert_after", "");
  return r;
}

}  // namespace pd
