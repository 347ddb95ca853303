#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "patchdistill/refactoring.hpp"
#include "patchdistill/source_tree.hpp"

namespace pd {

enum class ElementKind { Package, Class, Method, Field, Parameter, LocalVariable };

const char* to_string(ElementKind kind);

struct CodeElement {
  ElementKind kind = ElementKind::Class;
  std::string qualified_name;
  std::string signature;
  std::uint64_t body_fingerprint = 0;

  bool operator==(const CodeElement&) const = default;
};

struct ElementMatching {
  std::vector<std::pair<CodeElement, CodeElement>> matched;  // (old, new)
  std::vector<CodeElement> removed;
  std::vector<CodeElement> added;
};

// Pairs program elements top-down (packages, classes, members, then
// parameters and locals of matched methods). Exact names first; leftovers of
// the same kind and parent pair up when their fingerprints are identical and
// unique on both sides.
ElementMatching match_elements(const SourceTree& old_tree, const SourceTree& new_tree);

// Refactorings of the eight supported kinds, sorted by kind then subject.
std::vector<Refactoring> detect(const SourceTree& old_tree, const SourceTree& new_tree);

// JSON array of {kind, subject, new_name, span, ...}.
std::string dump_refactorings(const std::vector<Refactoring>& refactorings);

}  // namespace pd
