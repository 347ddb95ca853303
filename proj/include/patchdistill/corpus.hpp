#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "patchdistill/refactoring.hpp"
#include "patchdistill/source_tree.hpp"

// Synthetic MiniLang projects and commits with a ledger of what was injected.
namespace pd::corpus {

using Rng = std::mt19937_64;

// Two-class project (an account-like class and a static helper class) with
// randomized identifiers and constants. `names` maps roles to identifiers.
struct Project {
  std::map<std::string, std::string> names;
  std::map<std::string, int> constants;
  SourceTree program;
  std::vector<std::string> probes;  // int-valued expressions over the program
};

Project random_project(Rng& rng, int extra_helpers = 2);

// Value of each expression (display form), nullopt when evaluation fails.
std::vector<std::optional<std::string>> evaluate(const SourceTree& program, const std::vector<std::string>& exprs);

// Test class asserting `expr == value` for each pair, as one file.
std::string probe_tests(const std::string& package, const std::string& cls,
                        const std::vector<std::pair<std::string, std::string>>& cases,
                        const std::string& name_prefix = "test_p");

enum class Category { PureFix, FixRefactoring, FixUnsupported, Budget };

const char* to_string(Category c);

struct Commit {
  std::string id;
  Category category = Category::PureFix;
  std::string fix;     // fix template
  std::string change;  // refactoring kind or unsupported change, empty for pure fixes
  SourceTree old_version;
  SourceTree new_version;
  std::string truth;   // concise patch against the refactored old version
  std::optional<Refactoring> refactoring;
  std::vector<std::string> triggering;
};

// per_category commits for each of the three fix categories.
std::vector<Commit> generate_corpus(std::uint64_t seed, std::size_t per_category);

// Commit whose fix inserts `lines` independent lines into one method.
Commit wide_commit(std::uint64_t seed, std::size_t lines);

// Writes commits/<id>/{old,new}/, commits/<id>/truth.diff, manifest.json
// and ledger.json below `dir`.
void write_corpus(const std::vector<Commit>& commits, const std::filesystem::path& dir);

// A random project (with passing probe tests) before and after one
// refactoring of `kind`, applied through the engine.
struct Injection {
  SourceTree before;
  SourceTree after;
  Refactoring refactoring;
};

Injection inject_refactoring(Rng& rng, RefactoringKind kind);

// Random old/new pair with a nonempty triggering set for oracle checks.
struct Instance {
  SourceTree old_version;
  SourceTree new_version;
};

Instance random_instance(Rng& rng, std::size_t max_units);

}  // namespace pd::corpus
