#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace pd {

inline constexpr std::string_view kSourceExtension = ".ml4j";
inline constexpr std::string_view kTestRoot = "tests/";

// Test files are recognized by path prefix.
bool is_test_path(std::string_view path);

// One program version: relative path (forward slashes) -> file text.
struct SourceTree {
  std::map<std::string, std::string> files;

  bool operator==(const SourceTree&) const = default;

  SourceTree program_files() const;
  SourceTree test_files() const;
  // Program files of this tree combined with the test files of `tests`.
  SourceTree with_tests_from(const SourceTree& tests) const;

  std::uint64_t hash() const;
};

// Reads every file with the given extension below `root`. A `.tar.gz` path
// is unpacked into a scratch directory first.
SourceTree load_tree(const std::filesystem::path& root,
                     std::string_view extension = kSourceExtension);

// Writes the tree below `root`, creating directories as needed. Existing
// files with the source extension that are not part of the tree are removed.
void write_tree(const SourceTree& tree, const std::filesystem::path& root);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Scratch space: $PD_WORKDIR when set, otherwise the system temp directory.
std::filesystem::path scratch_root();
std::filesystem::path make_scratch_dir(std::string_view prefix);

// Canonical rendering of every parseable file; unparseable files are kept
// verbatim.
SourceTree normalize(const SourceTree& tree);

}  // namespace pd
