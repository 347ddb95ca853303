#include "patchdistill/source_tree.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

#include "patchdistill/minilang/parser.hpp"
#include "patchdistill/minilang/renderer.hpp"
#include "patchdistill/subprocess.hpp"

namespace fs = std::filesystem;

namespace pd {

bool is_test_path(std::string_view path) { return path.rfind(kTestRoot, 0) == 0; }

SourceTree SourceTree::program_files() const {
  SourceTree out;
  for (const auto& [path, text] : files) {
    if (!is_test_path(path)) out.files.emplace(path, text);
  }
  return out;
}

SourceTree SourceTree::test_files() const {
  SourceTree out;
  for (const auto& [path, text] : files) {
    if (is_test_path(path)) out.files.emplace(path, text);
  }
  return out;
}

SourceTree SourceTree::with_tests_from(const SourceTree& tests) const {
  SourceTree out = program_files();
  for (const auto& [path, text] : tests.files) {
    if (is_test_path(path)) out.files.emplace(path, text);
  }
  return out;
}

std::uint64_t SourceTree::hash() const {
  // FNV-1a over path/text pairs with separators.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const auto& [path, text] : files) {
    mix(path);
    mix(text);
  }
  return h;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
  write_file(tmp, content);
  fs::rename(tmp, path);
}

fs::path scratch_root() {
  if (const char* env = std::getenv("PD_WORKDIR"); env != nullptr && *env != '\0') {
    return fs::path(env);
  }
  return fs::temp_directory_path();
}

fs::path make_scratch_dir(std::string_view prefix) {
  static std::atomic<unsigned> counter{0};
  const fs::path root = scratch_root();
  fs::create_directories(root);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    fs::path dir = root / (std::string(prefix) + "-" + std::to_string(::getpid()) + "-" +
                           std::to_string(counter++));
    std::error_code ec;
    if (fs::create_directory(dir, ec)) return dir;
  }
  throw std::runtime_error("cannot create scratch directory under " + root.string());
}

namespace {

bool is_tarball(const fs::path& p) {
  const std::string s = p.string();
  return s.size() > 7 && (s.ends_with(".tar.gz") || s.ends_with(".tgz"));
}

}  // namespace

SourceTree load_tree(const fs::path& root, std::string_view extension) {
  fs::path dir = root;
  if (is_tarball(root)) {
    dir = make_scratch_dir("unpack");
    const auto result = run_command({"tar", "-xzf", fs::absolute(root).string(), "-C", dir.string()},
                                    {}, std::chrono::seconds(60));
    if (result.exit_code != 0) throw std::runtime_error("cannot unpack " + root.string());
  }
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + root.string());
  SourceTree tree;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() != extension) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    tree.files.emplace(rel, read_file(entry.path()));
  }
  return tree;
}

void write_tree(const SourceTree& tree, const fs::path& root) {
  fs::create_directories(root);
  std::vector<fs::path> stale;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != kSourceExtension) continue;
    const std::string rel = fs::relative(entry.path(), root).generic_string();
    if (!tree.files.contains(rel)) stale.push_back(entry.path());
  }
  for (const auto& p : stale) fs::remove(p);
  for (const auto& [path, text] : tree.files) write_file(root / path, text);
}

SourceTree normalize(const SourceTree& tree) {
  SourceTree out;
  for (const auto& [path, text] : tree.files) {
    try {
      out.files.emplace(path, ml::render(ml::parse(text, path)));
    } catch (const ml::SyntaxError&) {
      out.files.emplace(path, text);
    }
  }
  return out;
}

}  // namespace pd
