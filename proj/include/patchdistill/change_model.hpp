#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchdistill/source_tree.hpp"

namespace pd {

struct Token {
  std::string text;
  std::string file;
  std::size_t index = 0;
  int line = 1;  // line in the file the token was read from
};

// Program files only; test files never take part in a change sequence.
std::vector<Token> tokenize_file(const std::string& path, const std::string& text);

enum class Granularity { Token, Line };
enum class EditType { Remove, Insert };

const char* to_string(Granularity g);
const char* to_string(EditType e);

// A single edit against the base tree. Removes cover base tokens
// [begin, end); inserts put target tokens [target_begin, target_end) into
// the base gap before token `begin`. Several inserts sharing a gap are ordered
// by their target position.
struct ChangeUnit {
  Granularity kind = Granularity::Token;
  EditType edit = EditType::Insert;
  std::string file;
  std::size_t anchor = 0;  // base token index, or base line for line-level units
  std::string payload;     // token text, or the full line text

  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t target_begin = 0;
  std::size_t target_end = 0;
  std::vector<std::string> tokens;  // removed or inserted token texts

  // Line the tokens come from (base line for removes, target line for
  // inserts), its token count and its text. Used by coarsen.
  int line = 0;
  std::size_t line_size = 0;
  std::string line_text;

  bool operator==(const ChangeUnit&) const = default;
};

// Ordered by file, base position, removes before inserts, target position.
bool unit_less(const ChangeUnit& a, const ChangeUnit& b);

using ChangeSeq = std::vector<ChangeUnit>;

struct Patch {
  ChangeSeq units;
  std::string diff;
  std::string commit_id;
  double budget_spent_secs = 0;
};

class DiffError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AnchorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token-level edit script over program files paired by path. Files present in
// only one tree become line-level inserts or removes. Throws DiffError when a
// file cannot be tokenized.
ChangeSeq diff(const SourceTree& base, const SourceTree& target);

// Folds token units covering a whole base line (removes) or a whole target
// line (inserts) into one line-level unit each.
ChangeSeq coarsen(const ChangeSeq& seq, const SourceTree& base);

// Applies any subsequence of a sequence computed against `base`. Touched files
// are re-rendered when they still parse; a file left without tokens is
// dropped.
SourceTree apply(const SourceTree& base, const ChangeSeq& subseq);

// Keeps the base token streams around for repeated application.
class ChangeApplier {
 public:
  explicit ChangeApplier(SourceTree base);
  SourceTree apply(const ChangeSeq& subseq) const;
  const SourceTree& base() const { return base_; }

 private:
  SourceTree base_;
  std::map<std::string, std::vector<std::string>> tokens_;
};

// Unified diff with three context lines, files in path order.
std::string to_unified_diff(const SourceTree& base, const SourceTree& patched);

// One JSON object per line: {file, kind, anchor, edit, payload}.
std::string dump_jsonl(const ChangeSeq& seq);

// Number of `+` and `-` lines in a unified diff.
std::size_t changed_lines(const std::string& unified_diff);

// LF line endings, no trailing blanks on any line.
std::string normalize_patch_text(const std::string& text);

}  // namespace pd
