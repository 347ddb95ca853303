#include "patchdistill/change_model.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "lcs.hpp"
#include "patchdistill/minilang/lexer.hpp"
#include "patchdistill/minilang/parser.hpp"
#include "patchdistill/minilang/renderer.hpp"

namespace pd {

namespace {

struct LineGroup {
  int line = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct FileTokens {
  std::vector<Token> tokens;
  std::vector<LineGroup> groups;
  std::vector<std::size_t> group_of;  // token -> group
  std::vector<std::string> lines;     // trimmed text lines, 0-based
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

FileTokens read_tokens(const std::string& path, const std::string& text) {
  FileTokens ft;
  try {
    ft.tokens = tokenize_file(path, text);
  } catch (const ml::LexError& e) {
    throw DiffError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                    e.what());
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    ft.lines.push_back(trim(std::string_view(text).substr(start, nl - start)));
    start = nl + 1;
  }
  for (std::size_t i = 0; i < ft.tokens.size(); ++i) {
    if (ft.groups.empty() || ft.groups.back().line != ft.tokens[i].line) {
      ft.groups.push_back({ft.tokens[i].line, i, i});
    }
    ft.groups.back().end = i + 1;
    ft.group_of.push_back(ft.groups.size() - 1);
  }
  return ft;
}

const std::string& line_text(const FileTokens& ft, int line) {
  static const std::string empty;
  const auto idx = static_cast<std::size_t>(line - 1);
  return idx < ft.lines.size() ? ft.lines[idx] : empty;
}

class Interner {
 public:
  std::uint32_t operator()(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<std::uint32_t>(ids_.size()));
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
};

ChangeUnit token_remove(const std::string& path, const FileTokens& b, std::size_t i) {
  const auto& g = b.groups[b.group_of[i]];
  ChangeUnit u;
  u.kind = Granularity::Token;
  u.edit = EditType::Remove;
  u.file = path;
  u.anchor = i;
  u.payload = b.tokens[i].text;
  u.begin = i;
  u.end = i + 1;
  u.tokens = {b.tokens[i].text};
  u.line = g.line;
  u.line_size = g.end - g.begin;
  u.line_text = line_text(b, g.line);
  return u;
}

ChangeUnit token_insert(const std::string& path, const FileTokens& t, std::size_t gap, std::size_t j) {
  const auto& g = t.groups[t.group_of[j]];
  ChangeUnit u;
  u.kind = Granularity::Token;
  u.edit = EditType::Insert;
  u.file = path;
  u.anchor = gap;
  u.payload = t.tokens[j].text;
  u.begin = gap;
  u.end = gap;
  u.target_begin = j;
  u.target_end = j + 1;
  u.tokens = {t.tokens[j].text};
  u.line = g.line;
  u.line_size = g.end - g.begin;
  u.line_text = line_text(t, g.line);
  return u;
}

std::vector<std::string> texts_of(const std::vector<Token>& toks, std::size_t b, std::size_t e) {
  std::vector<std::string> out;
  for (std::size_t i = b; i < e; ++i) out.push_back(toks[i].text);
  return out;
}

// Whole-line match first so that edits stay aligned with statements, then
// token matches inside each changed region.
detail::Matches match_tokens(const FileTokens& b, const FileTokens& t) {
  Interner tok_ids;
  detail::Symbols bs, ts;
  for (const auto& tok : b.tokens) bs.push_back(tok_ids(tok.text));
  for (const auto& tok : t.tokens) ts.push_back(tok_ids(tok.text));

  Interner line_ids;
  auto line_symbols = [&](const FileTokens& ft) {
    detail::Symbols out;
    for (const auto& g : ft.groups) {
      std::string key;
      for (std::size_t i = g.begin; i < g.end; ++i) {
        key += ft.tokens[i].text;
        key += '\x1f';
      }
      out.push_back(line_ids(key));
    }
    return out;
  };
  const auto bl = line_symbols(b);
  const auto tl = line_symbols(t);

  // Prefer pairing line starts with line starts and line ends with line ends.
  auto weight = [&](std::size_t i, std::size_t j) -> std::uint32_t {
    const auto& bg = b.groups[b.group_of[i]];
    const auto& tg = t.groups[t.group_of[j]];
    return static_cast<std::uint32_t>((bg.begin == i && tg.begin == j) + (bg.end == i + 1 && tg.end == j + 1));
  };

  detail::Matches result;
  auto line_matches = detail::lcs_matches(bl, 0, bl.size(), tl, 0, tl.size());
  line_matches.emplace_back(bl.size(), tl.size());
  std::size_t bpos = 0, tpos = 0;
  for (auto [li, lj] : line_matches) {
    const std::size_t bstop = li < b.groups.size() ? b.groups[li].begin : b.tokens.size();
    const std::size_t tstop = lj < t.groups.size() ? t.groups[lj].begin : t.tokens.size();
    auto inner = detail::lcs_matches(bs, bpos, bstop, ts, tpos, tstop, weight);
    result.insert(result.end(), inner.begin(), inner.end());
    if (li == b.groups.size()) break;
    const auto& bg = b.groups[li];
    const auto& tg = t.groups[lj];
    for (std::size_t k = 0; k < bg.end - bg.begin; ++k) result.emplace_back(bg.begin + k, tg.begin + k);
    bpos = bg.end;
    tpos = tg.end;
  }

  // Line alignment can miss the true minimum; fall back to a plain token LCS
  // when it does.
  if (result.size() < detail::lcs_length(bs, ts)) {
    result = detail::lcs_matches(bs, 0, bs.size(), ts, 0, ts.size(), weight);
  }
  return result;
}

void diff_file(const std::string& path, const std::string* base_text, const std::string* target_text,
               ChangeSeq& out) {
  if (base_text == nullptr) {
    const auto t = read_tokens(path, *target_text);
    for (const auto& g : t.groups) {
      ChangeUnit u;
      u.kind = Granularity::Line;
      u.edit = EditType::Insert;
      u.file = path;
      u.anchor = 1;
      u.payload = line_text(t, g.line);
      u.target_begin = g.begin;
      u.target_end = g.end;
      u.tokens = texts_of(t.tokens, g.begin, g.end);
      u.line = g.line;
      u.line_size = g.end - g.begin;
      u.line_text = u.payload;
      out.push_back(std::move(u));
    }
    return;
  }
  if (target_text == nullptr) {
    const auto b = read_tokens(path, *base_text);
    for (const auto& g : b.groups) {
      ChangeUnit u;
      u.kind = Granularity::Line;
      u.edit = EditType::Remove;
      u.file = path;
      u.anchor = static_cast<std::size_t>(g.line);
      u.payload = line_text(b, g.line);
      u.begin = g.begin;
      u.end = g.end;
      u.tokens = texts_of(b.tokens, g.begin, g.end);
      u.line = g.line;
      u.line_size = g.end - g.begin;
      u.line_text = u.payload;
      out.push_back(std::move(u));
    }
    return;
  }

  const auto b = read_tokens(path, *base_text);
  const auto t = read_tokens(path, *target_text);
  detail::Matches matches;
  try {
    matches = match_tokens(b, t);
  } catch (const std::length_error&) {
    throw DiffError(path + ": file too large to diff");
  }
  matches.emplace_back(b.tokens.size(), t.tokens.size());
  std::size_t pi = 0, pj = 0;
  for (auto [qi, qj] : matches) {
    for (std::size_t i = pi; i < qi; ++i) out.push_back(token_remove(path, b, i));
    for (std::size_t j = pj; j < qj; ++j) out.push_back(token_insert(path, t, pi, j));
    pi = qi + 1;
    pj = qj + 1;
  }
}

// Used when a candidate no longer parses: one statement per line, indented
// by brace depth.
std::string raw_layout(const std::vector<std::string>& toks) {
  std::string out;
  bool line_start = true;
  std::size_t depth = 0;
  for (const auto& tok : toks) {
    if (tok == "}" && depth > 0) --depth;
    if (line_start) {
      out.append(depth * 4, ' ');
    } else {
      out += ' ';
    }
    out += tok;
    if (tok == "{") ++depth;
    line_start = tok == ";" || tok == "{" || tok == "}";
    if (line_start) out += '\n';
  }
  if (!line_start) out += '\n';
  return out;
}

std::string layout(const std::string& path, const std::vector<std::string>& toks) {
  std::string raw = raw_layout(toks);
  try {
    return ml::render(ml::parse(raw, path));
  } catch (const ml::SyntaxError&) {
    return raw;
  }
}

}  // namespace

std::vector<Token> tokenize_file(const std::string& path, const std::string& text) {
  std::vector<Token> out;
  for (auto& t : ml::tokenize(text)) {
    out.push_back({std::move(t.text), path, t.index, t.line});
  }
  return out;
}

const char* to_string(Granularity g) { return g == Granularity::Token ? "token" : "line"; }
const char* to_string(EditType e) { return e == EditType::Remove ? "remove" : "insert"; }

bool unit_less(const ChangeUnit& a, const ChangeUnit& b) {
  return std::tie(a.file, a.begin, a.edit, a.target_begin, a.end, a.kind) <
         std::tie(b.file, b.begin, b.edit, b.target_begin, b.end, b.kind);
}

ChangeSeq diff(const SourceTree& base, const SourceTree& target) {
  ChangeSeq out;
  const SourceTree bp = base.program_files();
  const SourceTree tp = target.program_files();
  auto bi = bp.files.begin();
  auto ti = tp.files.begin();
  while (bi != bp.files.end() || ti != tp.files.end()) {
    if (ti == tp.files.end() || (bi != bp.files.end() && bi->first < ti->first)) {
      diff_file(bi->first, &bi->second, nullptr, out);
      ++bi;
    } else if (bi == bp.files.end() || ti->first < bi->first) {
      diff_file(ti->first, nullptr, &ti->second, out);
      ++ti;
    } else {
      if (bi->second != ti->second) diff_file(bi->first, &bi->second, &ti->second, out);
      ++bi;
      ++ti;
    }
  }
  std::stable_sort(out.begin(), out.end(), unit_less);
  return out;
}

ChangeSeq coarsen(const ChangeSeq& seq, const SourceTree& base) {
  std::map<std::string, FileTokens> cache;
  auto base_tokens = [&](const std::string& path) -> const FileTokens* {
    auto it = cache.find(path);
    if (it == cache.end()) {
      auto f = base.files.find(path);
      if (f == base.files.end()) return nullptr;
      it = cache.emplace(path, read_tokens(path, f->second)).first;
    }
    return &it->second;
  };

  using Key = std::tuple<std::string, EditType, int>;
  std::map<Key, std::vector<const ChangeUnit*>> groups;
  for (const auto& u : seq) {
    if (u.kind == Granularity::Token) groups[{u.file, u.edit, u.line}].push_back(&u);
  }

  ChangeSeq out;
  std::set<const ChangeUnit*> folded;
  for (const auto& [key, units] : groups) {
    const auto& [path, edit, line] = key;
    const ChangeUnit& first = *units.front();
    if (units.size() != first.line_size) continue;
    ChangeUnit u;
    u.kind = Granularity::Line;
    u.edit = edit;
    u.file = path;
    u.payload = first.line_text;
    u.line = line;
    u.line_size = first.line_size;
    u.line_text = first.line_text;
    if (edit == EditType::Remove) {
      const FileTokens* b = base_tokens(path);
      if (b == nullptr) continue;
      u.anchor = static_cast<std::size_t>(line);
      u.begin = first.begin;
      u.end = units.back()->end;
      if (u.end - u.begin != units.size()) continue;
      u.payload = u.line_text = line_text(*b, line);
    } else {
      const bool one_gap = std::all_of(units.begin(), units.end(),
                                       [&](const ChangeUnit* x) { return x->begin == first.begin; });
      if (!one_gap) continue;
      const FileTokens* b = base_tokens(path);
      u.begin = u.end = first.begin;
      if (b == nullptr || b->tokens.empty()) {
        u.anchor = 1;
      } else if (first.begin < b->tokens.size()) {
        u.anchor = static_cast<std::size_t>(b->tokens[first.begin].line);
      } else {
        u.anchor = static_cast<std::size_t>(b->tokens.back().line + 1);
      }
      u.target_begin = first.target_begin;
      u.target_end = units.back()->target_end;
    }
    for (const ChangeUnit* x : units) {
      u.tokens.insert(u.tokens.end(), x->tokens.begin(), x->tokens.end());
      folded.insert(x);
    }
    out.push_back(std::move(u));
  }
  for (const auto& u : seq) {
    if (!folded.count(&u)) out.push_back(u);
  }
  std::stable_sort(out.begin(), out.end(), unit_less);
  return out;
}

ChangeApplier::ChangeApplier(SourceTree base) : base_(std::move(base)) {
  for (const auto& [path, text] : base_.files) {
    try {
      tokens_.emplace(path, ml::token_texts(text));
    } catch (const ml::LexError&) {
      // Units never target such a file; apply reports AnchorError if one does.
    }
  }
}

SourceTree ChangeApplier::apply(const ChangeSeq& subseq) const {
  std::map<std::string, std::vector<const ChangeUnit*>> by_file;
  for (const auto& u : subseq) by_file[u.file].push_back(&u);

  SourceTree out = base_;
  static const std::vector<std::string> no_tokens;
  for (const auto& [path, units] : by_file) {
    const std::vector<std::string>* toks = &no_tokens;
    if (base_.files.count(path)) {
      auto it = tokens_.find(path);
      if (it == tokens_.end()) throw AnchorError(path + ": base file cannot be tokenized");
      toks = &it->second;
    }
    const std::size_t n = toks->size();
    std::vector<char> removed(n, 0);
    std::vector<std::vector<const ChangeUnit*>> inserts(n + 1);
    for (const ChangeUnit* u : units) {
      if (u->edit == EditType::Remove) {
        if (u->begin >= u->end || u->end > n || u->tokens.size() != u->end - u->begin) {
          throw AnchorError(path + ": remove anchor out of range");
        }
        for (std::size_t i = u->begin; i < u->end; ++i) {
          if ((*toks)[i] != u->tokens[i - u->begin]) throw AnchorError(path + ": remove payload mismatch");
          removed[i] = 1;
        }
      } else {
        if (u->begin > n) throw AnchorError(path + ": insert anchor out of range");
        inserts[u->begin].push_back(u);
      }
    }
    std::vector<std::string> result;
    for (std::size_t gap = 0; gap <= n; ++gap) {
      auto& here = inserts[gap];
      std::stable_sort(here.begin(), here.end(), [](const ChangeUnit* a, const ChangeUnit* b) {
        return a->target_begin < b->target_begin;
      });
      for (const ChangeUnit* u : here) result.insert(result.end(), u->tokens.begin(), u->tokens.end());
      if (gap < n && !removed[gap]) result.push_back((*toks)[gap]);
    }
    if (result.empty()) {
      out.files.erase(path);
    } else {
      out.files[path] = layout(path, result);
    }
  }
  return out;
}

SourceTree apply(const SourceTree& base, const ChangeSeq& subseq) {
  return ChangeApplier(base).apply(subseq);
}

std::string dump_jsonl(const ChangeSeq& seq) {
  std::string out;
  for (const auto& u : seq) {
    nlohmann::ordered_json j;
    j["file"] = u.file;
    j["kind"] = to_string(u.kind);
    j["anchor"] = u.anchor;
    j["edit"] = to_string(u.edit);
    j["payload"] = u.payload;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace pd
