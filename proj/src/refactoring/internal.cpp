#include "internal.hpp"

#include <unordered_map>

#include "../lcs.hpp"
#include "patchdistill/minilang/lexer.hpp"
#include "patchdistill/minilang/renderer.hpp"
#include "walk.hpp"

namespace pd::detail {

namespace {

void collect(Block& block, StmtPath& path, const ml::Expr& pattern, std::vector<Occurrence>& out) {
  for (std::size_t i = 0; i < block.size(); ++i) {
    path.emplace_back(&block, i);
    ml::Stmt& s = block[i];
    for (std::size_t k = 0; k < s.exprs.size(); ++k) {
      const bool lvalue = s.kind == ml::Stmt::Kind::Assign && k == 0;
      ml::Expr& root = s.exprs[k];
      walk_expr(root, [&](ml::Expr& e) {
        if (!(lvalue && &e == &root) && ml::same_structure(e, pattern)) {
          out.push_back({path, &e});
          return false;
        }
        return true;
      });
    }
    collect(s.body, path, pattern, out);
    collect(s.else_body, path, pattern, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<Occurrence> find_occurrences(ml::MethodDecl& m, const ml::Expr& pattern) {
  std::vector<Occurrence> out;
  StmtPath path;
  collect(m.body, path, pattern, out);
  return out;
}

std::optional<StmtRun> find_statements(ml::MethodDecl& m, const std::vector<std::string>& rendered) {
  std::optional<StmtRun> found;
  if (rendered.empty()) return found;
  for_each_block(m.body, [&](Block& block) {
    if (found || block.size() < rendered.size()) return;
    for (std::size_t b = 0; b + rendered.size() <= block.size() && !found; ++b) {
      bool same = true;
      for (std::size_t k = 0; k < rendered.size() && same; ++k) same = ml::render(block[b + k], 0) == rendered[k];
      if (same) found = StmtRun{&block, b, rendered.size()};
    }
  });
  return found;
}

bool method_uses_name(const ml::MethodDecl& m, const std::string& name) {
  bool used = false;
  for_each_expr(m, [&](const ml::Expr& e) {
    if (e.kind == ml::Expr::Kind::Name && e.text == name) used = true;
  });
  return used;
}

bool method_declares(const ml::MethodDecl& m, const std::string& name) {
  for (const auto& p : m.params) {
    if (p.name == name) return true;
  }
  bool found = false;
  for_each_stmt(m, [&](const ml::Stmt& s) {
    if (s.kind == ml::Stmt::Kind::VarDecl && s.name == name) found = true;
  });
  return found;
}

std::vector<int> declared_slots(const std::vector<ml::Stmt>& stmts) {
  std::vector<int> out;
  for (const auto& s : stmts) {
    walk_stmt(
        s,
        [&](const ml::Stmt& x) {
          if (x.kind == ml::Stmt::Kind::VarDecl) out.push_back(x.slot);
        },
        [](const ml::Expr&) {});
  }
  return out;
}

SourceTree render_units(const std::vector<ml::CompilationUnit>& units) {
  SourceTree out;
  for (const auto& u : units) out.files[u.path] = ml::render(u);
  return out;
}

std::optional<std::pair<ClassLoc, std::vector<std::string>>> resolve(ml::Program& program,
                                                                     const std::string& qualified) {
  for (auto& unit : program.units) {
    for (auto& cls : unit.classes) {
      const std::string q = qualify(unit.package_name, cls.name);
      if (qualified == q) return std::make_pair(ClassLoc{&unit, &cls}, std::vector<std::string>{});
      if (qualified.size() > q.size() && qualified.compare(0, q.size(), q) == 0 && qualified[q.size()] == '.') {
        std::vector<std::string> rest;
        std::size_t start = q.size() + 1;
        while (true) {
          const std::size_t dot = qualified.find('.', start);
          rest.push_back(qualified.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
          if (dot == std::string::npos) break;
          start = dot + 1;
        }
        return std::make_pair(ClassLoc{&unit, &cls}, rest);
      }
    }
  }
  return std::nullopt;
}

std::size_t token_distance(const std::string& a, const std::string& b) {
  std::unordered_map<std::string, std::uint32_t> ids;
  auto intern = [&](const std::string& text) {
    Symbols out;
    for (const auto& t : ml::token_texts(text)) {
      out.push_back(ids.emplace(t, static_cast<std::uint32_t>(ids.size())).first->second);
    }
    return out;
  };
  const auto x = intern(a);
  const auto y = intern(b);
  return x.size() + y.size() - 2 * lcs_length(x, y);
}

}  // namespace pd::detail
