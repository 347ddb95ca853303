#pragma once

// Traversal helpers over MiniLang ASTs, shared by the miner and the engine.

#include <string>
#include <vector>

#include "patchdistill/minilang/ast.hpp"

namespace pd::detail {

inline std::string qualify(const std::string& pkg, const std::string& name) {
  return pkg.empty() ? name : pkg + "." + name;
}

// Pre-order over an expression tree. `f` returns false to skip the operands.
template <typename E, typename F>
void walk_expr(E& e, F&& f) {
  if (!f(e)) return;
  for (auto& o : e.operands) walk_expr(o, f);
}

// Statement itself first, then its expressions in source order, then nested
// blocks. `fs` is called on statements, `fe` on expression roots.
template <typename S, typename FS, typename FE>
void walk_stmt(S& s, FS&& fs, FE&& fe) {
  fs(s);
  for (auto& e : s.exprs) fe(e);
  for (auto& c : s.body) walk_stmt(c, fs, fe);
  for (auto& c : s.else_body) walk_stmt(c, fs, fe);
}

// Every expression node in a method body, pre-order, source order.
template <typename M, typename F>
void for_each_expr(M& m, F&& f) {
  auto on_expr = [&](auto& root) {
    walk_expr(root, [&](auto& e) {
      f(e);
      return true;
    });
  };
  for (auto& s : m.body) walk_stmt(s, [](auto&) {}, on_expr);
}

template <typename M, typename F>
void for_each_stmt(M& m, F&& f) {
  for (auto& s : m.body) walk_stmt(s, f, [](auto&) {});
}

// Every block (statement list) in a method, pre-order; the body comes first.
template <typename B, typename F>
void for_each_block(B& block, F&& f) {
  f(block);
  for (auto& s : block) {
    for_each_block(s.body, f);
    for_each_block(s.else_body, f);
  }
}

// Type names appearing in declarations of a class.
template <typename C, typename F>
void for_each_type_name(C& cls, F&& f) {
  for (auto& fd : cls.fields) f(fd.type_name);
  for (auto& m : cls.methods) {
    f(m.return_type);
    for (auto& p : m.params) f(p.type_name);
    for_each_stmt(m, [&](auto& s) {
      if (s.kind == ml::Stmt::Kind::VarDecl) f(s.type_name);
    });
  }
}

// Field initializers and method bodies of a class.
template <typename C, typename F>
void for_each_class_expr(C& cls, F&& f) {
  for (auto& fd : cls.fields) {
    for (auto& init : fd.init) {
      walk_expr(init, [&](auto& e) {
        f(e);
        return true;
      });
    }
  }
  for (auto& m : cls.methods) for_each_expr(m, f);
}

}  // namespace pd::detail
