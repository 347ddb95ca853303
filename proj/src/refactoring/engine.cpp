#include "patchdistill/refactoring_engine.hpp"

#include <algorithm>
#include <tuple>
#include <set>

#include "internal.hpp"
#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/minilang/interpreter.hpp"
#include "patchdistill/minilang/lexer.hpp"
#include "patchdistill/minilang/parser.hpp"
#include "patchdistill/minilang/renderer.hpp"
#include "walk.hpp"

namespace pd {

namespace {

using detail::qualify;
using ml::Binding;
using ml::Expr;
using ml::Stmt;

[[noreturn]] void conflict(const std::string& what) { throw ReapplyConflict(what); }

ml::Program analyze_clean(const SourceTree& tree, const char* stage) {
  ml::Program p = ml::analyze(tree);
  if (!p.clean()) conflict(std::string(stage) + " does not check: " + p.diagnostics.front().str());
  return p;
}

void require_identifier(const std::string& name) {
  if (!ml::is_identifier(name) || ml::is_keyword(name)) conflict("not a valid name: " + name);
}

// Subjects of renames resolved against the original tree and kept up to date
// while earlier renames are applied.
struct Subject {
  std::string pkg;
  std::string cls;
  std::string member;
  bool member_is_field = false;
  std::string var;
};

std::string package_dir(const std::string& pkg) {
  std::string out = pkg;
  std::replace(out.begin(), out.end(), '.', '/');
  return out;
}

std::string file_stem(const std::string& path) {
  const auto slash = path.rfind('/');
  const std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.rfind('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

bool has_class(const ml::Program& p, const std::string& name) { return p.find_class(name) != nullptr; }

ml::ClassDecl& class_named(ml::Program& p, const std::string& name) {
  for (auto& u : p.units) {
    for (auto& c : u.classes) {
      if (c.name == name) return c;
    }
  }
  conflict("class not found: " + name);
}

ml::MethodDecl& method_named(ml::ClassDecl& c, const std::string& name) {
  ml::MethodDecl* m = c.find_method(name);
  if (m == nullptr) conflict("method not found: " + c.name + "." + name);
  return *m;
}

SourceTree rename_package(const SourceTree& tree, const std::string& from, const std::string& to) {
  ml::Program p = analyze_clean(tree, "base");
  bool found = false;
  for (const auto& u : p.units) {
    if (u.package_name == to) conflict("package already exists: " + to);
    found = found || u.package_name == from;
  }
  if (!found) conflict("package not found: " + from);
  for (const auto& part : [&] {
         std::vector<std::string> parts;
         std::size_t s = 0;
         while (true) {
           auto d = to.find('.', s);
           parts.push_back(to.substr(s, d == std::string::npos ? std::string::npos : d - s));
           if (d == std::string::npos) break;
           s = d + 1;
         }
         return parts;
       }()) {
    require_identifier(part);
  }

  const std::string old_dir = package_dir(from) + "/";
  const std::string new_dir = package_dir(to) + "/";
  SourceTree out;
  for (auto& u : p.units) {
    if (u.package_name != from) {
      out.files[u.path] = ml::render(u);
      continue;
    }
    u.package_name = to;
    std::string path = u.path;
    const auto root_end = path.find('/');
    if (root_end != std::string::npos && path.compare(root_end + 1, old_dir.size(), old_dir) == 0 &&
        path.find('/', root_end + 1 + old_dir.size()) == std::string::npos) {
      path = path.substr(0, root_end + 1) + new_dir + path.substr(root_end + 1 + old_dir.size());
    }
    if (path != u.path && tree.files.count(path)) conflict("file already exists: " + path);
    out.files[path] = ml::render(u);
  }
  return out;
}

SourceTree rename_class(const SourceTree& tree, const std::string& from, const std::string& to) {
  require_identifier(to);
  ml::Program p = analyze_clean(tree, "base");
  if (!has_class(p, from)) conflict("class not found: " + from);
  if (has_class(p, to)) conflict("class already exists: " + to);
  for (const auto& u : p.units) {
    for (const auto& c : u.classes) {
      if (c.find_field(to) != nullptr) conflict("name in use as a field: " + to);
      for (const auto& m : c.methods) {
        if (detail::method_declares(m, to)) conflict("name in use as a local: " + to);
      }
    }
  }
  SourceTree out;
  for (auto& u : p.units) {
    for (auto& c : u.classes) {
      if (c.name == from) c.name = to;
      detail::for_each_type_name(c, [&](std::string& t) {
        if (t == from) t = to;
      });
      detail::for_each_class_expr(c, [&](Expr& e) {
        if ((e.kind == Expr::Kind::New || e.kind == Expr::Kind::Name) && e.binding.kind == Binding::Kind::Class &&
            e.text == from) {
          e.text = to;
        }
      });
    }
    std::string path = u.path;
    if (file_stem(path) == from && u.find_class(to) != nullptr) {
      path = path.substr(0, path.size() - from.size() - kSourceExtension.size()) + to +
             std::string(kSourceExtension);
      if (tree.files.count(path)) conflict("file already exists: " + path);
    }
    out.files[path] = ml::render(u);
  }
  return out;
}

SourceTree rename_method(const SourceTree& tree, const std::string& cls, const std::string& from,
                         const std::string& to) {
  require_identifier(to);
  ml::Program p = analyze_clean(tree, "base");
  ml::ClassDecl& c = class_named(p, cls);
  method_named(c, from).name = to;
  if (std::count_if(c.methods.begin(), c.methods.end(), [&](const auto& m) { return m.name == to; }) > 1) {
    conflict("method already exists: " + cls + "." + to);
  }
  for (auto& u : p.units) {
    for (auto& k : u.classes) {
      detail::for_each_class_expr(k, [&](Expr& e) {
        if (e.kind == Expr::Kind::Call && e.binding.kind == Binding::Kind::Method && e.binding.cls == cls &&
            e.binding.member == from) {
          e.text = to;
        }
      });
    }
  }
  return detail::render_units(p.units);
}

SourceTree rename_field(const SourceTree& tree, const std::string& cls, const std::string& from,
                        const std::string& to) {
  require_identifier(to);
  ml::Program p = analyze_clean(tree, "base");
  ml::ClassDecl& c = class_named(p, cls);
  if (c.find_field(from) == nullptr) conflict("field not found: " + cls + "." + from);
  if (c.find_field(to) != nullptr) conflict("field already exists: " + cls + "." + to);
  if (has_class(p, to)) conflict("name in use as a class: " + to);
  for (const auto& m : c.methods) {
    if (detail::method_declares(m, to)) conflict("field would be shadowed in " + cls + "." + m.name);
  }
  for (auto& f : c.fields) {
    if (f.name == from) f.name = to;
  }
  for (auto& u : p.units) {
    for (auto& k : u.classes) {
      detail::for_each_class_expr(k, [&](Expr& e) {
        if ((e.kind == Expr::Kind::Name || e.kind == Expr::Kind::FieldAccess) &&
            e.binding.kind == Binding::Kind::Field && e.binding.cls == cls && e.binding.member == from) {
          e.text = to;
        }
      });
    }
  }
  return detail::render_units(p.units);
}

// Parameter (`ordinal` < 0) or the ordinal-th local declaration named `from`.
SourceTree rename_local(const SourceTree& tree, const std::string& cls, const std::string& method,
                        const std::string& from, int ordinal, const std::string& to) {
  require_identifier(to);
  ml::Program p = analyze_clean(tree, "base");
  ml::ClassDecl& c = class_named(p, cls);
  ml::MethodDecl& m = method_named(c, method);
  if (detail::method_declares(m, to) || detail::method_uses_name(m, to)) {
    conflict("name already used in " + cls + "." + method + ": " + to);
  }
  if (c.find_field(to) != nullptr || has_class(p, to)) conflict("name would shadow a member: " + to);
  int slot = -1;
  if (ordinal < 0) {
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (m.params[i].name == from) {
        slot = static_cast<int>(i);
        m.params[i].name = to;
      }
    }
  } else {
    int seen = 0;
    detail::for_each_stmt(m, [&](Stmt& s) {
      if (s.kind == Stmt::Kind::VarDecl && s.name == from && seen++ == ordinal) {
        slot = s.slot;
        s.name = to;
      }
    });
  }
  if (slot < 0) conflict("variable not found: " + cls + "." + method + "." + from);
  detail::for_each_expr(m, [&](Expr& e) {
    if (e.kind == Expr::Kind::Name && e.binding.kind == Binding::Kind::Local && e.binding.slot == slot) e.text = to;
  });
  return detail::render_units(p.units);
}

std::pair<ml::ClassDecl*, ml::MethodDecl*> source_method(ml::Program& p, const std::string& subject) {
  auto loc = detail::resolve(p, subject);
  if (!loc || loc->second.size() != 1) conflict("source method not found: " + subject);
  return {loc->first.cls, &method_named(*loc->first.cls, loc->second[0])};
}

SourceTree extract_variable(const SourceTree& tree, const Refactoring& r) {
  require_identifier(r.new_name);
  ml::Program p = analyze_clean(tree, "base");
  auto [cls, m] = source_method(p, r.subject);
  if (detail::method_declares(*m, r.new_name) || detail::method_uses_name(*m, r.new_name)) {
    conflict("name already used in " + r.subject + ": " + r.new_name);
  }
  if (cls->find_field(r.new_name) != nullptr) conflict("name would shadow a field: " + r.new_name);
  Expr pattern;
  try {
    pattern = ml::parse_expression(r.expression);
  } catch (const ml::SyntaxError&) {
    conflict("bad expression: " + r.expression);
  }
  auto occ = detail::find_occurrences(*m, pattern);
  if (r.occurrences.empty()) conflict("no occurrences selected");
  std::vector<detail::Occurrence> chosen;
  for (int index : r.occurrences) {
    if (index < 0 || static_cast<std::size_t>(index) >= occ.size()) conflict("occurrence missing: " + r.expression);
    chosen.push_back(occ[static_cast<std::size_t>(index)]);
  }

  // Innermost block holding every chosen occurrence.
  std::size_t depth = 0;
  while (true) {
    const auto& first = chosen.front().path;
    if (depth + 1 >= first.size()) break;
    bool same = std::all_of(chosen.begin(), chosen.end(), [&](const detail::Occurrence& o) {
      return o.path.size() > depth + 1 && o.path[depth] == first[depth] && o.path[depth + 1].first == first[depth + 1].first;
    });
    if (!same) break;
    ++depth;
  }
  detail::Block* block = chosen.front().path[depth].first;
  std::size_t at = chosen.front().path[depth].second;
  for (const auto& o : chosen) {
    if (o.path[depth].first != block) conflict("occurrences do not share a block");
    at = std::min(at, o.path[depth].second);
  }

  Expr init = *chosen.front().expr;
  for (auto& o : chosen) {
    Expr name;
    name.kind = Expr::Kind::Name;
    name.text = r.new_name;
    *o.expr = name;
  }
  Stmt decl;
  decl.kind = Stmt::Kind::VarDecl;
  decl.type_name = r.var_type;
  decl.name = r.new_name;
  decl.exprs.push_back(std::move(init));
  block->insert(block->begin() + static_cast<long>(at), std::move(decl));
  return detail::render_units(p.units);
}

SourceTree extract_method(const SourceTree& tree, const Refactoring& r) {
  require_identifier(r.new_name);
  if (r.params.size() != r.args.size()) conflict("parameter and argument counts differ");
  ml::Program p = analyze_clean(tree, "base");
  auto [cls, m] = source_method(p, r.subject);
  if (cls->find_method(r.new_name) != nullptr) conflict("method already exists: " + r.new_name);
  auto run = detail::find_statements(*m, r.statements);
  if (!run) conflict("extracted statements not found in " + r.subject);

  std::vector<Stmt> body(run->block->begin() + static_cast<long>(run->begin),
                         run->block->begin() + static_cast<long>(run->begin + run->count));
  const auto inner = detail::declared_slots(body);
  auto is_inner = [&](int slot) { return std::find(inner.begin(), inner.end(), slot) != inner.end(); };

  bool has_return = false;
  for (auto& s : body) {
    detail::walk_stmt(
        s,
        [&](Stmt& x) {
          if (x.kind == Stmt::Kind::Return) has_return = true;
          if (x.kind == Stmt::Kind::Assign && x.exprs[0].kind == Expr::Kind::Name &&
              x.exprs[0].binding.kind == Binding::Kind::Local && !is_inner(x.exprs[0].binding.slot)) {
            conflict("extracted code assigns to " + x.exprs[0].text);
          }
        },
        [&](Expr& root) {
          detail::walk_expr(root, [&](Expr& e) {
            if (e.kind == Expr::Kind::Name && e.binding.kind == Binding::Kind::Local && !is_inner(e.binding.slot)) {
              auto it = std::find(r.args.begin(), r.args.end(), e.text);
              if (it == r.args.end()) conflict("extracted code needs " + e.text);
              e.text = r.params[static_cast<std::size_t>(it - r.args.begin())].name;
            }
            return true;
          });
        });
  }
  const bool returns = r.return_type != "void";
  if (returns && body.back().kind != Stmt::Kind::Return) conflict("extracted code does not end in a return");
  if (!returns && has_return) conflict("extracted code returns early");

  Expr call;
  call.kind = Expr::Kind::Call;
  call.text = r.new_name;
  for (const auto& a : r.args) {
    Expr arg;
    arg.kind = Expr::Kind::Name;
    arg.text = a;
    call.operands.push_back(std::move(arg));
  }
  Stmt replacement;
  replacement.kind = returns ? Stmt::Kind::Return : Stmt::Kind::ExprStmt;
  replacement.exprs.push_back(std::move(call));
  auto first = run->block->begin() + static_cast<long>(run->begin);
  run->block->erase(first, first + static_cast<long>(run->count));
  run->block->insert(run->block->begin() + static_cast<long>(run->begin), std::move(replacement));

  ml::MethodDecl extracted;
  extracted.name = r.new_name;
  extracted.is_static = r.is_static;
  extracted.return_type = r.return_type;
  for (const auto& tp : r.params) extracted.params.push_back({tp.type, tp.name, {}});
  extracted.body = std::move(body);
  const std::string anchor =
      !r.insert_after.empty() && cls->find_method(r.insert_after) != nullptr ? r.insert_after : m->name;
  cls->insert_method_after(anchor, std::move(extracted));
  return detail::render_units(p.units);
}

int phase(RefactoringKind k) {
  switch (k) {
    case RefactoringKind::RenamePackage:
      return 0;
    case RefactoringKind::RenameClass:
      return 1;
    case RefactoringKind::RenameField:
      return 2;
    case RefactoringKind::RenameMethod:
      return 3;
    case RefactoringKind::RenameParameter:
      return 4;
    case RefactoringKind::RenameVariable:
      return 5;
    case RefactoringKind::ExtractMethod:
      return 6;
    case RefactoringKind::ExtractVariable:
      return 7;
  }
  return 8;
}

Subject resolve_subject(ml::Program& p, const Refactoring& r) {
  Subject s;
  if (r.kind == RefactoringKind::RenamePackage) {
    s.pkg = r.subject;
    return s;
  }
  auto loc = detail::resolve(p, r.subject);
  if (!loc) conflict("subject not found: " + r.subject);
  s.pkg = loc->first.unit->package_name;
  s.cls = loc->first.cls->name;
  const auto& rest = loc->second;
  const std::size_t want = r.kind == RefactoringKind::RenameClass                                    ? 0
                           : r.kind == RefactoringKind::RenameMethod || r.kind == RefactoringKind::RenameField ? 1
                                                                                                         : 2;
  if (rest.size() != want) conflict("malformed subject: " + r.subject);
  if (want >= 1) s.member = rest[0];
  if (want == 2) s.var = rest[1];
  s.member_is_field = r.kind == RefactoringKind::RenameField;
  return s;
}

SourceTree apply_rename(const SourceTree& tree, const Refactoring& r, const Subject& s) {
  switch (r.kind) {
    case RefactoringKind::RenamePackage:
      return rename_package(tree, s.pkg, r.new_name);
    case RefactoringKind::RenameClass:
      return rename_class(tree, s.cls, r.new_name);
    case RefactoringKind::RenameMethod:
      return rename_method(tree, s.cls, s.member, r.new_name);
    case RefactoringKind::RenameField:
      return rename_field(tree, s.cls, s.member, r.new_name);
    case RefactoringKind::RenameParameter:
      return rename_local(tree, s.cls, s.member, s.var, -1, r.new_name);
    case RefactoringKind::RenameVariable:
      return rename_local(tree, s.cls, s.member, s.var, r.ordinal, r.new_name);
    default:
      break;
  }
  conflict("not a rename");
}

}  // namespace

SourceTree apply_refactoring(const SourceTree& base, const Refactoring& r) {
  ReapplyPlan plan;
  plan.refactorings.push_back(r);
  return reapply(base, plan);
}

SourceTree reapply(const SourceTree& base, const ReapplyPlan& plan) {
  if (plan.refactorings.empty()) return base;
  SourceTree tree = base;
  ml::Program original = analyze_clean(base, "base");

  std::vector<std::pair<const Refactoring*, Subject>> renames;
  std::vector<const Refactoring*> extracts;
  for (const auto& r : plan.refactorings) {
    if (is_rename(r.kind)) {
      renames.emplace_back(&r, resolve_subject(original, r));
    } else {
      extracts.push_back(&r);
    }
  }
  auto by_phase = [](const Refactoring* a, const Refactoring* b) {
    return std::make_tuple(phase(a->kind), a->span.file, a->span.begin) <
           std::make_tuple(phase(b->kind), b->span.file, b->span.begin);
  };
  std::stable_sort(renames.begin(), renames.end(),
                   [&](const auto& a, const auto& b) { return by_phase(a.first, b.first); });
  std::stable_sort(extracts.begin(), extracts.end(), by_phase);

  for (std::size_t i = 0; i < renames.size(); ++i) {
    const Refactoring& r = *renames[i].first;
    const Subject s = renames[i].second;
    tree = apply_rename(tree, r, s);
    for (std::size_t j = i + 1; j < renames.size(); ++j) {
      Subject& later = renames[j].second;
      switch (r.kind) {
        case RefactoringKind::RenamePackage:
          if (later.pkg == s.pkg) later.pkg = r.new_name;
          break;
        case RefactoringKind::RenameClass:
          if (later.cls == s.cls) later.cls = r.new_name;
          break;
        case RefactoringKind::RenameMethod:
          if (later.cls == s.cls && !later.member_is_field && later.member == s.member) later.member = r.new_name;
          break;
        case RefactoringKind::RenameField:
          if (later.cls == s.cls && later.member_is_field && later.member == s.member) later.member = r.new_name;
          break;
        case RefactoringKind::RenameParameter:
        case RefactoringKind::RenameVariable:
          if (later.cls == s.cls && later.member == s.member && later.var == s.var &&
              renames[j].first->kind == r.kind && renames[j].first->ordinal == r.ordinal) {
            later.var = r.new_name;
          }
          break;
        default:
          break;
      }
    }
  }
  for (const Refactoring* r : extracts) {
    tree = r->kind == RefactoringKind::ExtractMethod ? extract_method(tree, *r) : extract_variable(tree, *r);
  }
  analyze_clean(tree, "refactored tree");
  return tree;
}

bool verify_behavior(const SourceTree& base, const SourceTree& refactored, const TestSelection& suite) {
  try {
    const TestReport a = ml::run_tests(base, suite);
    const TestReport b = ml::run_tests(refactored, suite);
    return a.names() == b.names() && a.outcomes() == b.outcomes();
  } catch (const HarnessError&) {
    return false;
  }
}

}  // namespace pd
