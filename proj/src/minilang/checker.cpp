#include "patchdistill/minilang/checker.hpp"

#include <charconv>
#include <optional>
#include <sstream>

#include "patchdistill/minilang/parser.hpp"

namespace pd::ml {

std::string Diagnostic::str() const {
  std::ostringstream out;
  out << file << ':' << line << ':' << column << ": " << message;
  return out.str();
}

void Program::reindex() {
  class_index_.clear();
  for (std::size_t u = 0; u < units.size(); ++u) {
    for (std::size_t c = 0; c < units[u].classes.size(); ++c) {
      class_index_.emplace(units[u].classes[c].name, std::make_pair(u, c));
    }
  }
}

const ClassDecl* Program::find_class(const std::string& name) const {
  const auto it = class_index_.find(name);
  if (it == class_index_.end()) return nullptr;
  return &units[it->second.first].classes[it->second.second];
}

const CompilationUnit* Program::unit_of_class(const std::string& name) const {
  const auto it = class_index_.find(name);
  if (it == class_index_.end()) return nullptr;
  return &units[it->second.first];
}

const MethodDecl* Program::find_method(const std::string& cls, const std::string& method) const {
  const ClassDecl* c = find_class(cls);
  return c == nullptr ? nullptr : c->find_method(method);
}

int Program::field_index(const std::string& cls, const std::string& field) const {
  const ClassDecl* c = find_class(cls);
  if (c == nullptr) return -1;
  for (std::size_t i = 0; i < c->fields.size(); ++i) {
    if (c->fields[i].name == field) return static_cast<int>(i);
  }
  return -1;
}

namespace {

constexpr const char* kErrorType = "<error>";
constexpr const char* kClassRef = "<class>";
constexpr const char* kNullType = "null";

class Checker {
 public:
  explicit Checker(Program& program) : program_(program) {}

  void run() {
    collect_classes();
    for (auto& unit : program_.units) {
      unit_ = &unit;
      for (auto& cls : unit.classes) check_class(cls);
    }
  }

 private:
  struct Local {
    std::string type;
    int slot;
  };

  void report(const Span& span, std::string message) {
    Diagnostic d;
    d.file = unit_->path;
    d.line = span.line;
    d.column = span.column;
    d.message = std::move(message);
    program_.broken_files.insert(d.file);
    program_.diagnostics.push_back(std::move(d));
  }

  void collect_classes() {
    std::map<std::string, std::string> seen;
    for (auto& unit : program_.units) {
      unit_ = &unit;
      for (const auto& cls : unit.classes) {
        const auto [it, inserted] = seen.emplace(cls.name, unit.path);
        if (!inserted) {
          report(cls.span, "duplicate class " + cls.name + " (also declared in " + it->second + ")");
        }
      }
    }
    program_.reindex();
  }

  bool type_exists(const std::string& t) const {
    return t == "int" || t == "bool" || t == "string" || program_.find_class(t) != nullptr;
  }

  void check_type(const std::string& t, const Span& span, bool allow_void) {
    if (t == "void") {
      if (!allow_void) report(span, "void is not a value type");
      return;
    }
    if (!type_exists(t)) report(span, "cannot find type " + t);
  }

  static bool assignable(const std::string& from, const std::string& to) {
    if (from == kErrorType || to == kErrorType) return true;
    if (from == "void" || to == "void" || from == kClassRef) return false;
    if (from == to) return true;
    return from == kNullType && is_reference_type(to);
  }

  void check_class(ClassDecl& cls) {
    cls_ = &cls;
    std::set<std::string> names;
    for (auto& f : cls.fields) {
      if (!names.insert(f.name).second) report(f.span, "duplicate field " + f.name);
      check_type(f.type_name, f.span, false);
    }
    names.clear();
    for (auto& m : cls.methods) {
      if (!names.insert(m.name).second) report(m.span, "duplicate method " + m.name);
    }
    for (auto& f : cls.fields) {
      if (f.init.empty()) continue;
      method_ = nullptr;
      is_static_ = false;
      scopes_.clear();
      const std::string t = expr(f.init[0]);
      if (!assignable(t, f.type_name)) {
        report(f.init[0].span, "incompatible types: " + t + " cannot be assigned to " + f.type_name);
      }
    }
    for (auto& m : cls.methods) check_method(m);
  }

  void check_method(MethodDecl& m) {
    method_ = &m;
    is_static_ = m.is_static;
    scopes_.clear();
    scopes_.emplace_back();
    next_slot_ = 0;
    check_type(m.return_type, m.span, true);
    for (auto& p : m.params) {
      check_type(p.type_name, p.span, false);
      declare(p.name, p.type_name, p.span);
    }
    if (m.is_test && (m.return_type != "void" || !m.params.empty() || m.is_static)) {
      report(m.span, "test method " + m.name + " must be a non-static void method without parameters");
    }
    const bool completes = block(m.body, false);
    if (completes && m.return_type != "void") report(m.span, "missing return statement in " + m.name);
    m.frame_size = next_slot_;
  }

  int declare(const std::string& name, const std::string& type, const Span& span) {
    if (lookup(name)) report(span, "variable " + name + " is already defined");
    const int slot = next_slot_++;
    scopes_.back()[name] = Local{type, slot};
    return slot;
  }

  std::optional<Local> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      const auto found = it->find(name);
      if (found != it->end()) return found->second;
    }
    return std::nullopt;
  }

  // Returns whether the block can complete normally.
  bool block(std::vector<Stmt>& body, bool new_scope) {
    if (new_scope) scopes_.emplace_back();
    bool completes = true;
    bool reported = false;
    for (auto& s : body) {
      if (!completes && !reported) {
        report(s.span, "unreachable statement");
        reported = true;
      }
      const bool c = stmt(s);
      completes = completes && c;
    }
    if (new_scope) scopes_.pop_back();
    return completes;
  }

  void expect_bool(Expr& e) {
    const std::string t = expr(e);
    if (t != "bool" && t != kErrorType) report(e.span, "condition must be bool, found " + t);
  }

  static bool is_true_literal(const Expr& e) {
    if (e.kind == Expr::Kind::Paren) return is_true_literal(e.operands[0]);
    return e.kind == Expr::Kind::BoolLiteral && e.text == "true";
  }

  bool stmt(Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::VarDecl: {
        check_type(s.type_name, s.span, false);
        if (!s.exprs.empty()) {
          const std::string t = expr(s.exprs[0]);
          if (!assignable(t, s.type_name)) {
            report(s.exprs[0].span, "incompatible types: " + t + " cannot be assigned to " + s.type_name);
          }
        }
        s.slot = declare(s.name, s.type_name, s.span);
        return true;
      }
      case Stmt::Kind::Assign: {
        Expr& target = s.exprs[0];
        const std::string tt = expr(target);
        const bool lvalue = (target.kind == Expr::Kind::Name &&
                             (target.binding.kind == Binding::Kind::Local ||
                              target.binding.kind == Binding::Kind::Field)) ||
                            target.kind == Expr::Kind::FieldAccess;
        if (!lvalue && tt != kErrorType) report(target.span, "cannot assign to this expression");
        const std::string vt = expr(s.exprs[1]);
        if (!assignable(vt, tt)) {
          report(s.exprs[1].span, "incompatible types: " + vt + " cannot be assigned to " + tt);
        }
        return true;
      }
      case Stmt::Kind::If: {
        expect_bool(s.exprs[0]);
        const bool then_completes = block(s.body, true);
        if (!s.has_else) return true;
        const bool else_completes = block(s.else_body, true);
        return then_completes || else_completes;
      }
      case Stmt::Kind::While:
        expect_bool(s.exprs[0]);
        block(s.body, true);
        return !is_true_literal(s.exprs[0]);
      case Stmt::Kind::Return: {
        const std::string rt = method_ != nullptr ? method_->return_type : "void";
        if (s.exprs.empty()) {
          if (rt != "void") report(s.span, "missing return value");
        } else {
          const std::string t = expr(s.exprs[0]);
          if (rt == "void") {
            report(s.exprs[0].span, "cannot return a value from a void method");
          } else if (!assignable(t, rt)) {
            report(s.exprs[0].span, "incompatible types: " + t + " cannot be returned as " + rt);
          }
        }
        return false;
      }
      case Stmt::Kind::ExprStmt: {
        Expr& e = s.exprs[0];
        expr(e);
        if (e.kind != Expr::Kind::Call && e.kind != Expr::Kind::New) report(e.span, "not a statement");
        return true;
      }
      case Stmt::Kind::Assert:
        expect_bool(s.exprs[0]);
        return true;
    }
    return true;
  }

  std::string call(Expr& e) {
    std::string owner = cls_->name;
    bool static_receiver = false;
    Expr* receiver = e.has_receiver ? &e.operands[0] : nullptr;
    for (std::size_t i = e.first_arg(); i < e.operands.size(); ++i) expr(e.operands[i]);
    if (receiver != nullptr) {
      const std::string rt = expr(*receiver);
      if (rt == kErrorType) return kErrorType;
      if (rt == kClassRef) {
        owner = receiver->binding.cls;
        static_receiver = true;
      } else if (program_.find_class(rt) != nullptr) {
        owner = rt;
      } else {
        report(e.span, "cannot call method " + e.text + " on type " + rt);
        return kErrorType;
      }
    }
    const ClassDecl* target = program_.find_class(owner);
    const MethodDecl* m = target != nullptr ? target->find_method(e.text) : nullptr;
    if (m == nullptr) {
      report(e.span, "cannot find method " + e.text + " in class " + owner);
      return kErrorType;
    }
    if (!m->is_static && (static_receiver || (receiver == nullptr && is_static_))) {
      report(e.span, "non-static method " + e.text + " cannot be referenced from a static context");
    }
    const std::size_t argc = e.operands.size() - e.first_arg();
    if (argc != m->params.size()) {
      report(e.span, "method " + e.text + " expects " + std::to_string(m->params.size()) +
                         " argument(s) but got " + std::to_string(argc));
    } else {
      for (std::size_t i = 0; i < argc; ++i) {
        const Expr& a = e.operands[e.first_arg() + i];
        if (!assignable(a.type, m->params[i].type_name)) {
          report(a.span, "argument " + std::to_string(i + 1) + " of " + e.text + ": " + a.type +
                             " is not compatible with " + m->params[i].type_name);
        }
      }
    }
    e.binding.kind = Binding::Kind::Method;
    e.binding.cls = owner;
    e.binding.member = e.text;
    return m->return_type;
  }

  std::string expr(Expr& e) {
    e.type = expr_type(e);
    return e.type;
  }

  std::string expr_type(Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLiteral: {
        long long v = 0;
        const auto* first = e.text.data();
        const auto* last = first + e.text.size();
        const auto r = std::from_chars(first, last, v);
        if (r.ec != std::errc() || r.ptr != last) report(e.span, "integer literal too large");
        return "int";
      }
      case Expr::Kind::BoolLiteral:
        return "bool";
      case Expr::Kind::StringLiteral:
        return "string";
      case Expr::Kind::NullLiteral:
        return kNullType;
      case Expr::Kind::This:
        if (is_static_) {
          report(e.span, "cannot use this in a static context");
          return kErrorType;
        }
        return cls_->name;
      case Expr::Kind::Name: {
        if (auto local = lookup(e.text)) {
          e.binding = Binding{Binding::Kind::Local, "", "", local->slot};
          return local->type;
        }
        if (const FieldDecl* f = cls_->find_field(e.text)) {
          if (is_static_) {
            report(e.span, "non-static field " + e.text + " cannot be referenced from a static context");
          }
          e.binding = Binding{Binding::Kind::Field, cls_->name, e.text, -1};
          return f->type_name;
        }
        if (program_.find_class(e.text) != nullptr) {
          e.binding = Binding{Binding::Kind::Class, e.text, "", -1};
          return kClassRef;
        }
        report(e.span, "cannot find symbol " + e.text);
        return kErrorType;
      }
      case Expr::Kind::Paren: {
        const std::string t = expr(e.operands[0]);
        if (t == kClassRef) {
          report(e.span, "class name used as a value");
          return kErrorType;
        }
        return t;
      }
      case Expr::Kind::FieldAccess: {
        const std::string ot = expr(e.operands[0]);
        if (ot == kErrorType) return kErrorType;
        const ClassDecl* c = ot == kClassRef ? nullptr : program_.find_class(ot);
        if (c == nullptr) {
          report(e.span, "cannot access field " + e.text + " on type " + ot);
          return kErrorType;
        }
        const FieldDecl* f = c->find_field(e.text);
        if (f == nullptr) {
          report(e.span, "cannot find field " + e.text + " in class " + ot);
          return kErrorType;
        }
        e.binding = Binding{Binding::Kind::Field, ot, e.text, -1};
        return f->type_name;
      }
      case Expr::Kind::Call:
        return call(e);
      case Expr::Kind::New:
        if (program_.find_class(e.text) == nullptr) {
          report(e.span, "cannot find class " + e.text);
          return kErrorType;
        }
        e.binding = Binding{Binding::Kind::Class, e.text, "", -1};
        return e.text;
      case Expr::Kind::Unary: {
        const std::string t = expr(e.operands[0]);
        const std::string want = e.text == "!" ? "bool" : "int";
        if (t != want && t != kErrorType) {
          report(e.span, "operator " + e.text + " cannot be applied to " + t);
          return kErrorType;
        }
        return want;
      }
      case Expr::Kind::Binary:
        return binary(e);
    }
    return kErrorType;
  }

  std::string binary(Expr& e) {
    const std::string l = expr(e.operands[0]);
    const std::string r = expr(e.operands[1]);
    const std::string& op = e.text;
    if (l == kErrorType || r == kErrorType) return kErrorType;
    auto bad = [&]() {
      report(e.span, "operator " + op + " cannot be applied to " + l + " and " + r);
      return std::string(kErrorType);
    };
    if (l == kClassRef || r == kClassRef || l == "void" || r == "void") return bad();
    if (op == "+") {
      if (l == "int" && r == "int") return "int";
      if (l == "string" || r == "string") return "string";
      return bad();
    }
    if (op == "-" || op == "*" || op == "/" || op == "%") {
      return l == "int" && r == "int" ? "int" : bad();
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      return l == "int" && r == "int" ? "bool" : bad();
    }
    if (op == "&&" || op == "||") {
      return l == "bool" && r == "bool" ? "bool" : bad();
    }
    if (op == "==" || op == "!=") {
      if (l == r) return "bool";
      if (l == kNullType && is_reference_type(r)) return "bool";
      if (r == kNullType && is_reference_type(l)) return "bool";
      return bad();
    }
    return bad();
  }

  Program& program_;
  CompilationUnit* unit_ = nullptr;
  ClassDecl* cls_ = nullptr;
  MethodDecl* method_ = nullptr;
  bool is_static_ = false;
  std::vector<std::map<std::string, Local>> scopes_;
  int next_slot_ = 0;
};

}  // namespace

Program analyze(std::vector<CompilationUnit> units) {
  Program p;
  p.units = std::move(units);
  Checker(p).run();
  return p;
}

Program analyze(const SourceTree& tree) {
  std::vector<CompilationUnit> units;
  std::vector<Diagnostic> syntax;
  for (const auto& [path, text] : tree.files) {
    try {
      units.push_back(parse(text, path));
    } catch (const SyntaxError& e) {
      syntax.push_back(Diagnostic{path, e.line(), e.column(), e.what()});
    }
  }
  Program p = analyze(std::move(units));
  for (auto& d : syntax) {
    p.broken_files.insert(d.file);
    p.diagnostics.insert(p.diagnostics.begin(), std::move(d));
  }
  return p;
}

std::vector<Diagnostic> check(const SourceTree& tree) { return analyze(tree).diagnostics; }

}  // namespace pd::ml
