#include "patchdistill/minilang/interpreter.hpp"

#include <algorithm>
#include <charconv>

namespace pd::ml {
namespace {

using Clock = std::chrono::steady_clock;

std::string unquote(const std::string& literal) {
  std::string out;
  for (std::size_t i = 1; i + 1 < literal.size(); ++i) {
    char c = literal[i];
    if (c == '\\' && i + 2 < literal.size()) {
      const char n = literal[++i];
      switch (n) {
        case 'n':
          c = '\n';
          break;
        case 't':
          c = '\t';
          break;
        default:
          c = n;
          break;
      }
    }
    out.push_back(c);
  }
  return out;
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

bool values_equal(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  return a == b;  // shared_ptr compares by identity
}

class Interpreter {
 public:
  Interpreter(const Program& program, const RunOptions& options)
      : program_(program), options_(options) {}

  void arm_deadline() {
    deadline_ = Clock::now() + options_.per_test_timeout;
    steps_ = 0;
    depth_ = 0;
  }

  std::shared_ptr<Object> instantiate(const ClassDecl& cls) {
    auto obj = std::make_shared<Object>();
    obj->cls = &cls;
    obj->fields.reserve(cls.fields.size());
    for (const auto& f : cls.fields) obj->fields.push_back(default_value(f.type_name));
    Frame frame;
    frame.self = obj;
    frame.cls = &cls;
    for (std::size_t i = 0; i < cls.fields.size(); ++i) {
      if (!cls.fields[i].init.empty()) obj->fields[i] = eval(cls.fields[i].init[0], frame);
    }
    return obj;
  }

  Value call(const ClassDecl& cls, const MethodDecl& m, std::shared_ptr<Object> self,
             std::vector<Value> args) {
    if (++depth_ > options_.max_call_depth) {
      --depth_;
      throw RuntimeFault("stack overflow in " + cls.name + "." + m.name);
    }
    Frame frame;
    frame.self = std::move(self);
    frame.cls = &cls;
    frame.slots.resize(static_cast<std::size_t>(std::max(m.frame_size, static_cast<int>(args.size()))));
    for (std::size_t i = 0; i < args.size(); ++i) frame.slots[i] = std::move(args[i]);
    Value ret;
    exec_block(m.body, frame, ret);
    --depth_;
    return ret;
  }

 private:
  struct Frame {
    std::vector<Value> slots;
    std::shared_ptr<Object> self;
    const ClassDecl* cls = nullptr;
  };
  enum class Flow { Normal, Return };

  static Value default_value(const std::string& type) {
    if (type == "int") return std::int64_t{0};
    if (type == "bool") return false;
    return std::monostate{};
  }

  void tick() {
    if ((++steps_ & 1023U) == 0 && Clock::now() > deadline_) {
      throw ExecutionTimeout("test exceeded its time limit");
    }
  }

  Flow exec_block(const std::vector<Stmt>& body, Frame& frame, Value& ret) {
    for (const auto& s : body) {
      if (exec(s, frame, ret) == Flow::Return) return Flow::Return;
    }
    return Flow::Normal;
  }

  bool truthy(const Value& v) const {
    if (const bool* b = std::get_if<bool>(&v)) return *b;
    throw RuntimeFault("condition did not evaluate to bool");
  }

  Flow exec(const Stmt& s, Frame& frame, Value& ret) {
    tick();
    switch (s.kind) {
      case Stmt::Kind::VarDecl:
        frame.slots.at(static_cast<std::size_t>(s.slot)) =
            s.exprs.empty() ? default_value(s.type_name) : eval(s.exprs[0], frame);
        return Flow::Normal;
      case Stmt::Kind::Assign:
        assign(s.exprs[0], eval(s.exprs[1], frame), frame);
        return Flow::Normal;
      case Stmt::Kind::If:
        if (truthy(eval(s.exprs[0], frame))) return exec_block(s.body, frame, ret);
        if (s.has_else) return exec_block(s.else_body, frame, ret);
        return Flow::Normal;
      case Stmt::Kind::While:
        while (truthy(eval(s.exprs[0], frame))) {
          if (exec_block(s.body, frame, ret) == Flow::Return) return Flow::Return;
          tick();
        }
        return Flow::Normal;
      case Stmt::Kind::Return:
        ret = s.exprs.empty() ? Value{} : eval(s.exprs[0], frame);
        return Flow::Return;
      case Stmt::Kind::ExprStmt:
        eval(s.exprs[0], frame);
        return Flow::Normal;
      case Stmt::Kind::Assert:
        if (!truthy(eval(s.exprs[0], frame))) {
          throw AssertionFailed("assertion failed at line " + std::to_string(s.span.line));
        }
        return Flow::Normal;
    }
    return Flow::Normal;
  }

  std::shared_ptr<Object> deref(const Value& v, const Expr& at) const {
    if (const auto* obj = std::get_if<std::shared_ptr<Object>>(&v)) return *obj;
    if (std::holds_alternative<std::monostate>(v)) {
      throw RuntimeFault("null dereference at line " + std::to_string(at.span.line));
    }
    throw RuntimeFault("member access on a non-object value");
  }

  Value& field_slot(const std::shared_ptr<Object>& obj, const std::string& field) {
    const int idx = program_.field_index(obj->cls->name, field);
    if (idx < 0) throw RuntimeFault("no field " + field + " in " + obj->cls->name);
    return obj->fields[static_cast<std::size_t>(idx)];
  }

  void assign(const Expr& target, Value value, Frame& frame) {
    if (target.kind == Expr::Kind::Name) {
      if (target.binding.kind == Binding::Kind::Local) {
        frame.slots.at(static_cast<std::size_t>(target.binding.slot)) = std::move(value);
        return;
      }
      if (target.binding.kind == Binding::Kind::Field && frame.self) {
        field_slot(frame.self, target.binding.member) = std::move(value);
        return;
      }
      throw RuntimeFault("unresolved assignment target " + target.text);
    }
    if (target.kind == Expr::Kind::FieldAccess) {
      auto obj = deref(eval(target.operands[0], frame), target);
      field_slot(obj, target.text) = std::move(value);
      return;
    }
    throw RuntimeFault("invalid assignment target");
  }

  Value eval(const Expr& e, Frame& frame) {
    tick();
    switch (e.kind) {
      case Expr::Kind::IntLiteral: {
        std::int64_t v = 0;
        std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
        return v;
      }
      case Expr::Kind::BoolLiteral:
        return e.text == "true";
      case Expr::Kind::StringLiteral:
        return unquote(e.text);
      case Expr::Kind::NullLiteral:
        return std::monostate{};
      case Expr::Kind::This:
        return frame.self;
      case Expr::Kind::Name:
        switch (e.binding.kind) {
          case Binding::Kind::Local:
            return frame.slots.at(static_cast<std::size_t>(e.binding.slot));
          case Binding::Kind::Field:
            if (!frame.self) throw RuntimeFault("field access without instance");
            return field_slot(frame.self, e.binding.member);
          default:
            throw RuntimeFault("unresolved name " + e.text);
        }
      case Expr::Kind::Paren:
        return eval(e.operands[0], frame);
      case Expr::Kind::FieldAccess: {
        auto obj = deref(eval(e.operands[0], frame), e);
        return field_slot(obj, e.text);
      }
      case Expr::Kind::Call:
        return eval_call(e, frame);
      case Expr::Kind::New: {
        const ClassDecl* cls = program_.find_class(e.text);
        if (cls == nullptr) throw RuntimeFault("unknown class " + e.text);
        return instantiate(*cls);
      }
      case Expr::Kind::Unary: {
        Value v = eval(e.operands[0], frame);
        if (e.text == "!") return !truthy(v);
        if (const auto* i = std::get_if<std::int64_t>(&v)) return wrap_sub(0, *i);
        throw RuntimeFault("negation of a non-int value");
      }
      case Expr::Kind::Binary:
        return eval_binary(e, frame);
    }
    throw RuntimeFault("unsupported expression");
  }

  Value eval_call(const Expr& e, Frame& frame) {
    std::shared_ptr<Object> self;
    const ClassDecl* cls = nullptr;
    if (e.has_receiver) {
      const Expr& recv = e.operands[0];
      if (recv.kind == Expr::Kind::Name && recv.binding.kind == Binding::Kind::Class) {
        cls = program_.find_class(recv.binding.cls);
      } else {
        self = deref(eval(recv, frame), e);
        cls = self->cls;
      }
    } else {
      cls = frame.cls;
      self = frame.self;
    }
    const MethodDecl* m = cls != nullptr ? cls->find_method(e.text) : nullptr;
    if (m == nullptr) throw RuntimeFault("missing method " + e.text);
    if (!m->is_static && !self) throw RuntimeFault("instance method " + e.text + " called without receiver");
    std::vector<Value> args;
    args.reserve(e.operands.size() - e.first_arg());
    for (std::size_t i = e.first_arg(); i < e.operands.size(); ++i) args.push_back(eval(e.operands[i], frame));
    if (args.size() != m->params.size()) throw RuntimeFault("arity mismatch calling " + e.text);
    return call(*cls, *m, m->is_static ? nullptr : self, std::move(args));
  }

  std::int64_t as_int(const Value& v) const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw RuntimeFault("expected int value");
  }

  Value eval_binary(const Expr& e, Frame& frame) {
    const std::string& op = e.text;
    if (op == "&&") {
      if (!truthy(eval(e.operands[0], frame))) return false;
      return truthy(eval(e.operands[1], frame));
    }
    if (op == "||") {
      if (truthy(eval(e.operands[0], frame))) return true;
      return truthy(eval(e.operands[1], frame));
    }
    const Value l = eval(e.operands[0], frame);
    const Value r = eval(e.operands[1], frame);
    if (op == "==") return values_equal(l, r);
    if (op == "!=") return !values_equal(l, r);
    if (op == "+" && e.type == "string") return display(l) + display(r);
    const std::int64_t a = as_int(l);
    const std::int64_t b = as_int(r);
    if (op == "+") return wrap_add(a, b);
    if (op == "-") return wrap_sub(a, b);
    if (op == "*") return wrap_mul(a, b);
    if (op == "/" || op == "%") {
      if (b == 0) throw RuntimeFault("division by zero at line " + std::to_string(e.span.line));
      if (b == -1) return op == "/" ? wrap_sub(0, a) : std::int64_t{0};
      return op == "/" ? a / b : a % b;
    }
    if (op == "<") return a < b;
    if (op == "<=") return a <= b;
    if (op == ">") return a > b;
    if (op == ">=") return a >= b;
    throw RuntimeFault("unknown operator " + op);
  }

  const Program& program_;
  RunOptions options_;
  Clock::time_point deadline_{};
  unsigned steps_ = 0;
  int depth_ = 0;
};

struct TestEntry {
  std::string name;
  std::string file;
  const ClassDecl* cls;
  const MethodDecl* method;
};

std::vector<TestEntry> collect_tests(const Program& program) {
  std::vector<TestEntry> out;
  for (const auto& unit : program.units) {
    for (const auto& cls : unit.classes) {
      for (const auto& m : cls.methods) {
        if (m.is_test) out.push_back({cls.name + "." + m.name, unit.path, &cls, &m});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const TestEntry& a, const TestEntry& b) { return a.name < b.name; });
  return out;
}

}  // namespace

std::string display(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "null";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return "<" + x->cls->name + ">";
        }
      },
      v);
}

std::vector<std::string> list_tests(const Program& program) {
  std::vector<std::string> out;
  for (const auto& t : collect_tests(program)) out.push_back(t.name);
  return out;
}

TestReport run_tests(const Program& program, const TestSelection& selection, const RunOptions& options) {
  const auto tests = collect_tests(program);
  if (selection) {
    for (const auto& name : *selection) {
      const bool known = std::any_of(tests.begin(), tests.end(), [&](const TestEntry& t) { return t.name == name; });
      if (!known) throw HarnessError("no such test: " + name);
    }
  }
  bool program_broken = false;
  for (const auto& f : program.broken_files) {
    if (!is_test_path(f)) program_broken = true;
  }

  TestReport report;
  Interpreter interp(program, options);
  for (const auto& t : tests) {
    if (selection && !selection->contains(t.name)) continue;
    TestResult r;
    r.name = t.name;
    if (program_broken) {
      r.outcome = TestOutcome::Error;
      r.message = "program does not compile";
    } else if (program.broken_files.contains(t.file)) {
      r.outcome = TestOutcome::Error;
      r.message = "test file does not compile";
    } else {
      try {
        interp.arm_deadline();
        auto self = interp.instantiate(*t.cls);
        interp.call(*t.cls, *t.method, self, {});
        r.outcome = TestOutcome::Pass;
      } catch (const AssertionFailed& e) {
        r.outcome = TestOutcome::Fail;
        r.message = e.what();
      } catch (const ExecutionTimeout& e) {
        r.outcome = TestOutcome::Fail;
        r.message = e.what();
      } catch (const RuntimeFault& e) {
        r.outcome = TestOutcome::Error;
        r.message = e.what();
      } catch (const std::out_of_range& e) {
        r.outcome = TestOutcome::Error;
        r.message = "internal frame error";
      }
    }
    report.add(std::move(r));
  }
  return report;
}

TestReport run_tests(const SourceTree& tree, const TestSelection& selection, const RunOptions& options) {
  return run_tests(analyze(tree), selection, options);
}

Value invoke_static(const Program& program, const std::string& cls, const std::string& method,
                    const RunOptions& options) {
  const ClassDecl* c = program.find_class(cls);
  const MethodDecl* m = c != nullptr ? c->find_method(method) : nullptr;
  if (m == nullptr || !m->is_static || !m->params.empty()) {
    throw RuntimeFault("no static parameterless method " + cls + "." + method);
  }
  Interpreter interp(program, options);
  interp.arm_deadline();
  return interp.call(*c, *m, nullptr, {});
}

}  // namespace pd::ml
