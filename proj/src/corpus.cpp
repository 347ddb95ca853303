#include "patchdistill/corpus.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "patchdistill/change_model.hpp"
#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/minilang/interpreter.hpp"
#include "patchdistill/minilang/lexer.hpp"
#include "patchdistill/minilang/parser.hpp"
#include "patchdistill/minilang/renderer.hpp"
#include "patchdistill/refactoring_engine.hpp"

namespace pd::corpus {

namespace {

namespace fs = std::filesystem;

const std::map<std::string, std::vector<std::string>> kPools = {
    {"pkg", {"bank", "shop", "depot", "vault", "market", "office", "harbor", "atelier"}},
    {"Acc", {"Account", "Wallet", "Budget", "Tab", "Card", "Purse"}},
    {"Calc", {"Scoring", "Rates", "Metrics", "Pricing", "Tally", "Gauge"}},
    {"Util", {"Bounds", "Limits", "Ranges", "Clip"}},
    {"bal", {"balance", "funds", "total", "stock", "reserve"}},
    {"lim", {"limit", "overdraft", "slack", "margin", "cushion"}},
    {"deposit", {"deposit", "put", "credit", "load", "topUp"}},
    {"fee", {"fee", "charge", "levy", "toll", "surcharge"}},
    {"withdraw", {"withdraw", "take", "debit", "draw", "spend"}},
    {"report", {"report", "summary", "snapshot", "digest"}},
    {"clamp", {"clamp", "bound", "squeeze", "pin"}},
    {"score", {"score", "rate", "weigh", "grade"}},
    {"bonus", {"bonus", "reward", "perk"}},
    {"amt", {"amount", "qty", "units", "n"}},
    {"next", {"next", "updated", "after", "grown"}},
    {"cost", {"cost", "price", "needed", "due"}},
    {"s", {"raw", "mix", "blend", "sum"}},
    {"x1", {"doubled", "twice", "dbl"}},
    {"x2", {"padded", "bumped", "plus"}},
    {"v", {"v", "input", "x"}},
    {"lo", {"lo", "low", "floor"}},
    {"hi", {"hi", "high", "ceil"}},
    {"a", {"a", "first", "p"}},
    {"b", {"b", "second", "q"}},
    {"fresh", {"alt", "other", "spare", "extra", "renamed", "fresh", "moved", "newer"}},
    {"helper", {"alpha", "beta", "gamma", "delta", "omega"}},
};

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

// Identifier from the role's pool that is not used yet; falls back to a
// numbered variant.
std::string fresh_name(Rng& rng, const std::string& role, std::set<std::string>& used) {
  const auto& pool = kPools.at(role);
  std::vector<std::string> free;
  for (const auto& n : pool) {
    if (!used.count(n)) free.push_back(n);
  }
  std::string n = free.empty() ? pick(rng, pool) + std::to_string(uniform(rng, 2, 99)) : pick(rng, free);
  while (used.count(n)) n += std::to_string(uniform(rng, 0, 9));
  used.insert(n);
  return n;
}

std::string random_expr(Rng& rng, int depth) {
  if (depth == 0 || uniform(rng, 0, 2) == 0) {
    switch (uniform(rng, 0, 2)) {
      case 0:
        return "x";
      case 1:
        return "y";
      default:
        return std::to_string(uniform(rng, 1, 9));
    }
  }
  static const std::vector<std::string> ops = {"+", "-", "*"};
  return "(" + random_expr(rng, depth - 1) + " " + pick(rng, ops) + " " + random_expr(rng, depth - 1) + ")";
}

struct Variant {
  std::string fix;       // empty: none
  bool buggy = false;
  std::string change;    // unsupported change applied to this version
};

struct Shape {
  std::map<std::string, std::string> n;
  std::map<std::string, int> c;
  std::vector<std::pair<std::string, std::string>> helpers;  // name, expression
};

std::string acc_text(const Shape& s, const Variant& v) {
  const auto& n = s.n;
  auto c = [&](const char* k) { return std::to_string(s.c.at(k)); };
  auto bug = [&](const char* fix) { return v.buggy && v.fix == fix; };
  std::string t = "package " + n.at("pkg") + ";\n\nclass " + n.at("Acc") + " {\n";
  t += "    int " + n.at("bal") + " = " + c("bal") + ";\n";
  t += "    int " + n.at("lim") + " = " + c("lim") + ";\n\n";

  t += "    int " + n.at("deposit") + "(int " + n.at("amt") + ") {\n";
  t += "        int " + n.at("next") + " = " + n.at("bal") + " + " + n.at("amt") + ";\n";
  if (!bug("assignment")) t += "        " + n.at("bal") + " = " + n.at("next") + ";\n";
  t += "        return " + (bug("variable") ? n.at("amt") : n.at("bal")) + ";\n    }\n\n";

  t += "    int " + n.at("fee") + "(int " + n.at("amt") + ") {\n";
  t += "        if (" + n.at("amt") + (bug("boundary") ? " > " : " >= ") + c("t") + ") {\n";
  t += "            return " + n.at("amt") + " / " + c("d") + ";\n        }\n";
  t += "        return " + (bug("constant") ? std::to_string(s.c.at("k") + 1) : c("k")) + ";\n    }\n\n";

  t += "    int " + n.at("withdraw") + "(int " + n.at("amt") + ") {\n";
  if (!bug("guard")) t += "        if (" + n.at("amt") + " < 0) {\n            return -2;\n        }\n";
  t += "        int " + n.at("cost") + " = " + n.at("amt") + " + " + n.at("fee") + "(" + n.at("amt") + ");\n";
  t += "        if (" + n.at("cost") + " > " + n.at("bal") + " + " + n.at("lim") + ") {\n            return -1;\n        }\n";
  t += "        " + n.at("bal") + " = " + n.at("bal") + " - " + n.at("cost") + ";\n";
  t += "        return " + n.at("bal") + ";\n    }\n\n";

  const std::string d1 = "        int " + n.at("x1") + " = " + n.at("bal") + " * 2;\n";
  const std::string d2 = "        int " + n.at("x2") + " = " + n.at("lim") + " + 1;\n";
  t += "    int " + n.at("report") + "() {\n";
  if (v.change == "inline-variable") {
    t += d1 + "        return " + n.at("x1") + " + " + n.at("lim") + " + 1;\n    }\n";
  } else if (v.change == "reorder-statements") {
    t += d2 + d1 + "        return " + n.at("x1") + " + " + n.at("x2") + ";\n    }\n";
  } else {
    t += d1 + d2 + "        return " + n.at("x1") + " + " + n.at("x2") + ";\n    }\n";
  }
  if (v.change == "new-feature") {
    t += "\n    int " + n.at("bonus") + "(int " + n.at("amt") + ") {\n        return " + n.at("amt") + " * " + c("bonus") +
         " + " + n.at("bal") + ";\n    }\n";
  }
  return t + "}\n";
}

std::string clamp_text(const Shape& s) {
  const auto& n = s.n;
  std::string t = "    static int " + n.at("clamp") + "(int " + n.at("v") + ", int " + n.at("lo") + ", int " + n.at("hi") +
                  ") {\n";
  t += "        if (" + n.at("v") + " < " + n.at("lo") + ") {\n            return " + n.at("lo") + ";\n        }\n";
  t += "        if (" + n.at("v") + " > " + n.at("hi") + ") {\n            return " + n.at("hi") + ";\n        }\n";
  return t + "        return " + n.at("v") + ";\n    }\n";
}

std::string calc_text(const Shape& s, const Variant& v) {
  const auto& n = s.n;
  auto c = [&](const char* k) { return std::to_string(s.c.at(k)); };
  const bool moved = v.change == "move-method";
  std::string t = "package " + n.at("pkg") + ";\n\nclass " + n.at("Calc") + " {\n";
  if (!moved) t += clamp_text(s) + "\n";
  t += "    static int " + n.at("score") + "(int " + n.at("a") + ", int " + n.at("b") + ") {\n";
  t += "        int " + n.at("s") + " = " + n.at("a") + " * " + c("w1") +
       (v.buggy && v.fix == "operator" ? " - " : " + ") + n.at("b") + " * " + c("w2") + ";\n";
  t += "        return " + (moved ? n.at("Util") + "." : std::string()) + n.at("clamp") + "(" + n.at("s") + ", " +
       (v.buggy && v.fix == "argument" ? "1" : "0") + ", " + c("cap") + ");\n    }\n";
  for (const auto& [name, expr] : s.helpers) {
    t += "\n    static int " + name + "(int x, int y) {\n        int t = " + expr + ";\n";
    t += "        if (t > " + c("wrap") + ") {\n            t = t - " + c("wrap") + ";\n        }\n";
    t += "        return t;\n    }\n";
  }
  return t + "}\n";
}

SourceTree program_of(const Shape& s, const Variant& v) {
  SourceTree t;
  const std::string dir = "src/" + s.n.at("pkg") + "/";
  t.files[dir + s.n.at("Acc") + ".ml4j"] = acc_text(s, v);
  t.files[dir + s.n.at("Calc") + ".ml4j"] = calc_text(s, v);
  if (v.change == "move-method") {
    t.files[dir + s.n.at("Util") + ".ml4j"] =
        "package " + s.n.at("pkg") + ";\n\nclass " + s.n.at("Util") + " {\n" + clamp_text(s) + "}\n";
  }
  return normalize(t);
}

Shape random_shape(Rng& rng, int extra_helpers) {
  Shape s;
  std::set<std::string> used;
  for (const char* role : {"pkg", "Acc", "Calc", "Util", "bal", "lim", "deposit", "fee", "withdraw", "report", "clamp",
                           "score", "bonus", "next", "cost", "s", "x1", "x2"}) {
    s.n[role] = fresh_name(rng, role, used);
  }
  // Parameter names only need to avoid fields and locals of their method.
  for (const char* role : {"amt", "v", "lo", "hi", "a", "b"}) s.n[role] = fresh_name(rng, role, used);
  for (int i = 0; i < extra_helpers; ++i) s.helpers.emplace_back(fresh_name(rng, "helper", used), random_expr(rng, 2));
  s.c["bal"] = uniform(rng, 20, 90);
  s.c["lim"] = uniform(rng, 5, 30);
  s.c["t"] = uniform(rng, 8, 20);
  s.c["d"] = uniform(rng, 2, 4);
  do {
    s.c["k"] = uniform(rng, 1, 6);
  } while (s.c["k"] == s.c["t"] / s.c["d"]);
  s.c["w1"] = uniform(rng, 2, 5);
  s.c["w2"] = uniform(rng, 2, 5);
  s.c["cap"] = uniform(rng, 40, 90);
  s.c["bonus"] = uniform(rng, 2, 5);
  s.c["wrap"] = uniform(rng, 30, 60);
  return s;
}

std::vector<std::string> probes_of(const Shape& s) {
  const auto& n = s.n;
  const std::string acc = "new " + n.at("Acc") + "()";
  const int t = s.c.at("t");
  std::vector<std::string> out;
  for (int a : {0, 5, 17}) out.push_back(acc + "." + n.at("deposit") + "(" + std::to_string(a) + ")");
  for (int a : {0, t - 1, t, t + 1, 2 * t}) out.push_back(acc + "." + n.at("fee") + "(" + std::to_string(a) + ")");
  for (int a : {-5, 1, 9, 500}) out.push_back(acc + "." + n.at("withdraw") + "(" + std::to_string(a) + ")");
  out.push_back(acc + "." + n.at("report") + "()");
  for (int a : {-3, 4, 12}) out.push_back(n.at("Calc") + "." + n.at("clamp") + "(" + std::to_string(a) + ", 0, 10)");
  for (auto [a, b] : {std::pair{0, 0}, {1, 2}, {3, 1}, {5, 5}}) {
    out.push_back(n.at("Calc") + "." + n.at("score") + "(" + std::to_string(a) + ", " + std::to_string(b) + ")");
  }
  for (const auto& [name, expr] : s.helpers) {
    for (auto [x, y] : {std::pair{1, 2}, {4, 3}, {7, 9}}) {
      out.push_back(n.at("Calc") + "." + name + "(" + std::to_string(x) + ", " + std::to_string(y) + ")");
    }
  }
  return out;
}

const std::map<std::string, std::string> kFixMethod = {
    {"operator", "score"}, {"boundary", "fee"},        {"constant", "fee"}, {"guard", "withdraw"},
    {"variable", "deposit"}, {"assignment", "deposit"}, {"argument", "score"},
};
const std::vector<std::string> kFixes = {"operator", "boundary", "constant", "guard", "variable", "assignment", "argument"};
const std::vector<std::string> kUnsupported = {"new-feature", "inline-variable", "move-method", "reorder-statements",
                                               "rename-with-edit"};

std::string class_of(const std::string& method_role) {
  return method_role == "clamp" || method_role == "score" ? "Calc" : "Acc";
}

std::string canonical_expr(const std::string& text) { return ml::render(ml::parse_expression(text)); }

// A refactoring of `kind` whose subject avoids the method holding the fix.
std::optional<Refactoring> plan_refactoring(Rng& rng, const Shape& s, RefactoringKind kind, const std::string& fix,
                                            std::set<std::string>& used) {
  const auto& n = s.n;
  const std::string avoid = kFixMethod.at(fix);
  auto q = [&](const std::string& role) { return n.at("pkg") + "." + n.at(class_of(role)) + "." + n.at(role); };
  Refactoring r;
  r.kind = kind;
  switch (kind) {
    case RefactoringKind::RenamePackage:
      r.subject = n.at("pkg");
      r.new_name = fresh_name(rng, "pkg", used);
      return r;
    case RefactoringKind::RenameClass: {
      const std::string role = uniform(rng, 0, 1) ? "Acc" : "Calc";
      r.subject = n.at("pkg") + "." + n.at(role);
      r.new_name = fresh_name(rng, role, used);
      return r;
    }
    case RefactoringKind::RenameField:
      r.subject = n.at("pkg") + "." + n.at("Acc") + "." + n.at(uniform(rng, 0, 1) ? "bal" : "lim");
      r.new_name = fresh_name(rng, "fresh", used);
      return r;
    case RefactoringKind::RenameMethod: {
      std::vector<std::string> roles;
      for (const char* m : {"deposit", "fee", "withdraw", "report", "clamp", "score"}) {
        if (m != avoid) roles.push_back(m);
      }
      const std::string role = pick(rng, roles);
      r.subject = q(role);
      r.new_name = fresh_name(rng, role, used);
      return r;
    }
    case RefactoringKind::RenameParameter:
    case RefactoringKind::RenameVariable: {
      const bool param = kind == RefactoringKind::RenameParameter;
      std::vector<std::pair<std::string, std::string>> options =
          param ? std::vector<std::pair<std::string, std::string>>{{"clamp", "v"}, {"clamp", "hi"}, {"fee", "amt"},
                                                                     {"deposit", "amt"}, {"withdraw", "amt"}, {"score", "a"}}
                : std::vector<std::pair<std::string, std::string>>{
                      {"deposit", "next"}, {"withdraw", "cost"}, {"score", "s"}, {"report", "x1"}};
      options.erase(std::remove_if(options.begin(), options.end(), [&](const auto& o) { return o.first == avoid; }),
                    options.end());
      const auto& [method, var] = pick(rng, options);
      r.subject = q(method) + "." + n.at(var);
      r.new_name = fresh_name(rng, "fresh", used);
      return r;
    }
    case RefactoringKind::ExtractVariable: {
      struct Option {
        std::string method, expr;
      };
      std::vector<Option> options = {{"withdraw", n.at("bal") + " + " + n.at("lim")},
                                     {"score", n.at("a") + " * " + std::to_string(s.c.at("w1"))},
                                     {"report", n.at("bal") + " * 2"}};
      options.erase(std::remove_if(options.begin(), options.end(), [&](const auto& o) { return o.method == avoid; }),
                    options.end());
      const auto& o = pick(rng, options);
      r.subject = q(o.method);
      r.new_name = fresh_name(rng, "fresh", used);
      r.var_type = "int";
      r.expression = canonical_expr(o.expr);
      r.occurrences = {0};
      return r;
    }
    case RefactoringKind::ExtractMethod: {
      std::vector<std::string> options;
      for (const char* m : {"deposit", "withdraw", "report"}) {
        if (m != avoid) options.push_back(m);
      }
      const std::string method = pick(rng, options);
      r.subject = q(method);
      r.new_name = fresh_name(rng, "fresh", used);
      r.insert_after = n.at(method);
      if (method == "deposit") {
        r.params = {{"int", n.at("next")}};
        r.args = {n.at("next")};
        r.statements = {n.at("bal") + " = " + n.at("next") + ";\n"};
      } else if (method == "withdraw") {
        r.params = {{"int", n.at("cost")}};
        r.args = {n.at("cost")};
        r.statements = {n.at("bal") + " = " + n.at("bal") + " - " + n.at("cost") + ";\n", "return " + n.at("bal") + ";\n"};
        r.return_type = "int";
      } else {
        r.params = {{"int", n.at("x1")}, {"int", n.at("x2")}};
        r.args = {n.at("x1"), n.at("x2")};
        r.statements = {"return " + n.at("x1") + " + " + n.at("x2") + ";\n"};
        r.return_type = "int";
      }
      return r;
    }
  }
  return std::nullopt;
}

std::set<std::string> all_names(const Shape& s) {
  std::set<std::string> out;
  for (const auto& [role, name] : s.n) out.insert(name);
  for (const auto& [name, expr] : s.helpers) out.insert(name);
  return out;
}

bool suite_passes(const SourceTree& tree) {
  const TestReport r = ml::run_tests(tree, std::nullopt);
  return !r.results.empty() && r.pass_count() == r.results.size();
}

std::optional<Commit> try_commit(Rng& rng, Category category, const std::string& fix, const std::string& change) {
  const Shape s = random_shape(rng, 1);
  std::set<std::string> used = all_names(s);
  const std::string unsupported = category == Category::FixUnsupported ? change : "";
  const SourceTree buggy = program_of(s, {fix, true, ""});
  const SourceTree fixed = program_of(s, {fix, false, ""});
  const SourceTree changed = program_of(s, {fix, false, unsupported});
  for (const auto* t : {&buggy, &fixed, &changed}) {
    if (!ml::analyze(*t).clean()) return std::nullopt;
  }

  std::vector<std::string> probes = probes_of(s);
  if (unsupported == "move-method") {
    probes.erase(std::remove_if(probes.begin(), probes.end(),
                                [&](const std::string& p) { return p.find("." + s.n.at("clamp") + "(") != std::string::npos; }),
                 probes.end());
  }
  const auto before = evaluate(buggy, probes);
  const auto after = evaluate(fixed, probes);
  std::vector<std::pair<std::string, std::string>> old_cases, fix_cases;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!before[i] || !after[i]) continue;
    if (*before[i] == *after[i]) {
      old_cases.emplace_back(probes[i], *after[i]);
    } else if (fix_cases.empty()) {
      fix_cases.emplace_back(probes[i], *after[i]);
    }
  }
  if (old_cases.empty() || fix_cases.empty()) return std::nullopt;

  const std::string& pkg = s.n.at("pkg");
  const std::string test_dir = "tests/" + pkg + "/";
  const std::string old_cls = s.n.at("Acc") + "Test";
  const std::string fix_cls = s.n.at("Acc") + "FixTest";
  std::string fix_file = probe_tests(pkg, fix_cls, fix_cases, "test_fix_");
  if (unsupported == "new-feature") {
    const std::string expr = "new " + s.n.at("Acc") + "()." + s.n.at("bonus") + "(7)";
    const auto v = evaluate(changed, {expr});
    if (!v[0]) return std::nullopt;
    fix_cases.emplace_back(expr, *v[0]);
    fix_file = probe_tests(pkg, fix_cls, fix_cases, "test_fix_");
  }

  Commit c;
  c.category = category;
  c.fix = fix;
  c.change = change;
  c.old_version = buggy;
  c.old_version.files[test_dir + old_cls + ".ml4j"] = probe_tests(pkg, old_cls, old_cases);
  c.old_version = normalize(c.old_version);
  c.new_version = changed;
  c.new_version.files[test_dir + old_cls + ".ml4j"] = probe_tests(pkg, old_cls, old_cases);
  c.new_version.files[test_dir + fix_cls + ".ml4j"] = fix_file;
  c.new_version = normalize(c.new_version);
  for (std::size_t i = 0; i < fix_cases.size(); ++i) c.triggering.push_back(fix_cls + ".test_fix_" + std::to_string(i));

  SourceTree vprime = c.old_version;
  try {
    if (category == Category::FixRefactoring) {
      const auto kind = refactoring_kind_from_string(change);
      if (!kind) return std::nullopt;
      auto r = plan_refactoring(rng, s, *kind, fix, used);
      if (!r) return std::nullopt;
      c.refactoring = r;
      vprime = apply_refactoring(c.old_version, *r);
      c.new_version = apply_refactoring(c.new_version, *r);
    } else if (unsupported == "rename-with-edit") {
      const std::string role = kFixMethod.at(fix);
      Refactoring r;
      r.kind = RefactoringKind::RenameMethod;
      r.subject = pkg + "." + s.n.at(class_of(role)) + "." + s.n.at(role);
      r.new_name = fresh_name(rng, role, used);
      // The old suite has to call the method, or nothing can observe the
      // missed rename and rename+fix passes as the only candidate.
      const std::string call = "." + s.n.at(role) + "(";
      if (std::none_of(old_cases.begin(), old_cases.end(),
                       [&](const auto& oc) { return oc.first.find(call) != std::string::npos; })) {
        return std::nullopt;
      }
      c.new_version = apply_refactoring(c.new_version, r);
    }
  } catch (const ReapplyConflict&) {
    return std::nullopt;
  }
  if (!suite_passes(c.new_version)) return std::nullopt;
  if (ml::run_tests(vprime, std::nullopt).pass_count() != old_cases.size()) {
    return std::nullopt;
  }
  const SourceTree truth_new = category == Category::FixRefactoring ? c.new_version : fixed;
  c.truth = to_unified_diff(vprime.program_files(), truth_new.program_files());
  return c;
}

}  // namespace

const char* to_string(Category c) {
  switch (c) {
    case Category::PureFix:
      return "pure-fix";
    case Category::FixRefactoring:
      return "fix+refactoring";
    case Category::FixUnsupported:
      return "fix+unsupported";
    case Category::Budget:
      return "budget";
  }
  return "?";
}

Project random_project(Rng& rng, int extra_helpers) {
  const Shape s = random_shape(rng, extra_helpers);
  Project p;
  p.names = s.n;
  p.constants = s.c;
  p.program = program_of(s, {});
  p.probes = probes_of(s);
  return p;
}

std::vector<std::optional<std::string>> evaluate(const SourceTree& program, const std::vector<std::string>& exprs) {
  std::vector<std::optional<std::string>> out(exprs.size());
  SourceTree tree = program.program_files();
  std::string probe = "class PdProbe {\n";
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    probe += "    static int p" + std::to_string(i) + "() {\n        return " + exprs[i] + ";\n    }\n";
  }
  tree.files["src/pd_probe/PdProbe.ml4j"] = probe + "}\n";
  const ml::Program p = ml::analyze(tree);
  if (!p.clean()) {
    if (exprs.size() == 1) return out;
    for (std::size_t i = 0; i < exprs.size(); ++i) out[i] = evaluate(program, {exprs[i]})[0];
    return out;
  }
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    try {
      out[i] = ml::display(ml::invoke_static(p, "PdProbe", "p" + std::to_string(i)));
    } catch (const std::exception&) {
    }
  }
  return out;
}

std::string probe_tests(const std::string& package, const std::string& cls,
                        const std::vector<std::pair<std::string, std::string>>& cases, const std::string& name_prefix) {
  std::string t = (package.empty() ? "" : "package " + package + ";\n\n") + "class " + cls + " {\n";
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (i) t += "\n";
    t += "    void " + name_prefix + std::to_string(i) + "() {\n        assert " + cases[i].first + " == " +
         cases[i].second + ";\n    }\n";
  }
  return t + "}\n";
}

std::vector<Commit> generate_corpus(std::uint64_t seed, std::size_t per_category) {
  Rng rng(seed);
  std::vector<Commit> out;
  const std::vector<std::pair<Category, std::string>> prefixes = {
      {Category::PureFix, "pure"}, {Category::FixRefactoring, "refac"}, {Category::FixUnsupported, "unsup"}};
  for (const auto& [category, prefix] : prefixes) {
    for (std::size_t i = 0; i < per_category; ++i) {
      std::optional<Commit> c;
      for (int attempt = 0; !c && attempt < 200; ++attempt) {
        std::string fix = kFixes[i % kFixes.size()];
        std::string change;
        if (category == Category::FixRefactoring) {
          change = to_string(static_cast<RefactoringKind>(i % 8));
          fix = pick(rng, kFixes);
        } else if (category == Category::FixUnsupported) {
          change = kUnsupported[i % kUnsupported.size()];
          do {
            fix = pick(rng, kFixes);
          } while (change == "move-method" && kFixMethod.at(fix) == "score");
        }
        c = try_commit(rng, category, fix, change);
      }
      if (!c) throw std::runtime_error("corpus generator could not build commit " + prefix);
      char id[32];
      std::snprintf(id, sizeof id, "%s-%03zu", prefix.c_str(), i + 1);
      c->id = id;
      out.push_back(std::move(*c));
    }
  }
  return out;
}

Commit wide_commit(std::uint64_t seed, std::size_t lines) {
  Rng rng(seed);
  const std::string cls = pick(rng, kPools.at("Calc")) + "Wide";
  auto program = [&](std::size_t count) {
    std::string t = "package wide;\n\nclass " + cls + " {\n    static int one() {\n        return 1;\n    }\n\n";
    t += "    static int sum() {\n        int t = 0;\n";
    for (std::size_t i = 1; i <= count; ++i) t += "        t = t + " + std::to_string(i) + ";\n";
    return t + "        return t;\n    }\n}\n";
  };
  Commit c;
  c.id = "wide-" + std::to_string(lines);
  c.category = Category::Budget;
  c.fix = "wide";
  const std::string path = "src/wide/" + cls + ".ml4j";
  c.old_version.files[path] = program(0);
  c.old_version.files["tests/wide/" + cls + "Test.ml4j"] = probe_tests("wide", cls + "Test", {{cls + ".one()", "1"}});
  c.new_version = c.old_version;
  c.new_version.files[path] = program(lines);
  c.new_version.files["tests/wide/" + cls + "FixTest.ml4j"] =
      probe_tests("wide", cls + "FixTest", {{cls + ".sum()", std::to_string(lines * (lines + 1) / 2)}}, "test_fix_");
  c.old_version = normalize(c.old_version);
  c.new_version = normalize(c.new_version);
  c.truth = to_unified_diff(c.old_version.program_files(), c.new_version.program_files());
  c.triggering = {cls + "FixTest.test_fix_0"};
  return c;
}

void write_corpus(const std::vector<Commit>& commits, const fs::path& dir) {
  nlohmann::ordered_json manifest;
  manifest["commits"] = nlohmann::ordered_json::array();
  nlohmann::ordered_json ledger = nlohmann::ordered_json::array();
  for (const auto& c : commits) {
    const fs::path root = dir / "commits" / c.id;
    write_tree(c.old_version, root / "old");
    write_tree(c.new_version, root / "new");
    write_file(root / "truth.diff", c.truth);
    nlohmann::ordered_json m;
    m["id"] = c.id;
    m["project"] = to_string(c.category);
    m["old"] = "commits/" + c.id + "/old";
    m["new"] = "commits/" + c.id + "/new";
    m["truth"] = "commits/" + c.id + "/truth.diff";
    manifest["commits"].push_back(m);
    nlohmann::ordered_json l;
    l["id"] = c.id;
    l["category"] = to_string(c.category);
    l["fix"] = c.fix;
    l["change"] = c.change;
    l["refactoring"] = c.refactoring ? to_json(*c.refactoring) : nlohmann::ordered_json();
    l["triggering"] = c.triggering;
    ledger.push_back(l);
  }
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "ledger.json", ledger.dump(2) + "\n");
}

Injection inject_refactoring(Rng& rng, RefactoringKind kind) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Shape s = random_shape(rng, 1);
    std::set<std::string> used = all_names(s);
    SourceTree before = program_of(s, {});
    const auto probes = probes_of(s);
    const auto values = evaluate(before, probes);
    std::vector<std::pair<std::string, std::string>> cases;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (values[i]) cases.emplace_back(probes[i], *values[i]);
    }
    const std::string& pkg = s.n.at("pkg");
    before.files["tests/" + pkg + "/" + s.n.at("Acc") + "Test.ml4j"] = probe_tests(pkg, s.n.at("Acc") + "Test", cases);
    before = normalize(before);
    auto r = plan_refactoring(rng, s, kind, pick(rng, kFixes), used);
    if (!r) continue;
    try {
      SourceTree after = apply_refactoring(before, *r);
      return {std::move(before), std::move(after), std::move(*r)};
    } catch (const ReapplyConflict&) {
    }
  }
  throw std::runtime_error(std::string("could not inject ") + to_string(kind));
}

Instance random_instance(Rng& rng, std::size_t max_units) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Project p = random_project(rng, uniform(rng, 1, 3));
    SourceTree old_v = p.program;
    const int mutations = uniform(rng, 1, 4);
    for (int m = 0; m < mutations; ++m) {
      std::vector<std::string> paths;
      for (const auto& [path, text] : old_v.files) paths.push_back(path);
      std::string& text = old_v.files[pick(rng, paths)];
      const auto toks = ml::tokenize(text);
      std::vector<std::size_t> sites;
      const int op = uniform(rng, 0, 2);
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i].text;
        const bool literal = toks[i].kind == ml::TokenKind::IntLiteral;
        const bool arith = t == "+" || t == "-" || t == "*" || t == ">" || t == "<" || t == ">=" || t == "<=";
        if ((op == 0 && literal) || (op == 1 && arith) || (op == 2 && t == ";")) sites.push_back(i);
      }
      if (sites.empty()) continue;
      const auto& tok = toks[pick(rng, sites)];
      if (op == 0) {
        text.replace(tok.offset, tok.text.size(), std::to_string(std::stoi(tok.text) + uniform(rng, 1, 3)));
      } else if (op == 1) {
        static const std::map<std::string, std::string> swap = {{"+", "-"}, {"-", "+"}, {"*", "+"}, {">", ">="},
                                                                {"<", "<="}, {">=", ">"}, {"<=", "<"}};
        text.replace(tok.offset, tok.text.size(), swap.at(tok.text));
      } else {
        // Drop the whole line holding this statement.
        const std::size_t begin = text.rfind('\n', tok.offset) + 1;
        const std::size_t end = text.find('\n', tok.offset);
        text.erase(begin, end - begin + 1);
      }
    }
    old_v = normalize(old_v);
    if (old_v == p.program || !ml::analyze(old_v).clean()) continue;
    const std::size_t units = coarsen(diff(old_v, p.program), old_v).size();
    if (units == 0 || units > max_units) continue;

    const auto before = evaluate(old_v, p.probes);
    const auto after = evaluate(p.program, p.probes);
    std::vector<std::pair<std::string, std::string>> old_cases, new_cases;
    bool differs = false;
    for (std::size_t i = 0; i < p.probes.size(); ++i) {
      if (!after[i]) continue;
      new_cases.emplace_back(p.probes[i], *after[i]);
      if (before[i] && *before[i] == *after[i]) {
        old_cases.emplace_back(p.probes[i], *after[i]);
      } else {
        differs = true;
      }
    }
    if (!differs) continue;
    const std::string pkg = p.names.at("pkg");
    Instance inst;
    inst.old_version = old_v;
    inst.old_version.files["tests/" + pkg + "/OldTest.ml4j"] = probe_tests(pkg, "OldTest", old_cases);
    inst.new_version = p.program;
    inst.new_version.files["tests/" + pkg + "/OldTest.ml4j"] = probe_tests(pkg, "OldTest", old_cases);
    inst.new_version.files["tests/" + pkg + "/NewTest.ml4j"] = probe_tests(pkg, "NewTest", new_cases);
    inst.old_version = normalize(inst.old_version);
    inst.new_version = normalize(inst.new_version);
    return inst;
  }
  throw std::runtime_error("could not generate a random instance");
}

}  // namespace pd::corpus
