#include "patchdistill/refactoring_miner.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include "../lcs.hpp"
#include "internal.hpp"
#include "patchdistill/minilang/checker.hpp"
#include "patchdistill/minilang/lexer.hpp"
#include "patchdistill/minilang/parser.hpp"
#include "patchdistill/minilang/renderer.hpp"
#include "patchdistill/refactoring_engine.hpp"
#include "walk.hpp"

namespace pd {

namespace {

using detail::qualify;
using ml::Binding;
using ml::ClassDecl;
using ml::CompilationUnit;
using ml::Expr;
using ml::MethodDecl;
using ml::Stmt;

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SourceLocation location(const std::string& file, const ml::Span& span) {
  return {file, span.line, span.column, span.begin, span.end};
}

// Renames detected so far, keyed by old names.
struct Maps {
  std::map<std::string, std::string> classes;
  std::map<std::pair<std::string, std::string>, std::string> fields;
  std::map<std::pair<std::string, std::string>, std::string> methods;

  std::string cls(const std::string& n) const {
    auto it = classes.find(n);
    return it == classes.end() ? n : it->second;
  }
  std::string field(const std::string& c, const std::string& f) const {
    auto it = fields.find({c, f});
    return it == fields.end() ? f : it->second;
  }
  std::string method(const std::string& c, const std::string& m) const {
    auto it = methods.find({c, m});
    return it == methods.end() ? m : it->second;
  }
};

struct CloneOptions {
  bool alpha = false;  // locals and parameters become positional placeholders
  bool self = false;   // own name becomes a placeholder
  int rename_slot = -1;
  std::string rename_to;
};

// Copy of a method with references translated through `maps`.
MethodDecl mapped_clone(const MethodDecl& m, const std::string& cls, const Maps& maps, const CloneOptions& opt) {
  MethodDecl c = m;
  auto local_name = [&](int slot, const std::string& name) {
    if (slot == opt.rename_slot) return opt.rename_to;
    return opt.alpha ? "$v" + std::to_string(slot) : name;
  };
  c.name = opt.self ? std::string("$self") : maps.method(cls, m.name);
  c.return_type = maps.cls(c.return_type);
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    c.params[i].type_name = maps.cls(c.params[i].type_name);
    c.params[i].name = local_name(static_cast<int>(i), c.params[i].name);
  }
  detail::for_each_stmt(c, [&](Stmt& s) {
    if (s.kind != Stmt::Kind::VarDecl) return;
    s.type_name = maps.cls(s.type_name);
    s.name = local_name(s.slot, s.name);
  });
  detail::for_each_expr(c, [&](Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Name:
        if (e.binding.kind == Binding::Kind::Local) {
          e.text = local_name(e.binding.slot, e.text);
        } else if (e.binding.kind == Binding::Kind::Field) {
          e.text = maps.field(e.binding.cls, e.text);
        } else if (e.binding.kind == Binding::Kind::Class) {
          e.text = maps.cls(e.text);
        }
        break;
      case Expr::Kind::FieldAccess:
        e.text = maps.field(e.binding.cls, e.text);
        break;
      case Expr::Kind::Call:
        if (opt.self && e.binding.cls == cls && e.text == m.name) {
          e.text = "$self";
        } else {
          e.text = maps.method(e.binding.cls, e.text);
        }
        break;
      case Expr::Kind::New:
        e.text = maps.cls(e.text);
        break;
      default:
        break;
    }
  });
  return c;
}

std::string method_signature(const MethodDecl& m, const std::string& self, const Maps& maps) {
  auto ty = [&](const std::string& t) {
    const std::string mapped = maps.cls(t);
    return t == self ? std::string("$self") : mapped;
  };
  std::string s = m.is_static ? "static " : "";
  s += ty(m.return_type) + "(";
  for (std::size_t i = 0; i < m.params.size(); ++i) s += (i ? "," : "") + ty(m.params[i].type_name);
  return s + ")";
}

// The shape variant leaves member names out, so a class whose members were
// renamed in the same commit can still be paired.
std::string class_signature(const ClassDecl& c, const Maps& maps, bool shape = false) {
  std::vector<std::string> members;
  for (const auto& f : c.fields) {
    members.push_back("F " + (f.type_name == c.name ? "$self" : maps.cls(f.type_name)) + (shape ? "" : " " + f.name));
  }
  for (const auto& m : c.methods) members.push_back("M " + (shape ? "" : m.name) + method_signature(m, c.name, maps));
  std::sort(members.begin(), members.end());
  std::string out;
  for (const auto& m : members) out += m + ";";
  return out;
}

std::string field_fingerprint(const ml::FieldDecl& f, const Maps& maps) {
  std::string s = maps.cls(f.type_name);
  for (const auto& init : f.init) {
    Expr e = init;
    detail::walk_expr(e, [&](Expr& x) {
      if (x.kind == Expr::Kind::New || (x.kind == Expr::Kind::Name && x.binding.kind == Binding::Kind::Class)) {
        x.text = maps.cls(x.text);
      }
      return true;
    });
    s += " = " + ml::render(e);
  }
  return s;
}

// Element pairs within one parent scope: exact names first, then unique
// identical fingerprints, strictest tier first.
template <typename T>
struct Pairing {
  std::vector<std::pair<const T*, const T*>> pairs;
  std::vector<const T*> removed;
  std::vector<const T*> added;
  std::vector<std::pair<const T*, const T*>> renamed;  // subset of pairs
};

template <typename T, typename Name, typename Fp>
Pairing<T> pair_up(const std::vector<const T*>& olds, const std::vector<const T*>& news, Name name, Fp fingerprint,
                   int tiers = 1) {
  Pairing<T> out;
  std::map<std::string, const T*> by_name;
  for (const T* n : news) by_name[name(*n)] = n;
  std::set<const T*> used_new;
  std::vector<const T*> left_old;
  for (const T* o : olds) {
    auto it = by_name.find(name(*o));
    if (it != by_name.end()) {
      out.pairs.emplace_back(o, it->second);
      used_new.insert(it->second);
    } else {
      left_old.push_back(o);
    }
  }
  std::vector<const T*> left_new;
  for (const T* n : news) {
    if (!used_new.count(n)) left_new.push_back(n);
  }
  std::set<const T*> paired;
  for (int tier = 0; tier < tiers; ++tier) {
    std::map<std::string, std::vector<const T*>> old_fp, new_fp;
    for (const T* o : left_old) {
      if (!paired.count(o)) old_fp[fingerprint(*o, true, tier)].push_back(o);
    }
    for (const T* n : left_new) {
      if (!paired.count(n)) new_fp[fingerprint(*n, false, tier)].push_back(n);
    }
    for (const auto& [fp, os] : old_fp) {
      auto it = new_fp.find(fp);
      if (os.size() != 1 || it == new_fp.end() || it->second.size() != 1) continue;
      out.pairs.emplace_back(os[0], it->second[0]);
      out.renamed.emplace_back(os[0], it->second[0]);
      paired.insert(os[0]);
      paired.insert(it->second[0]);
    }
  }
  for (const T* o : left_old) {
    if (!paired.count(o)) out.removed.push_back(o);
  }
  for (const T* n : left_new) {
    if (!paired.count(n)) out.added.push_back(n);
  }
  return out;
}

struct ClassRef {
  const CompilationUnit* unit = nullptr;
  const ClassDecl* cls = nullptr;
};

struct MethodPair {
  ClassRef old_cls, new_cls;
  const MethodDecl* old_m = nullptr;
  const MethodDecl* new_m = nullptr;
};

struct Matcher {
  const ml::Program& old_p;
  const ml::Program& new_p;
  Maps maps;
  ElementMatching matching;
  std::vector<Refactoring> renames;
  std::vector<std::pair<ClassRef, ClassRef>> class_pairs;
  std::vector<MethodPair> method_pairs;

  Matcher(const ml::Program& o, const ml::Program& n) : old_p(o), new_p(n) {}

  static std::map<std::string, std::vector<ClassRef>> by_package(const ml::Program& p) {
    std::map<std::string, std::vector<ClassRef>> out;
    for (const auto& u : p.units) {
      for (const auto& c : u.classes) out[u.package_name].push_back({&u, &c});
    }
    return out;
  }

  static std::string class_names(const std::vector<ClassRef>& cs) {
    std::vector<std::string> names;
    for (const auto& c : cs) names.push_back(c.cls->name);
    std::sort(names.begin(), names.end());
    std::string out;
    for (const auto& n : names) out += n + ",";
    return out;
  }

  void element(ElementKind kind, const std::string& q, const std::string& sig, const std::string& fp,
               bool old_side) {
    (old_side ? matching.removed : matching.added).push_back({kind, q, sig, fnv(fp)});
  }

  void pair(ElementKind kind, const std::string& oq, const std::string& nq, const std::string& sig_o,
            const std::string& sig_n, const std::string& fp_o, const std::string& fp_n) {
    matching.matched.push_back({{kind, oq, sig_o, fnv(fp_o)}, {kind, nq, sig_n, fnv(fp_n)}});
  }

  void run() {
    auto old_pk = by_package(old_p);
    auto new_pk = by_package(new_p);

    // Packages.
    std::vector<std::pair<std::string, std::string>> pkg_pairs;
    std::vector<std::string> old_left, new_left;
    for (const auto& [p, cs] : old_pk) {
      if (new_pk.count(p)) {
        pkg_pairs.emplace_back(p, p);
      } else {
        old_left.push_back(p);
      }
    }
    for (const auto& [p, cs] : new_pk) {
      if (!old_pk.count(p)) new_left.push_back(p);
    }
    std::map<std::string, std::vector<std::string>> ofp, nfp;
    for (const auto& p : old_left) {
      if (!p.empty()) ofp[class_names(old_pk[p])].push_back(p);
    }
    for (const auto& p : new_left) {
      if (!p.empty()) nfp[class_names(new_pk[p])].push_back(p);
    }
    std::set<std::string> renamed_old, renamed_new;
    for (const auto& [fp, os] : ofp) {
      auto it = nfp.find(fp);
      if (os.size() != 1 || it == nfp.end() || it->second.size() != 1) continue;
      pkg_pairs.emplace_back(os[0], it->second[0]);
      renamed_old.insert(os[0]);
      renamed_new.insert(it->second[0]);
      Refactoring r;
      r.kind = RefactoringKind::RenamePackage;
      r.subject = os[0];
      r.new_name = it->second[0];
      const auto& first = old_pk[os[0]].front();
      r.span = location(first.unit->path, first.unit->span);
      renames.push_back(r);
    }
    for (const auto& [o, n] : pkg_pairs) pair(ElementKind::Package, o, n, "", "", class_names(old_pk[o]), class_names(new_pk[n]));
    for (const auto& p : old_left) {
      if (!renamed_old.count(p)) element(ElementKind::Package, p, "", class_names(old_pk[p]), true);
    }
    for (const auto& p : new_left) {
      if (!renamed_new.count(p)) element(ElementKind::Package, p, "", class_names(new_pk[p]), false);
    }

    // Classes within matched packages.
    for (const auto& [po, pn] : pkg_pairs) {
      std::vector<const ClassRef*> os, ns;
      for (const auto& c : old_pk[po]) os.push_back(&c);
      for (const auto& c : new_pk[pn]) ns.push_back(&c);
      auto res = pair_up<ClassRef>(
          os, ns, [](const ClassRef& c) { return c.cls->name; },
          [&](const ClassRef& c, bool, int tier) { return class_signature(*c.cls, Maps{}, tier == 1); }, 2);
      for (auto [o, n] : res.pairs) {
        class_pairs.emplace_back(*o, *n);
        pair(ElementKind::Class, qualify(po, o->cls->name), qualify(pn, n->cls->name), class_signature(*o->cls, {}),
             class_signature(*n->cls, {}), class_signature(*o->cls, {}), class_signature(*n->cls, {}));
      }
      for (auto [o, n] : res.renamed) {
        maps.classes[o->cls->name] = n->cls->name;
        Refactoring r;
        r.kind = RefactoringKind::RenameClass;
        r.subject = qualify(po, o->cls->name);
        r.new_name = n->cls->name;
        r.span = location(o->unit->path, o->cls->span);
        renames.push_back(r);
      }
      for (auto* o : res.removed) {
        element(ElementKind::Class, qualify(po, o->cls->name), class_signature(*o->cls, {}), "", true);
      }
      for (auto* n : res.added) {
        element(ElementKind::Class, qualify(pn, n->cls->name), class_signature(*n->cls, {}), "", false);
      }
    }

    // Fields.
    for (const auto& [oc, nc] : class_pairs) {
      std::vector<const ml::FieldDecl*> os, ns;
      for (const auto& f : oc.cls->fields) os.push_back(&f);
      for (const auto& f : nc.cls->fields) ns.push_back(&f);
      auto res = pair_up<ml::FieldDecl>(
          os, ns, [](const ml::FieldDecl& f) { return f.name; },
          [&](const ml::FieldDecl& f, bool old_side, int) { return field_fingerprint(f, old_side ? maps : Maps{}); });
      const std::string oq = qualify(oc.unit->package_name, oc.cls->name);
      const std::string nq = qualify(nc.unit->package_name, nc.cls->name);
      for (auto [o, n] : res.pairs) {
        pair(ElementKind::Field, oq + "." + o->name, nq + "." + n->name, o->type_name, n->type_name,
             field_fingerprint(*o, maps), field_fingerprint(*n, {}));
      }
      for (auto [o, n] : res.renamed) {
        maps.fields[{oc.cls->name, o->name}] = n->name;
        Refactoring r;
        r.kind = RefactoringKind::RenameField;
        r.subject = oq + "." + o->name;
        r.new_name = n->name;
        r.span = location(oc.unit->path, o->span);
        renames.push_back(r);
      }
      for (auto* o : res.removed) element(ElementKind::Field, oq + "." + o->name, o->type_name, "", true);
      for (auto* n : res.added) element(ElementKind::Field, nq + "." + n->name, n->type_name, "", false);
    }

    // Methods; repeated while new renames make further fingerprints agree.
    struct Pending {
      ClassRef oc, nc;
      std::vector<const MethodDecl*> olds, news;
    };
    std::vector<Pending> pending;
    for (const auto& [oc, nc] : class_pairs) {
      Pending p{oc, nc, {}, {}};
      std::map<std::string, const MethodDecl*> new_by_name;
      for (const auto& m : nc.cls->methods) new_by_name[m.name] = &m;
      std::set<const MethodDecl*> taken;
      for (const auto& m : oc.cls->methods) {
        auto it = new_by_name.find(m.name);
        if (it != new_by_name.end()) {
          method_pairs.push_back({oc, nc, &m, it->second});
          taken.insert(it->second);
        } else {
          p.olds.push_back(&m);
        }
      }
      for (const auto& m : nc.cls->methods) {
        if (!taken.count(&m)) p.news.push_back(&m);
      }
      pending.push_back(std::move(p));
    }
    auto fingerprint = [&](const MethodDecl& m, const ClassRef& c, const Maps& mp) {
      return method_signature(m, c.cls->name, mp) + ml::render(mapped_clone(m, c.cls->name, mp, {true, true, -1, ""}), 0);
    };
    for (bool progress = true; progress;) {
      progress = false;
      for (auto& p : pending) {
        std::map<std::string, std::vector<const MethodDecl*>> ofps, nfps;
        for (const auto* m : p.olds) ofps[fingerprint(*m, p.oc, maps)].push_back(m);
        for (const auto* m : p.news) nfps[fingerprint(*m, p.nc, Maps{})].push_back(m);
        for (const auto& [fp, os] : ofps) {
          auto it = nfps.find(fp);
          if (os.size() != 1 || it == nfps.end() || it->second.size() != 1) continue;
          const MethodDecl* o = os[0];
          const MethodDecl* n = it->second[0];
          method_pairs.push_back({p.oc, p.nc, o, n});
          maps.methods[{p.oc.cls->name, o->name}] = n->name;
          Refactoring r;
          r.kind = RefactoringKind::RenameMethod;
          r.subject = qualify(p.oc.unit->package_name, p.oc.cls->name) + "." + o->name;
          r.new_name = n->name;
          r.span = location(p.oc.unit->path, o->span);
          renames.push_back(r);
          p.olds.erase(std::find(p.olds.begin(), p.olds.end(), o));
          p.news.erase(std::find(p.news.begin(), p.news.end(), n));
          progress = true;
        }
      }
    }
    for (const auto& mp : method_pairs) {
      pair(ElementKind::Method, qualify(mp.old_cls.unit->package_name, mp.old_cls.cls->name) + "." + mp.old_m->name,
           qualify(mp.new_cls.unit->package_name, mp.new_cls.cls->name) + "." + mp.new_m->name,
           method_signature(*mp.old_m, mp.old_cls.cls->name, {}), method_signature(*mp.new_m, mp.new_cls.cls->name, {}),
           fingerprint(*mp.old_m, mp.old_cls, maps), fingerprint(*mp.new_m, mp.new_cls, {}));
    }
    for (const auto& p : pending) {
      for (const auto* m : p.olds) {
        element(ElementKind::Method, qualify(p.oc.unit->package_name, p.oc.cls->name) + "." + m->name,
                method_signature(*m, p.oc.cls->name, {}), fingerprint(*m, p.oc, maps), true);
      }
      for (const auto* m : p.news) {
        element(ElementKind::Method, qualify(p.nc.unit->package_name, p.nc.cls->name) + "." + m->name,
                method_signature(*m, p.nc.cls->name, {}), fingerprint(*m, p.nc, {}), false);
      }
    }

    for (const auto& mp : method_pairs) match_locals(mp);
  }

  // Every use of `slot` in the old method survives, under the new name, in a
  // longest common token subsequence with the new method.
  bool consistent(const MethodPair& mp, int slot, const std::string& old_name, const std::string& new_name) {
    // A swap of two names would otherwise look like two renames.
    auto declarations = [](const MethodDecl& m, const std::string& name) {
      int n = 0;
      for (const auto& p : m.params) n += p.name == name;
      detail::for_each_stmt(m, [&](const Stmt& s) { n += s.kind == Stmt::Kind::VarDecl && s.name == name; });
      return n;
    };
    if (declarations(*mp.new_m, old_name) >= declarations(*mp.old_m, old_name) ||
        detail::method_declares(*mp.old_m, new_name)) {
      return false;
    }
    const MethodDecl renamed = mapped_clone(*mp.old_m, mp.old_cls.cls->name, maps, {false, false, slot, new_name});
    const auto a = ml::token_texts(ml::render(renamed, 0));
    const auto b = ml::token_texts(ml::render(*mp.new_m, 0));
    std::unordered_map<std::string, std::uint32_t> ids;
    detail::Symbols as, bs;
    for (const auto& t : a) as.push_back(ids.emplace(t, static_cast<std::uint32_t>(ids.size())).first->second);
    for (const auto& t : b) bs.push_back(ids.emplace(t, static_cast<std::uint32_t>(ids.size())).first->second);
    const auto matches = detail::lcs_matches(as, 0, as.size(), bs, 0, bs.size());
    const auto uses = static_cast<std::size_t>(std::count(a.begin(), a.end(), new_name));
    std::size_t kept = 0;
    for (auto [i, j] : matches) kept += a[i] == new_name;
    return uses > 0 && kept == uses;
  }

  void match_locals(const MethodPair& mp) {
    const std::string oq = qualify(mp.old_cls.unit->package_name, mp.old_cls.cls->name) + "." + mp.old_m->name;
    const std::string nq = qualify(mp.new_cls.unit->package_name, mp.new_cls.cls->name) + "." + mp.new_m->name;
    const std::string& file = mp.old_cls.unit->path;

    // Parameters: aligned by position when the type lists agree.
    const auto& op = mp.old_m->params;
    const auto& np = mp.new_m->params;
    bool same_types = op.size() == np.size();
    for (std::size_t i = 0; same_types && i < op.size(); ++i) same_types = maps.cls(op[i].type_name) == np[i].type_name;
    for (std::size_t i = 0; i < op.size(); ++i) {
      const bool aligned = same_types;
      const bool paired = aligned && (op[i].name == np[i].name ||
                                      consistent(mp, static_cast<int>(i), op[i].name, np[i].name));
      if (paired) {
        pair(ElementKind::Parameter, oq + "." + op[i].name, nq + "." + np[i].name, op[i].type_name, np[i].type_name,
             "", "");
        if (op[i].name != np[i].name) {
          Refactoring r;
          r.kind = RefactoringKind::RenameParameter;
          r.subject = oq + "." + op[i].name;
          r.new_name = np[i].name;
          r.span = location(file, op[i].span);
          renames.push_back(r);
        }
      } else {
        element(ElementKind::Parameter, oq + "." + op[i].name, op[i].type_name, "", true);
      }
    }
    if (!same_types) {
      for (const auto& p : np) element(ElementKind::Parameter, nq + "." + p.name, p.type_name, "", false);
    }

    // Locals: identical (type, name) declarations anchor an LCS alignment;
    // leftovers in the same gap pair by position and type.
    std::vector<const Stmt*> od, nd;
    detail::for_each_stmt(*mp.old_m, [&](const Stmt& s) {
      if (s.kind == Stmt::Kind::VarDecl) od.push_back(&s);
    });
    detail::for_each_stmt(*mp.new_m, [&](const Stmt& s) {
      if (s.kind == Stmt::Kind::VarDecl) nd.push_back(&s);
    });
    std::unordered_map<std::string, std::uint32_t> ids;
    auto key = [&](const std::string& type, const std::string& name) {
      return ids.emplace(type + " " + name, static_cast<std::uint32_t>(ids.size())).first->second;
    };
    detail::Symbols ok, nk;
    for (const Stmt* s : od) ok.push_back(key(maps.cls(s->type_name), s->name));
    for (const Stmt* s : nd) nk.push_back(key(s->type_name, s->name));
    // Same number of declarations with the same types: pair by position.
    bool positional = od.size() == nd.size();
    for (std::size_t i = 0; positional && i < od.size(); ++i) {
      positional = maps.cls(od[i]->type_name) == nd[i]->type_name;
    }
    detail::Matches anchors;
    if (positional) {
      for (std::size_t i = 0; i < od.size(); ++i) {
        if (ok[i] == nk[i]) anchors.emplace_back(i, i);
      }
    } else {
      anchors = detail::lcs_matches(ok, 0, ok.size(), nk, 0, nk.size());
    }
    anchors.emplace_back(od.size(), nd.size());
    auto ordinal = [&](std::size_t idx) {
      int k = 0;
      for (std::size_t i = 0; i < idx; ++i) k += od[i]->name == od[idx]->name;
      return k;
    };
    auto local_q = [&](const std::string& q, const std::vector<const Stmt*>& decls, std::size_t idx) {
      int k = 0;
      for (std::size_t i = 0; i < idx; ++i) k += decls[i]->name == decls[idx]->name;
      return q + "." + decls[idx]->name + (k ? "#" + std::to_string(k) : "");
    };
    std::size_t pi = 0, pj = 0;
    for (auto [ai, aj] : anchors) {
      const bool pairable = ai - pi == aj - pj;
      for (std::size_t k = 0; pi + k < ai || pj + k < aj; ++k) {
        const std::size_t i = pi + k;
        const std::size_t j = pj + k;
        bool paired = false;
        if (pairable && i < ai && maps.cls(od[i]->type_name) == nd[j]->type_name &&
            consistent(mp, od[i]->slot, od[i]->name, nd[j]->name)) {
          paired = true;
          pair(ElementKind::LocalVariable, local_q(oq, od, i), local_q(nq, nd, j), od[i]->type_name,
               nd[j]->type_name, "", "");
          Refactoring r;
          r.kind = RefactoringKind::RenameVariable;
          r.subject = oq + "." + od[i]->name;
          r.new_name = nd[j]->name;
          r.ordinal = ordinal(i);
          r.span = location(file, od[i]->span);
          renames.push_back(r);
        }
        if (!paired) {
          if (i < ai) element(ElementKind::LocalVariable, local_q(oq, od, i), od[i]->type_name, "", true);
          if (j < aj) element(ElementKind::LocalVariable, local_q(nq, nd, j), nd[j]->type_name, "", false);
        }
      }
      if (ai < od.size()) {
        pair(ElementKind::LocalVariable, local_q(oq, od, ai), local_q(nq, nd, aj), od[ai]->type_name,
             nd[aj]->type_name, "", "");
      }
      pi = ai + 1;
      pj = aj + 1;
    }
  }
};

std::size_t file_distance(const SourceTree& a, const SourceTree& b, const std::string& path) {
  auto ia = a.files.find(path);
  auto ib = b.files.find(path);
  return detail::token_distance(ia == a.files.end() ? "" : ia->second, ib == b.files.end() ? "" : ib->second);
}

// Locates the class after renames; names are unique across the tree.
const CompilationUnit* unit_with_class(const ml::Program& p, const std::string& name) {
  return p.unit_of_class(name);
}

void detect_extract_methods(const SourceTree& inter, ml::Program& ip, const ml::Program& np,
                            std::vector<Refactoring>& out) {
  for (const auto& nu : np.units) {
    for (const auto& nc : nu.classes) {
      const CompilationUnit* iu = unit_with_class(ip, nc.name);
      if (iu == nullptr) continue;
      const ClassDecl* ic = iu->find_class(nc.name);
      for (const auto& added : nc.methods) {
        if (ic->find_method(added.name) != nullptr || added.body.empty()) continue;
        for (const auto& caller : nc.methods) {
          if (&caller == &added) continue;
          ml::MethodDecl* source = const_cast<ClassDecl*>(ic)->find_method(caller.name);
          if (source == nullptr) continue;
          detail::for_each_stmt(caller, [&](const Stmt& s) {
            const bool call_stmt = s.kind == Stmt::Kind::ExprStmt || s.kind == Stmt::Kind::Return;
            if (!call_stmt || s.exprs.empty()) return;
            const Expr& call = s.exprs[0];
            if (call.kind != Expr::Kind::Call || call.text != added.name || call.binding.cls != nc.name) return;
            if (call.has_receiver && call.operands[0].kind != Expr::Kind::This) return;
            if ((s.kind == Stmt::Kind::Return) != (added.return_type != "void")) return;
            Refactoring r;
            r.kind = RefactoringKind::ExtractMethod;
            r.subject = qualify(iu->package_name, ic->name) + "." + source->name;
            r.new_name = added.name;
            r.return_type = added.return_type;
            r.is_static = added.is_static;
            for (std::size_t i = call.first_arg(); i < call.operands.size(); ++i) {
              const Expr& a = call.operands[i];
              if (a.kind != Expr::Kind::Name || a.binding.kind != Binding::Kind::Local) return;
              r.args.push_back(a.text);
            }
            if (r.args.size() != added.params.size()) return;
            for (const auto& p : added.params) r.params.push_back({p.type_name, p.name});
            MethodDecl body = added;
            detail::for_each_expr(body, [&](Expr& e) {
              if (e.kind == Expr::Kind::Name && e.binding.kind == Binding::Kind::Local &&
                  e.binding.slot < static_cast<int>(r.args.size())) {
                e.text = r.args[static_cast<std::size_t>(e.binding.slot)];
              }
            });
            for (const auto& st : body.body) r.statements.push_back(ml::render(st, 0));
            for (std::size_t k = 0; k < nc.layout.size(); ++k) {
              const auto& mem = nc.layout[k];
              if (mem.is_method && nc.methods[mem.index].name == added.name) break;
              if (mem.is_method) r.insert_after = nc.methods[mem.index].name;
            }
            auto run = detail::find_statements(*source, r.statements);
            if (!run) return;
            const ml::Span first = (*run->block)[run->begin].span;
            const ml::Span last = (*run->block)[run->begin + run->count - 1].span;
            r.span = {iu->path, first.line, first.column, first.begin, last.end};
            SourceTree applied;
            try {
              applied = apply_refactoring(inter, r);
            } catch (const ReapplyConflict&) {
              return;
            }
            // New program tree built from the analyzed units of the new side.
            SourceTree target = detail::render_units(np.units);
            if (file_distance(applied, target, iu->path) < file_distance(inter, target, iu->path)) out.push_back(r);
          });
        }
      }
    }
  }
}

void detect_extract_variables(const SourceTree& inter, ml::Program& ip, const ml::Program& np,
                              std::vector<Refactoring>& out) {
  const SourceTree target = detail::render_units(np.units);
  for (const auto& nu : np.units) {
    for (const auto& nc : nu.classes) {
      const CompilationUnit* iu = unit_with_class(ip, nc.name);
      if (iu == nullptr) continue;
      ClassDecl* ic = const_cast<CompilationUnit*>(iu)->find_class(nc.name);
      for (const auto& nm : nc.methods) {
        MethodDecl* im = ic->find_method(nm.name);
        if (im == nullptr) continue;
        detail::for_each_stmt(nm, [&](const Stmt& d) {
          if (d.kind != Stmt::Kind::VarDecl || d.exprs.empty() || detail::method_declares(*im, d.name)) return;
          bool used = false;
          detail::for_each_expr(nm, [&](const Expr& e) {
            used = used || (e.kind == Expr::Kind::Name && e.binding.kind == Binding::Kind::Local &&
                            e.binding.slot == d.slot);
          });
          if (!used) return;
          const std::string text = ml::render(d.exprs[0]);
          const Expr pattern = ml::parse_expression(text);
          MethodDecl scratch = *im;
          const auto occ = detail::find_occurrences(scratch, pattern);
          if (occ.empty()) return;

          std::vector<std::vector<int>> choices;
          const std::size_t k = occ.size();
          if (k <= 6) {
            for (std::size_t size = k; size >= 1; --size) {
              for (unsigned mask = 1; mask < (1u << k); ++mask) {
                if (static_cast<std::size_t>(__builtin_popcount(mask)) != size) continue;
                std::vector<int> pick;
                for (std::size_t b = 0; b < k; ++b) {
                  if (mask & (1u << b)) pick.push_back(static_cast<int>(b));
                }
                choices.push_back(pick);
              }
            }
          } else {
            std::vector<int> all;
            for (std::size_t b = 0; b < k; ++b) all.push_back(static_cast<int>(b));
            choices.push_back(all);
          }

          const std::size_t before = file_distance(inter, target, iu->path);
          std::optional<Refactoring> best;
          std::size_t best_dist = before;
          for (const auto& pick : choices) {
            Refactoring r;
            r.kind = RefactoringKind::ExtractVariable;
            r.subject = qualify(iu->package_name, ic->name) + "." + im->name;
            r.new_name = d.name;
            r.var_type = d.type_name;
            r.expression = text;
            r.occurrences = pick;
            const ml::Span sp = occ[static_cast<std::size_t>(pick.front())].expr->span;
            r.span = {iu->path, sp.line, sp.column, sp.begin, sp.end};
            try {
              const std::size_t dist = file_distance(apply_refactoring(inter, r), target, iu->path);
              if (dist < best_dist) {
                best_dist = dist;
                best = r;
              }
            } catch (const ReapplyConflict&) {
            }
          }
          if (best) out.push_back(*best);
        });
      }
    }
  }
}

}  // namespace

const char* to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::Package:
      return "package";
    case ElementKind::Class:
      return "class";
    case ElementKind::Method:
      return "method";
    case ElementKind::Field:
      return "field";
    case ElementKind::Parameter:
      return "parameter";
    case ElementKind::LocalVariable:
      return "local-variable";
  }
  return "?";
}

ElementMatching match_elements(const SourceTree& old_tree, const SourceTree& new_tree) {
  const ml::Program op = ml::analyze(old_tree.program_files());
  const ml::Program np = ml::analyze(new_tree.program_files());
  Matcher m(op, np);
  m.run();
  return m.matching;
}

std::vector<Refactoring> detect(const SourceTree& old_tree, const SourceTree& new_tree) {
  const SourceTree old_prog = old_tree.program_files();
  const SourceTree new_prog = new_tree.program_files();
  if (old_prog == new_prog) return {};
  ml::Program op = ml::analyze(old_prog);
  ml::Program np = ml::analyze(new_prog);
  if (!op.clean() || !np.clean()) return {};

  Matcher m(op, np);
  m.run();
  std::vector<Refactoring> out = m.renames;

  SourceTree inter = detail::render_units(op.units);
  if (!out.empty()) {
    try {
      ReapplyPlan plan;
      plan.refactorings = out;
      inter = reapply(inter, plan);
    } catch (const ReapplyConflict&) {
      // Extracts are then looked for against the unrenamed tree.
    }
  }
  ml::Program ip = ml::analyze(inter);
  if (ip.clean()) {
    detect_extract_methods(inter, ip, np, out);
    detect_extract_variables(inter, ip, np, out);
  }
  std::sort(out.begin(), out.end(), refactoring_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string dump_refactorings(const std::vector<Refactoring>& refactorings) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : refactorings) arr.push_back(to_json(r));
  return arr.dump(2) + "\n";
}

}  // namespace pd
