#include "patchdistill/minilang/ast.hpp"

#include <algorithm>

namespace pd::ml {

const MethodDecl* ClassDecl::find_method(const std::string& method_name) const {
  for (const auto& m : methods) {
    if (m.name == method_name) return &m;
  }
  return nullptr;
}

MethodDecl* ClassDecl::find_method(const std::string& method_name) {
  for (auto& m : methods) {
    if (m.name == method_name) return &m;
  }
  return nullptr;
}

const FieldDecl* ClassDecl::find_field(const std::string& field_name) const {
  for (const auto& f : fields) {
    if (f.name == field_name) return &f;
  }
  return nullptr;
}

void ClassDecl::add_field(FieldDecl field) {
  layout.push_back({false, fields.size()});
  fields.push_back(std::move(field));
}

void ClassDecl::add_method(MethodDecl method) {
  layout.push_back({true, methods.size()});
  methods.push_back(std::move(method));
}

void ClassDecl::insert_method_after(const std::string& anchor, MethodDecl method) {
  const Member member{true, methods.size()};
  methods.push_back(std::move(method));
  auto it = std::find_if(layout.begin(), layout.end(), [&](const Member& m) {
    return m.is_method && methods[m.index].name == anchor;
  });
  if (it == layout.end()) {
    layout.push_back(member);
  } else {
    layout.insert(it + 1, member);
  }
}

const ClassDecl* CompilationUnit::find_class(const std::string& class_name) const {
  for (const auto& c : classes) {
    if (c.name == class_name) return &c;
  }
  return nullptr;
}

ClassDecl* CompilationUnit::find_class(const std::string& class_name) {
  for (auto& c : classes) {
    if (c.name == class_name) return &c;
  }
  return nullptr;
}

namespace {

bool same_structure(const FieldDecl& a, const FieldDecl& b);
bool same_structure(const Param& a, const Param& b);

template <typename T>
bool same_list(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_structure(a[i], b[i])) return false;
  }
  return true;
}

bool same_structure(const FieldDecl& a, const FieldDecl& b) {
  return a.type_name == b.type_name && a.name == b.name && same_list(a.init, b.init);
}

bool same_structure(const Param& a, const Param& b) {
  return a.type_name == b.type_name && a.name == b.name;
}

}  // namespace

bool same_structure(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.text == b.text && a.has_receiver == b.has_receiver &&
         same_list(a.operands, b.operands);
}

bool same_structure(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.type_name == b.type_name && a.name == b.name &&
         a.has_else == b.has_else && a.else_if == b.else_if && same_list(a.exprs, b.exprs) &&
         same_list(a.body, b.body) && same_list(a.else_body, b.else_body);
}

bool same_structure(const MethodDecl& a, const MethodDecl& b) {
  return a.name == b.name && a.is_static == b.is_static && a.return_type == b.return_type &&
         a.is_test == b.is_test && same_list(a.params, b.params) && same_list(a.body, b.body);
}

bool same_structure(const ClassDecl& a, const ClassDecl& b) {
  if (a.name != b.name || a.layout.size() != b.layout.size()) return false;
  for (std::size_t i = 0; i < a.layout.size(); ++i) {
    const auto& ma = a.layout[i];
    const auto& mb = b.layout[i];
    if (ma.is_method != mb.is_method) return false;
    const bool same = ma.is_method
                          ? same_structure(a.methods[ma.index], b.methods[mb.index])
                          : same_structure(a.fields[ma.index], b.fields[mb.index]);
    if (!same) return false;
  }
  return true;
}

bool same_structure(const CompilationUnit& a, const CompilationUnit& b) {
  return a.path == b.path && a.package_name == b.package_name && same_list(a.classes, b.classes);
}

bool is_primitive_type(const std::string& type_name) {
  return type_name == "int" || type_name == "bool";
}

bool is_reference_type(const std::string& type_name) {
  return !type_name.empty() && type_name != "int" && type_name != "bool" && type_name != "void";
}

}  // namespace pd::ml
