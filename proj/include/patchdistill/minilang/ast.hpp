#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pd::ml {

// Token range [begin, end) in the token stream of the file the node was
// parsed from, plus the position of the first token.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 0;
  int column = 0;
};

// What a name, call, field access or type reference resolves to. Filled in
// by the checker; empty after parsing.
struct Binding {
  enum class Kind { None, Local, Field, Method, Class };
  Kind kind = Kind::None;
  std::string cls;     // owning class (Field, Method, Class)
  std::string member;  // field or method name
  int slot = -1;       // Local: frame slot (parameters first, then locals)
};

struct Expr {
  enum class Kind {
    IntLiteral,
    BoolLiteral,
    StringLiteral,
    NullLiteral,
    This,
    Name,
    Paren,
    FieldAccess,
    Call,
    New,
    Unary,
    Binary,
  };
  Kind kind = Kind::NullLiteral;
  // Literal text, identifier, field or method name, class name for New,
  // operator for Unary/Binary.
  std::string text;
  // Paren/Unary: [x]; Binary: [lhs, rhs]; FieldAccess: [object];
  // Call: [receiver?, args...].
  std::vector<Expr> operands;
  bool has_receiver = false;
  Span span;
  Binding binding;
  std::string type;  // static type computed by the checker

  std::size_t first_arg() const { return has_receiver ? 1 : 0; }
};

struct Stmt {
  enum class Kind { VarDecl, Assign, If, While, Return, ExprStmt, Assert };
  Kind kind = Kind::ExprStmt;
  std::string type_name;  // VarDecl
  std::string name;       // VarDecl
  // VarDecl: [init?]; Assign: [target, value]; If/While: [cond];
  // Return: [value?]; ExprStmt/Assert: [expr].
  std::vector<Expr> exprs;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  bool has_else = false;
  bool else_if = false;  // else branch spelled `else if`
  Span span;
  int slot = -1;  // VarDecl frame slot, set by the checker
};

struct FieldDecl {
  std::string type_name;
  std::string name;
  std::vector<Expr> init;  // zero or one initializer
  Span span;
};

struct Param {
  std::string type_name;
  std::string name;
  Span span;
};

struct MethodDecl {
  std::string name;
  bool is_static = false;
  std::string return_type = "void";
  std::vector<Param> params;
  std::vector<Stmt> body;
  bool is_test = false;
  Span span;
  int frame_size = 0;  // set by the checker
};

struct ClassDecl {
  struct Member {
    bool is_method = false;
    std::size_t index = 0;
  };
  std::string name;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  std::vector<Member> layout;  // source order of members
  Span span;

  const MethodDecl* find_method(const std::string& method_name) const;
  MethodDecl* find_method(const std::string& method_name);
  const FieldDecl* find_field(const std::string& field_name) const;
  void add_field(FieldDecl field);
  void add_method(MethodDecl method);
  // Inserts directly after the named method, or at the end when absent.
  void insert_method_after(const std::string& anchor, MethodDecl method);
};

struct CompilationUnit {
  std::string path;
  std::string package_name;
  std::vector<ClassDecl> classes;
  Span span;

  const ClassDecl* find_class(const std::string& class_name) const;
  ClassDecl* find_class(const std::string& class_name);
};

// Structural equality: ignores spans, bindings and computed types.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const Stmt& a, const Stmt& b);
bool same_structure(const MethodDecl& a, const MethodDecl& b);
bool same_structure(const ClassDecl& a, const ClassDecl& b);
bool same_structure(const CompilationUnit& a, const CompilationUnit& b);

bool is_primitive_type(const std::string& type_name);
bool is_reference_type(const std::string& type_name);

}  // namespace pd::ml
