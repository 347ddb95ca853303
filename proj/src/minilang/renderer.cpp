#include "patchdistill/minilang/renderer.hpp"

#include <sstream>

namespace pd::ml {
namespace {

void indent(std::ostringstream& out, int depth) {
  for (int i = 0; i < depth; ++i) out << "    ";
}

void render_expr(std::ostringstream& out, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLiteral:
    case Expr::Kind::BoolLiteral:
    case Expr::Kind::StringLiteral:
    case Expr::Kind::NullLiteral:
    case Expr::Kind::This:
    case Expr::Kind::Name:
      out << e.text;
      break;
    case Expr::Kind::Paren:
      out << '(';
      render_expr(out, e.operands[0]);
      out << ')';
      break;
    case Expr::Kind::FieldAccess:
      render_expr(out, e.operands[0]);
      out << '.' << e.text;
      break;
    case Expr::Kind::Call: {
      if (e.has_receiver) {
        render_expr(out, e.operands[0]);
        out << '.';
      }
      out << e.text << '(';
      for (std::size_t i = e.first_arg(); i < e.operands.size(); ++i) {
        if (i > e.first_arg()) out << ", ";
        render_expr(out, e.operands[i]);
      }
      out << ')';
      break;
    }
    case Expr::Kind::New:
      out << "new " << e.text << "()";
      break;
    case Expr::Kind::Unary:
      out << e.text;
      render_expr(out, e.operands[0]);
      break;
    case Expr::Kind::Binary:
      render_expr(out, e.operands[0]);
      out << ' ' << e.text << ' ';
      render_expr(out, e.operands[1]);
      break;
  }
}

void render_stmt(std::ostringstream& out, const Stmt& s, int depth);

void render_block(std::ostringstream& out, const std::vector<Stmt>& body, int depth) {
  for (const auto& s : body) render_stmt(out, s, depth);
}

void render_if_tail(std::ostringstream& out, const Stmt& s, int depth) {
  out << "if (";
  render_expr(out, s.exprs[0]);
  out << ") {\n";
  render_block(out, s.body, depth + 1);
  indent(out, depth);
  out << '}';
  if (s.has_else) {
    if (s.else_if && s.else_body.size() == 1 && s.else_body[0].kind == Stmt::Kind::If) {
      out << " else ";
      render_if_tail(out, s.else_body[0], depth);
      return;
    }
    out << " else {\n";
    render_block(out, s.else_body, depth + 1);
    indent(out, depth);
    out << '}';
  }
}

void render_stmt(std::ostringstream& out, const Stmt& s, int depth) {
  indent(out, depth);
  switch (s.kind) {
    case Stmt::Kind::VarDecl:
      out << s.type_name << ' ' << s.name;
      if (!s.exprs.empty()) {
        out << " = ";
        render_expr(out, s.exprs[0]);
      }
      out << ";\n";
      break;
    case Stmt::Kind::Assign:
      render_expr(out, s.exprs[0]);
      out << " = ";
      render_expr(out, s.exprs[1]);
      out << ";\n";
      break;
    case Stmt::Kind::If:
      render_if_tail(out, s, depth);
      out << '\n';
      break;
    case Stmt::Kind::While:
      out << "while (";
      render_expr(out, s.exprs[0]);
      out << ") {\n";
      render_block(out, s.body, depth + 1);
      indent(out, depth);
      out << "}\n";
      break;
    case Stmt::Kind::Return:
      out << "return";
      if (!s.exprs.empty()) {
        out << ' ';
        render_expr(out, s.exprs[0]);
      }
      out << ";\n";
      break;
    case Stmt::Kind::ExprStmt:
      render_expr(out, s.exprs[0]);
      out << ";\n";
      break;
    case Stmt::Kind::Assert:
      out << "assert ";
      render_expr(out, s.exprs[0]);
      out << ";\n";
      break;
  }
}

void render_method(std::ostringstream& out, const MethodDecl& m, int depth) {
  indent(out, depth);
  if (m.is_static) out << "static ";
  out << m.return_type << ' ' << m.name << '(';
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (i > 0) out << ", ";
    out << m.params[i].type_name << ' ' << m.params[i].name;
  }
  out << ") {\n";
  render_block(out, m.body, depth + 1);
  indent(out, depth);
  out << "}\n";
}

void render_field(std::ostringstream& out, const FieldDecl& f) {
  indent(out, 1);
  out << f.type_name << ' ' << f.name;
  if (!f.init.empty()) {
    out << " = ";
    render_expr(out, f.init[0]);
  }
  out << ";\n";
}

}  // namespace

std::string render(const Expr& expr) {
  std::ostringstream out;
  render_expr(out, expr);
  return out.str();
}

std::string render(const Stmt& stmt, int depth) {
  std::ostringstream out;
  render_stmt(out, stmt, depth);
  return out.str();
}

std::string render(const MethodDecl& method, int depth) {
  std::ostringstream out;
  render_method(out, method, depth);
  return out.str();
}

std::string render(const CompilationUnit& unit) {
  std::ostringstream out;
  bool first = true;
  if (!unit.package_name.empty()) {
    out << "package " << unit.package_name << ";\n";
    first = false;
  }
  for (const auto& c : unit.classes) {
    if (!first) out << '\n';
    first = false;
    out << "class " << c.name << " {\n";
    bool prev_method = false;
    for (std::size_t i = 0; i < c.layout.size(); ++i) {
      const auto& m = c.layout[i];
      if (i > 0 && (m.is_method || prev_method)) out << '\n';
      if (m.is_method) {
        render_method(out, c.methods[m.index], 1);
      } else {
        render_field(out, c.fields[m.index]);
      }
      prev_method = m.is_method;
    }
    out << "}\n";
  }
  return out.str();
}

}  // namespace pd::ml
