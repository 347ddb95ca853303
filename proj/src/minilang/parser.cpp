#include "patchdistill/minilang/parser.hpp"

#include <vector>

#include "patchdistill/minilang/lexer.hpp"
#include "patchdistill/source_tree.hpp"

namespace pd::ml {
namespace {

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string path)
      : tokens_(std::move(tokens)), path_(std::move(path)) {}

  CompilationUnit unit() {
    CompilationUnit u;
    u.path = path_;
    u.span = start();
    if (accept_keyword("package")) {
      u.package_name = qualified_name();
      expect(";");
    }
    while (!at_end()) {
      u.classes.push_back(class_decl());
    }
    finish(u.span);
    return u;
  }

  Expr standalone_expression() {
    Expr e = expression();
    if (!at_end()) fail("unexpected token after expression");
    return e;
  }

 private:
  const Token* peek(std::size_t ahead = 0) const {
    const auto k = pos_ + ahead;
    return k < tokens_.size() ? &tokens_[k] : nullptr;
  }
  bool at_end() const { return pos_ >= tokens_.size(); }
  bool check(std::string_view text, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t != nullptr && t->text == text && t->kind != TokenKind::StringLiteral;
  }
  bool check_kind(TokenKind kind, std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    return t != nullptr && t->kind == kind;
  }

  [[noreturn]] void fail(const std::string& message) const {
    if (at_end()) {
      const int line = tokens_.empty() ? 1 : tokens_.back().line;
      const int col = tokens_.empty() ? 1 : tokens_.back().column + static_cast<int>(tokens_.back().text.size());
      throw SyntaxError(message + " at end of input", line, col);
    }
    const Token& t = tokens_[pos_];
    throw SyntaxError(message + " near '" + t.text + "'", t.line, t.column);
  }

  const Token& next() {
    if (at_end()) fail("unexpected end of input");
    return tokens_[pos_++];
  }
  void expect(std::string_view text) {
    if (!check(text)) fail("expected '" + std::string(text) + "'");
    ++pos_;
  }
  bool accept(std::string_view text) {
    if (check(text)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept_keyword(std::string_view text) {
    return check_kind(TokenKind::Keyword) && accept(text);
  }
  std::string identifier() {
    if (!check_kind(TokenKind::Identifier)) fail("expected identifier");
    return next().text;
  }
  std::string qualified_name() {
    std::string name = identifier();
    while (accept(".")) name += "." + identifier();
    return name;
  }

  Span start() const {
    Span s;
    s.begin = pos_;
    if (const Token* t = peek()) {
      s.line = t->line;
      s.column = t->column;
    }
    return s;
  }
  void finish(Span& s) const { s.end = pos_; }

  bool type_start(std::size_t ahead = 0) const {
    const Token* t = peek(ahead);
    if (t == nullptr) return false;
    if (t->kind == TokenKind::Keyword) {
      return t->text == "int" || t->text == "bool" || t->text == "string" || t->text == "void";
    }
    return t->kind == TokenKind::Identifier;
  }
  std::string type_name() {
    if (!type_start()) fail("expected type");
    return next().text;
  }

  ClassDecl class_decl() {
    ClassDecl c;
    c.span = start();
    if (!accept_keyword("class")) fail("expected 'class'");
    c.name = identifier();
    expect("{");
    while (!check("}")) {
      if (at_end()) fail("expected '}'");
      member(c);
    }
    expect("}");
    finish(c.span);
    return c;
  }

  void member(ClassDecl& c) {
    const Span s = start();
    const bool is_static = accept_keyword("static");
    const std::string type = type_name();
    const std::string name = identifier();
    if (check("(")) {
      MethodDecl m;
      m.span = s;
      m.is_static = is_static;
      m.return_type = type;
      m.name = name;
      expect("(");
      if (!check(")")) {
        do {
          Param p;
          p.span = start();
          p.type_name = type_name();
          p.name = identifier();
          finish(p.span);
          m.params.push_back(std::move(p));
        } while (accept(","));
      }
      expect(")");
      m.body = block();
      m.is_test = is_test_path(path_) && m.name.rfind("test_", 0) == 0;
      finish(m.span);
      c.add_method(std::move(m));
      return;
    }
    if (is_static) fail("fields cannot be static");
    FieldDecl f;
    f.span = s;
    f.type_name = type;
    f.name = name;
    if (accept("=")) f.init.push_back(expression());
    expect(";");
    finish(f.span);
    c.add_field(std::move(f));
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> body;
    while (!check("}")) {
      if (at_end()) fail("expected '}'");
      body.push_back(statement());
    }
    expect("}");
    return body;
  }

  Stmt statement() {
    Stmt s;
    s.span = start();
    if (check_kind(TokenKind::Keyword) && check("if")) {
      if_statement(s);
    } else if (accept_keyword("while")) {
      s.kind = Stmt::Kind::While;
      expect("(");
      s.exprs.push_back(expression());
      expect(")");
      s.body = block();
    } else if (accept_keyword("return")) {
      s.kind = Stmt::Kind::Return;
      if (!check(";")) s.exprs.push_back(expression());
      expect(";");
    } else if (accept_keyword("assert")) {
      s.kind = Stmt::Kind::Assert;
      s.exprs.push_back(expression());
      expect(";");
    } else if (is_declaration()) {
      s.kind = Stmt::Kind::VarDecl;
      s.type_name = type_name();
      s.name = identifier();
      if (accept("=")) s.exprs.push_back(expression());
      expect(";");
    } else {
      Expr e = expression();
      if (accept("=")) {
        s.kind = Stmt::Kind::Assign;
        s.exprs.push_back(std::move(e));
        s.exprs.push_back(expression());
      } else {
        s.kind = Stmt::Kind::ExprStmt;
        s.exprs.push_back(std::move(e));
      }
      expect(";");
    }
    finish(s.span);
    return s;
  }

  void if_statement(Stmt& s) {
    s.kind = Stmt::Kind::If;
    expect("if");
    expect("(");
    s.exprs.push_back(expression());
    expect(")");
    s.body = block();
    if (accept_keyword("else")) {
      s.has_else = true;
      if (check_kind(TokenKind::Keyword) && check("if")) {
        s.else_if = true;
        Stmt nested;
        nested.span = start();
        if_statement(nested);
        finish(nested.span);
        s.else_body.push_back(std::move(nested));
      } else {
        s.else_body = block();
      }
    }
  }

  bool is_declaration() const {
    const Token* t = peek();
    if (t == nullptr) return false;
    if (t->kind == TokenKind::Keyword) {
      return t->text == "int" || t->text == "bool" || t->text == "string" || t->text == "void";
    }
    return t->kind == TokenKind::Identifier && check_kind(TokenKind::Identifier, 1);
  }

  Expr expression() { return binary(0); }

  static int precedence(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return 0;
  }

  Expr binary(int min_prec) {
    const std::size_t begin = pos_;
    Expr lhs = unary();
    while (const Token* t = peek()) {
      if (t->kind != TokenKind::Punct) break;
      const int prec = precedence(t->text);
      if (prec == 0 || prec <= min_prec) break;
      const std::string op = next().text;
      Expr rhs = binary(prec);
      Expr e;
      e.kind = Expr::Kind::Binary;
      e.text = op;
      e.span = lhs.span;
      e.span.begin = begin;
      e.operands.push_back(std::move(lhs));
      e.operands.push_back(std::move(rhs));
      finish(e.span);
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr unary() {
    if (check_kind(TokenKind::Punct) && (check("!") || check("-"))) {
      Expr e;
      e.span = start();
      e.kind = Expr::Kind::Unary;
      e.text = next().text;
      e.operands.push_back(unary());
      finish(e.span);
      return e;
    }
    return postfix();
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> args;
    expect("(");
    if (!check(")")) {
      do {
        args.push_back(expression());
      } while (accept(","));
    }
    expect(")");
    return args;
  }

  Expr postfix() {
    Expr e = primary();
    while (check_kind(TokenKind::Punct) && check(".")) {
      const std::size_t begin = e.span.begin;
      const Span head = e.span;
      next();
      const std::string member = identifier();
      Expr outer;
      outer.span = head;
      outer.span.begin = begin;
      outer.text = member;
      if (check("(")) {
        outer.kind = Expr::Kind::Call;
        outer.has_receiver = true;
        outer.operands.push_back(std::move(e));
        for (auto& a : arguments()) outer.operands.push_back(std::move(a));
      } else {
        outer.kind = Expr::Kind::FieldAccess;
        outer.operands.push_back(std::move(e));
      }
      finish(outer.span);
      e = std::move(outer);
    }
    return e;
  }

  Expr primary() {
    Expr e;
    e.span = start();
    const Token* t = peek();
    if (t == nullptr) fail("expected expression");
    switch (t->kind) {
      case TokenKind::IntLiteral:
        e.kind = Expr::Kind::IntLiteral;
        e.text = next().text;
        break;
      case TokenKind::StringLiteral:
        e.kind = Expr::Kind::StringLiteral;
        e.text = next().text;
        break;
      case TokenKind::Identifier:
        e.text = next().text;
        if (check("(")) {
          e.kind = Expr::Kind::Call;
          e.operands = arguments();
        } else {
          e.kind = Expr::Kind::Name;
        }
        break;
      case TokenKind::Keyword:
        if (t->text == "true" || t->text == "false") {
          e.kind = Expr::Kind::BoolLiteral;
          e.text = next().text;
        } else if (t->text == "null") {
          e.kind = Expr::Kind::NullLiteral;
          e.text = next().text;
        } else if (t->text == "this") {
          e.kind = Expr::Kind::This;
          e.text = next().text;
        } else if (t->text == "new") {
          next();
          e.kind = Expr::Kind::New;
          e.text = identifier();
          expect("(");
          expect(")");
        } else {
          fail("expected expression");
        }
        break;
      case TokenKind::Punct:
        if (t->text != "(") fail("expected expression");
        next();
        e.kind = Expr::Kind::Paren;
        e.operands.push_back(expression());
        expect(")");
        break;
    }
    finish(e.span);
    return e;
  }

  std::vector<Token> tokens_;
  std::string path_;
  std::size_t pos_ = 0;
};

std::vector<Token> lex_or_throw(std::string_view text) {
  try {
    return tokenize(text);
  } catch (const LexError& e) {
    throw SyntaxError(e.what(), e.line(), e.column());
  }
}

}  // namespace

CompilationUnit parse(std::string_view text, const std::string& path) {
  Parser p(lex_or_throw(text), path);
  return p.unit();
}

Expr parse_expression(std::string_view text) {
  Parser p(lex_or_throw(text), "");
  return p.standalone_expression();
}

}  // namespace pd::ml
