#include "patchdistill/minilang/lexer.hpp"

#include <array>
#include <cctype>

namespace pd::ml {
namespace {

constexpr std::array<std::string_view, 17> kKeywords = {
    "package", "class", "static", "void",   "int",   "bool",
    "string",  "if",    "else",   "while",  "return", "assert",
    "new",     "null",  "true",   "false",  "this"};

// Longest match first.
constexpr std::array<std::string_view, 6> kTwoCharPunct = {"==", "!=", "<=", ">=", "&&", "||"};
constexpr std::string_view kOneCharPunct = "{}();,.=<>+-*/%!";

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

bool is_identifier(std::string_view word) {
  if (word.empty() || !ident_start(word[0])) return false;
  for (char c : word) {
    if (!ident_char(c)) return false;
  }
  return !is_keyword(word);
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto push = [&](std::size_t start, std::size_t len, TokenKind kind, int tline, int tcol) {
    Token t;
    t.text = std::string(text.substr(start, len));
    t.kind = kind;
    t.index = out.size();
    t.offset = start;
    t.line = tline;
    t.column = tcol;
    out.push_back(std::move(t));
  };

  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const int tline = line;
    const int tcol = col;
    const std::size_t start = i;

    if (text.substr(i, 2) == "//") {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (text.substr(i, 2) == "/*") {
      const auto close = text.find("*/", i + 2);
      if (close == std::string_view::npos) {
        throw LexError("unterminated comment", tline, tcol);
      }
      advance(close + 2 - i);
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      const auto word = text.substr(i, j - i);
      push(i, j - i, is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, tline, tcol);
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && ident_char(text[j])) {
        throw LexError("malformed number", tline, tcol);
      }
      push(i, j - i, TokenKind::IntLiteral, tline, tcol);
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      bool closed = false;
      while (j < text.size()) {
        if (text[j] == '\\' && j + 1 < text.size() && text[j + 1] != '\n') {
          j += 2;
          continue;
        }
        if (text[j] == '\n') break;
        if (text[j] == '"') {
          closed = true;
          ++j;
          break;
        }
        ++j;
      }
      if (!closed) throw LexError("unterminated string literal", tline, tcol);
      push(start, j - start, TokenKind::StringLiteral, tline, tcol);
      advance(j - start);
      continue;
    }
    bool matched = false;
    for (auto p : kTwoCharPunct) {
      if (text.substr(i, 2) == p) {
        push(i, 2, TokenKind::Punct, tline, tcol);
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kOneCharPunct.find(c) != std::string_view::npos) {
      push(i, 1, TokenKind::Punct, tline, tcol);
      advance(1);
      continue;
    }
    throw LexError(std::string("unexpected character '") + c + "'", tline, tcol);
  }
  return out;
}

std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

}  // namespace pd::ml
