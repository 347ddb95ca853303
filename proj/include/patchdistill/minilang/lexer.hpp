#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pd::ml {

enum class TokenKind { Identifier, Keyword, IntLiteral, StringLiteral, Punct };

struct Token {
  std::string text;
  TokenKind kind = TokenKind::Punct;
  std::size_t index = 0;   // position in the file's token stream
  std::size_t offset = 0;  // byte offset of the first character
  int line = 1;            // 1-based
  int column = 1;          // 1-based
};

class LexError : public std::runtime_error {
 public:
  LexError(const std::string& message, int line, int column)
      : std::runtime_error(message), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Splits source text into tokens. Whitespace and comments are dropped.
std::vector<Token> tokenize(std::string_view text);

// Token texts only; convenient for comparisons.
std::vector<std::string> token_texts(std::string_view text);

bool is_keyword(std::string_view word);
bool is_identifier(std::string_view word);

}  // namespace pd::ml
