#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jwbinder::js {

// Raised by the lexer and parser. Carries 1-based line/column and the token
// class the parser was looking for; callers treat it as "file outside the
// supported subset".
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(size_t line, size_t col, std::string expected, std::string detail)
      : std::runtime_error("SyntaxError at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + detail +
                           (expected.empty() ? "" : " (expected " + expected + ")")),
        line_(line),
        col_(col),
        expected_(std::move(expected)) {}

  size_t line() const { return line_; }
  size_t col() const { return col_; }
  const std::string& expected() const { return expected_; }

 private:
  size_t line_;
  size_t col_;
  std::string expected_;
};

enum class TokenType : uint8_t {
  Identifier,
  Keyword,
  Number,
  String,
  TemplateString,
  Punct,
  EndOfFile,
};

struct TemplateSegment {
  std::string quasi;        // decoded text chunk before the substitution
  uint32_t expr_begin = 0;  // byte range of the ${...} expression source
  uint32_t expr_end = 0;
  bool has_expr = false;    // the final segment carries no expression
};

struct Token {
  TokenType type = TokenType::EndOfFile;
  std::string value;            // lexeme (decoded value for strings)
  double num = 0.0;             // numeric value for Number tokens
  uint32_t begin = 0;
  uint32_t end = 0;
  std::vector<TemplateSegment> segments;  // TemplateString only

  bool is(TokenType t) const { return type == t; }
  bool is_punct(std::string_view p) const { return type == TokenType::Punct && value == p; }
  bool is_keyword(std::string_view k) const { return type == TokenType::Keyword && value == k; }
};

// Tokenizes the whole input up front. Comments are skipped; regex literals
// are not recognized (the subset rejects them, `/` always lexes as an
// operator).
std::vector<Token> tokenize(std::string_view source);

// 1-based line/column for a byte offset.
std::pair<size_t, size_t> line_col(std::string_view source, size_t offset);

}  // namespace jwbinder::js
