#include "jwbinder/js/lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstring>
#include <unordered_set>

namespace jwbinder::js {

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> kw = {
      "var", "let", "const", "function", "return", "if", "else", "for", "while",
      "break", "continue", "new", "typeof", "void", "delete", "true", "false",
      "null", "try", "catch", "finally", "throw", "in", "instanceof", "do",
      "switch", "case", "default", "class", "import", "export", "yield",
      "async", "await", "this", "super", "extends", "static", "with", "debugger",
  };
  return kw;
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_ident_part(char c) {
  return is_ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

// Multi-char punctuators, longest first so greedy matching works.
constexpr std::array<std::string_view, 32> kPuncts = {
    ">>>=", "===", "!==", ">>>", "<<=", ">>=", "=>", "==", "!=", "<=", ">=",
    "&&",  "||",  "++",  "--",  "+=", "-=", "*=", "/=", "%=", "&=", "|=",
    "^=",  "<<",  ">>",  "?",   ":",  ";",  ",",  ".",  "(",  ")",
};

constexpr std::string_view kSinglePuncts = "{}[]+-*/%<>=!&|^~";

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      if (pos_ >= src_.size()) break;
      out.push_back(next_token());
    }
    Token eof;
    eof.type = TokenType::EndOfFile;
    eof.begin = eof.end = static_cast<uint32_t>(src_.size());
    out.push_back(eof);
    return out;
  }

 private:
  [[noreturn]] void fail(size_t at, const std::string& detail) {
    auto [line, col] = line_col(src_, at);
    throw SyntaxError(line, col, "", detail);
  }

  void skip_trivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        size_t start = pos_;
        pos_ += 2;
        while (pos_ + 1 < src_.size() && !(src_[pos_] == '*' && src_[pos_ + 1] == '/')) ++pos_;
        if (pos_ + 1 >= src_.size()) fail(start, "unterminated block comment");
        pos_ += 2;
      } else {
        break;
      }
    }
  }

  Token next_token() {
    char c = src_[pos_];
    if (is_ident_start(c)) return lex_ident();
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      return lex_number();
    }
    if (c == '"' || c == '\'') return lex_string();
    if (c == '`') return lex_template();
    return lex_punct();
  }

  Token lex_ident() {
    size_t start = pos_;
    while (pos_ < src_.size() && is_ident_part(src_[pos_])) ++pos_;
    Token t;
    t.value = std::string(src_.substr(start, pos_ - start));
    t.type = keywords().count(t.value) ? TokenType::Keyword : TokenType::Identifier;
    t.begin = static_cast<uint32_t>(start);
    t.end = static_cast<uint32_t>(pos_);
    return t;
  }

  Token lex_number() {
    size_t start = pos_;
    double value = 0;
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
      pos_ += 2;
      size_t digits = pos_;
      uint64_t v = 0;
      while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 16 + static_cast<uint64_t>(
                         std::isdigit(static_cast<unsigned char>(src_[pos_]))
                             ? src_[pos_] - '0'
                             : (std::tolower(static_cast<unsigned char>(src_[pos_])) - 'a' + 10));
        ++pos_;
      }
      if (pos_ == digits) fail(start, "malformed hex literal");
      value = static_cast<double>(v);
    } else {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        size_t digits = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == digits) fail(start, "malformed exponent");
      }
      auto text = src_.substr(start, pos_ - start);
      auto result = std::from_chars(text.data(), text.data() + text.size(), value);
      if (result.ec != std::errc{}) fail(start, "malformed number literal");
    }
    Token t;
    t.type = TokenType::Number;
    t.num = value;
    t.value = std::string(src_.substr(start, pos_ - start));
    t.begin = static_cast<uint32_t>(start);
    t.end = static_cast<uint32_t>(pos_);
    return t;
  }

  // Decodes one escape sequence after the backslash; appends bytes to out.
  void decode_escape(std::string& out) {
    if (pos_ >= src_.size()) fail(pos_, "unterminated escape");
    char e = src_[pos_++];
    switch (e) {
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      case 'r': out += '\r'; break;
      case 'b': out += '\b'; break;
      case 'f': out += '\f'; break;
      case 'v': out += '\v'; break;
      case '0': out += '\0'; break;
      case 'x': {
        if (pos_ + 1 >= src_.size()) fail(pos_, "truncated \\x escape");
        int hi = hex_digit(src_[pos_]);
        int lo = hex_digit(src_[pos_ + 1]);
        if (hi < 0 || lo < 0) fail(pos_, "malformed \\x escape");
        out += static_cast<char>(hi * 16 + lo);
        pos_ += 2;
        break;
      }
      case 'u': {
        if (pos_ + 3 >= src_.size()) fail(pos_, "truncated \\u escape");
        uint32_t cp = 0;
        for (int i = 0; i < 4; ++i) {
          int d = hex_digit(src_[pos_ + static_cast<size_t>(i)]);
          if (d < 0) fail(pos_, "malformed \\u escape");
          cp = cp * 16 + static_cast<uint32_t>(d);
        }
        pos_ += 4;
        append_utf8(out, cp);
        break;
      }
      case '\n': break;  // line continuation
      default: out += e; break;
    }
  }

  static int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  static void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  Token lex_string() {
    size_t start = pos_;
    char quote = src_[pos_++];
    std::string value;
    while (pos_ < src_.size() && src_[pos_] != quote) {
      char c = src_[pos_];
      if (c == '\n') fail(start, "unterminated string literal");
      if (c == '\\') {
        ++pos_;
        decode_escape(value);
      } else {
        value += c;
        ++pos_;
      }
    }
    if (pos_ >= src_.size()) fail(start, "unterminated string literal");
    ++pos_;
    Token t;
    t.type = TokenType::String;
    t.value = std::move(value);
    t.begin = static_cast<uint32_t>(start);
    t.end = static_cast<uint32_t>(pos_);
    return t;
  }

  Token lex_template() {
    size_t start = pos_++;
    Token t;
    t.type = TokenType::TemplateString;
    TemplateSegment seg;
    while (pos_ < src_.size() && src_[pos_] != '`') {
      char c = src_[pos_];
      if (c == '\\') {
        ++pos_;
        decode_escape(seg.quasi);
      } else if (c == '$' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '{') {
        pos_ += 2;
        seg.expr_begin = static_cast<uint32_t>(pos_);
        // Scan for the matching close brace; nested braces and string/template
        // literals inside the substitution are tracked so `${ {a: "}"} }` works.
        int depth = 1;
        while (pos_ < src_.size() && depth > 0) {
          char d = src_[pos_];
          if (d == '{') {
            ++depth;
          } else if (d == '}') {
            --depth;
            if (depth == 0) break;
          } else if (d == '"' || d == '\'') {
            skip_raw_string(d);
            continue;
          } else if (d == '`') {
            skip_raw_template();
            continue;
          }
          ++pos_;
        }
        if (pos_ >= src_.size()) fail(start, "unterminated template substitution");
        seg.expr_end = static_cast<uint32_t>(pos_);
        seg.has_expr = true;
        ++pos_;  // consume '}'
        t.segments.push_back(std::move(seg));
        seg = TemplateSegment{};
      } else {
        seg.quasi += c;
        ++pos_;
      }
    }
    if (pos_ >= src_.size()) fail(start, "unterminated template string");
    ++pos_;
    t.segments.push_back(std::move(seg));
    t.begin = static_cast<uint32_t>(start);
    t.end = static_cast<uint32_t>(pos_);
    return t;
  }

  void skip_raw_string(char quote) {
    ++pos_;  // opening quote
    while (pos_ < src_.size() && src_[pos_] != quote) {
      if (src_[pos_] == '\\') ++pos_;
      ++pos_;
    }
    if (pos_ < src_.size()) ++pos_;
  }

  void skip_raw_template() {
    ++pos_;
    while (pos_ < src_.size() && src_[pos_] != '`') {
      if (src_[pos_] == '\\') ++pos_;
      ++pos_;
    }
    if (pos_ < src_.size()) ++pos_;
  }

  Token lex_punct() {
    size_t start = pos_;
    std::string_view rest = src_.substr(pos_);
    for (std::string_view p : kPuncts) {
      if (rest.substr(0, p.size()) == p) {
        pos_ += p.size();
        Token t;
        t.type = TokenType::Punct;
        t.value = std::string(p);
        t.begin = static_cast<uint32_t>(start);
        t.end = static_cast<uint32_t>(pos_);
        return t;
      }
    }
    char c = src_[pos_];
    if (kSinglePuncts.find(c) != std::string_view::npos) {
      ++pos_;
      Token t;
      t.type = TokenType::Punct;
      t.value = std::string(1, c);
      t.begin = static_cast<uint32_t>(start);
      t.end = static_cast<uint32_t>(pos_);
      return t;
    }
    fail(start, std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  size_t pos_ = 0;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

std::pair<size_t, size_t> line_col(std::string_view source, size_t offset) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < offset && i < source.size(); ++i) {
    if (source[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace jwbinder::js
