#include "jwbinder/js/parser.hpp"

#include <unordered_map>

namespace jwbinder::js {

namespace {

int binary_precedence(const Token& t) {
  if (t.type != TokenType::Punct) return 0;
  static const std::unordered_map<std::string_view, int> prec = {
      {"||", 1}, {"&&", 2}, {"|", 3}, {"^", 4}, {"&", 5},
      {"==", 6}, {"!=", 6}, {"===", 6}, {"!==", 6},
      {"<", 7}, {">", 7}, {"<=", 7}, {">=", 7},
      {"<<", 8}, {">>", 8}, {">>>", 8},
      {"+", 9}, {"-", 9},
      {"*", 10}, {"/", 10}, {"%", 10},
  };
  auto it = prec.find(t.value);
  return it == prec.end() ? 0 : it->second;
}

bool is_assign_op(const Token& t) {
  if (t.type != TokenType::Punct) return false;
  return t.value == "=" || t.value == "+=" || t.value == "-=" || t.value == "*=" ||
         t.value == "/=" || t.value == "%=" || t.value == "&=" || t.value == "|=" ||
         t.value == "^=" || t.value == "<<=" || t.value == ">>=" || t.value == ">>>=";
}

class Parser {
 public:
  Parser(std::string_view source, std::vector<Token> tokens, Ast& ast)
      : source_(source), tokens_(std::move(tokens)), ast_(ast) {}

  NodeId parse_program() {
    NodeId program = ast_.make(NodeKind::Program, {0, static_cast<uint32_t>(source_.size())});
    while (!current().is(TokenType::EndOfFile)) {
      ast_.attach(program, parse_statement());
    }
    return program;
  }

  // Entry point for template substitutions: parse a single expression that
  // must consume the whole token stream.
  NodeId parse_lone_expression() {
    NodeId e = parse_assignment();
    if (!current().is(TokenType::EndOfFile)) fail("end of substitution");
    return e;
  }

 private:
  const Token& current() const { return tokens_[pos_]; }
  const Token& peek(size_t n = 1) const {
    size_t i = pos_ + n;
    return tokens_[i < tokens_.size() ? i : tokens_.size() - 1];
  }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& expected) const {
    auto [line, col] = line_col(source_, current().begin);
    std::string got = current().is(TokenType::EndOfFile) ? "end of input" : "'" + current().value + "'";
    throw SyntaxError(line, col, expected, "unexpected " + got);
  }

  void expect_punct(std::string_view p) {
    if (!current().is_punct(p)) fail("'" + std::string(p) + "'");
    advance();
  }

  std::string expect_identifier() {
    if (!current().is(TokenType::Identifier)) fail("identifier");
    return advance().value;
  }

  uint32_t prev_end() const { return tokens_[pos_ == 0 ? 0 : pos_ - 1].end; }

  void finish(NodeId id, uint32_t begin) {
    ast_.node(id).span = {begin, prev_end()};
  }

  // Statement terminator: ';' if present, otherwise tolerated before '}' or
  // end of input.
  void consume_semicolon() {
    if (current().is_punct(";")) {
      advance();
      return;
    }
    if (current().is_punct("}") || current().is(TokenType::EndOfFile)) return;
    fail("';'");
  }

  // ---- statements ----

  NodeId parse_statement() {
    const Token& t = current();
    if (t.type == TokenType::Keyword) {
      const std::string& k = t.value;
      if (k == "var" || k == "let" || k == "const") {
        NodeId d = parse_variable_declaration();
        consume_semicolon();
        finish(d, ast_.node(d).span.begin);
        return d;
      }
      if (k == "function") return parse_function(NodeKind::FunctionDeclaration);
      if (k == "if") return parse_if();
      if (k == "for") return parse_for();
      if (k == "while") return parse_while();
      if (k == "return") return parse_return();
      if (k == "break" || k == "continue") return parse_break_continue(k == "break");
      if (k == "throw") return parse_throw();
      if (k == "try") return parse_try();
      if (k == "this" || k == "typeof" || k == "new" || k == "void" || k == "delete" ||
          k == "true" || k == "false" || k == "null") {
        return parse_expression_statement();
      }
      fail("statement");
    }
    if (t.is_punct("{")) return parse_block();
    if (t.is_punct(";")) {
      uint32_t begin = t.begin;
      advance();
      NodeId e = ast_.make(NodeKind::EmptyStatement);
      finish(e, begin);
      return e;
    }
    if (t.type == TokenType::Identifier && peek().is_punct(":")) {
      uint32_t begin = t.begin;
      std::string label = advance().value;
      advance();  // ':'
      NodeId body = parse_statement();
      NodeId labeled = ast_.make(NodeKind::LabeledStatement);
      ast_.node(labeled).text = std::move(label);
      ast_.attach(labeled, body);
      finish(labeled, begin);
      return labeled;
    }
    return parse_expression_statement();
  }

  NodeId parse_expression_statement() {
    uint32_t begin = current().begin;
    NodeId expr = parse_assignment();
    consume_semicolon();
    if (ast_.node(expr).kind == NodeKind::AssignStatement) {
      finish(expr, begin);
      return expr;
    }
    NodeId stmt = ast_.make(NodeKind::ExpressionStatement);
    ast_.attach(stmt, expr);
    finish(stmt, begin);
    return stmt;
  }

  NodeId parse_variable_declaration() {
    uint32_t begin = current().begin;
    std::string kind = advance().value;
    NodeId decl = ast_.make(NodeKind::VariableDeclaration);
    ast_.node(decl).aux = kind == "var"   ? static_cast<uint16_t>(DeclKind::Var)
                          : kind == "let" ? static_cast<uint16_t>(DeclKind::Let)
                                          : static_cast<uint16_t>(DeclKind::Const);
    for (;;) {
      uint32_t dbegin = current().begin;
      NodeId id = parse_identifier();
      NodeId declarator = ast_.make(NodeKind::VariableDeclarator);
      ast_.attach(declarator, id);
      if (current().is_punct("=")) {
        advance();
        ast_.attach(declarator, parse_assignment());
      }
      finish(declarator, dbegin);
      ast_.attach(decl, declarator);
      if (!current().is_punct(",")) break;
      advance();
    }
    finish(decl, begin);
    return decl;
  }

  NodeId parse_function(NodeKind kind) {
    uint32_t begin = current().begin;
    advance();  // function
    NodeId fn = ast_.make(kind);
    NodeId name = kNoNode;
    if (current().is(TokenType::Identifier)) {
      name = parse_identifier();
    } else if (kind == NodeKind::FunctionDeclaration) {
      fail("function name");
    }
    ast_.attach(fn, name);
    expect_punct("(");
    uint16_t params = 0;
    while (!current().is_punct(")")) {
      if (params > 0) expect_punct(",");
      ast_.attach(fn, parse_identifier());
      ++params;
    }
    advance();  // ')'
    ast_.node(fn).aux = params;
    ast_.attach(fn, parse_block());
    finish(fn, begin);
    return fn;
  }

  NodeId parse_block() {
    uint32_t begin = current().begin;
    expect_punct("{");
    NodeId block = ast_.make(NodeKind::BlockStatement);
    while (!current().is_punct("}")) {
      if (current().is(TokenType::EndOfFile)) fail("'}'");
      ast_.attach(block, parse_statement());
    }
    advance();
    finish(block, begin);
    return block;
  }

  // Parses a statement and wraps non-blocks in a synthetic BlockStatement.
  NodeId parse_body_block() {
    if (current().is_punct("{")) return parse_block();
    NodeId stmt = parse_statement();
    NodeId block = ast_.make(NodeKind::BlockStatement, ast_.node(stmt).span);
    ast_.attach(block, stmt);
    return block;
  }

  NodeId parse_if() {
    uint32_t begin = current().begin;
    advance();
    expect_punct("(");
    NodeId test = parse_assignment();
    expect_punct(")");
    NodeId consequent = parse_body_block();
    NodeId stmt = ast_.make(NodeKind::IfStatement);
    ast_.attach(stmt, test);
    ast_.attach(stmt, consequent);
    if (current().is_keyword("else")) {
      advance();
      // else-if chains stay direct; any other statement is block-normalized.
      NodeId alternate = current().is_keyword("if") ? parse_if() : parse_body_block();
      ast_.attach(stmt, alternate);
    }
    finish(stmt, begin);
    return stmt;
  }

  NodeId parse_for() {
    uint32_t begin = current().begin;
    advance();
    expect_punct("(");
    NodeId init = kNoNode;
    if (!current().is_punct(";")) {
      if (current().is_keyword("var") || current().is_keyword("let") || current().is_keyword("const")) {
        init = parse_variable_declaration();
      } else {
        init = parse_assignment();
      }
      if (current().is_keyword("in") ||
          (current().is(TokenType::Identifier) && current().value == "of")) {
        fail("';' (for-in/for-of is not supported)");
      }
    }
    expect_punct(";");
    NodeId test = current().is_punct(";") ? kNoNode : parse_assignment();
    expect_punct(";");
    NodeId update = current().is_punct(")") ? kNoNode : parse_assignment();
    expect_punct(")");
    NodeId body = parse_body_block();
    NodeId stmt = ast_.make(NodeKind::ForStatement);
    ast_.attach(stmt, init);
    ast_.attach(stmt, test);
    ast_.attach(stmt, update);
    ast_.attach(stmt, body);
    finish(stmt, begin);
    return stmt;
  }

  NodeId parse_while() {
    uint32_t begin = current().begin;
    advance();
    expect_punct("(");
    NodeId test = parse_assignment();
    expect_punct(")");
    NodeId body = parse_body_block();
    NodeId stmt = ast_.make(NodeKind::WhileStatement);
    ast_.attach(stmt, test);
    ast_.attach(stmt, body);
    finish(stmt, begin);
    return stmt;
  }

  NodeId parse_return() {
    uint32_t begin = current().begin;
    advance();
    NodeId stmt = ast_.make(NodeKind::ReturnStatement);
    if (!current().is_punct(";") && !current().is_punct("}") &&
        !current().is(TokenType::EndOfFile)) {
      ast_.attach(stmt, parse_assignment());
    }
    consume_semicolon();
    finish(stmt, begin);
    return stmt;
  }

  NodeId parse_break_continue(bool is_break) {
    uint32_t begin = current().begin;
    advance();
    NodeId stmt = ast_.make(is_break ? NodeKind::BreakStatement : NodeKind::ContinueStatement);
    if (current().is(TokenType::Identifier)) ast_.node(stmt).text = advance().value;
    consume_semicolon();
    finish(stmt, begin);
    return stmt;
  }

  NodeId parse_throw() {
    uint32_t begin = current().begin;
    advance();
    NodeId stmt = ast_.make(NodeKind::ThrowStatement);
    ast_.attach(stmt, parse_assignment());
    consume_semicolon();
    finish(stmt, begin);
    return stmt;
  }

  NodeId parse_try() {
    uint32_t begin = current().begin;
    advance();
    NodeId stmt = ast_.make(NodeKind::TryStatement);
    ast_.attach(stmt, parse_block());
    NodeId param = kNoNode, handler = kNoNode, finalizer = kNoNode;
    bool has_catch = false;
    if (current().is_keyword("catch")) {
      has_catch = true;
      advance();
      if (current().is_punct("(")) {
        advance();
        param = parse_identifier();
        expect_punct(")");
      }
      handler = parse_block();
    }
    if (current().is_keyword("finally")) {
      advance();
      finalizer = parse_block();
    }
    if (!has_catch && finalizer == kNoNode) fail("'catch' or 'finally'");
    ast_.attach(stmt, param);
    ast_.attach(stmt, handler);
    ast_.attach(stmt, finalizer);
    finish(stmt, begin);
    return stmt;
  }

  // ---- expressions ----

  NodeId parse_identifier() {
    if (!current().is(TokenType::Identifier)) fail("identifier");
    const Token& t = advance();
    NodeId id = ast_.make(NodeKind::Identifier, {t.begin, t.end});
    ast_.node(id).text = t.value;
    return id;
  }

  NodeId parse_assignment() {
    uint32_t begin = current().begin;
    NodeId left = parse_conditional();
    if (is_assign_op(current())) {
      NodeKind lk = ast_.node(left).kind;
      if (lk != NodeKind::Identifier && lk != NodeKind::MemberExpression) {
        fail("assignable target");
      }
      std::string op = advance().value;
      NodeId right = parse_assignment();
      NodeId assign = ast_.make(NodeKind::AssignStatement);
      ast_.node(assign).text = std::move(op);
      ast_.attach(assign, left);
      ast_.attach(assign, right);
      finish(assign, begin);
      return assign;
    }
    return left;
  }

  NodeId parse_conditional() {
    uint32_t begin = current().begin;
    NodeId test = parse_binary(1);
    if (!current().is_punct("?")) return test;
    advance();
    NodeId consequent = parse_assignment();
    expect_punct(":");
    NodeId alternate = parse_assignment();
    NodeId cond = ast_.make(NodeKind::ConditionalExpression);
    ast_.attach(cond, test);
    ast_.attach(cond, consequent);
    ast_.attach(cond, alternate);
    finish(cond, begin);
    return cond;
  }

  NodeId parse_binary(int min_prec) {
    uint32_t begin = current().begin;
    NodeId left = parse_unary();
    for (;;) {
      int prec = binary_precedence(current());
      if (prec < min_prec || prec == 0) return left;
      std::string op = advance().value;
      NodeId right = parse_binary(prec + 1);
      NodeId bin = ast_.make(NodeKind::BinaryExpression);
      ast_.node(bin).text = std::move(op);
      ast_.attach(bin, left);
      ast_.attach(bin, right);
      finish(bin, begin);
      left = bin;
    }
  }

  NodeId parse_unary() {
    const Token& t = current();
    bool word_op = t.is_keyword("typeof") || t.is_keyword("void") || t.is_keyword("delete");
    bool sym_op = t.is_punct("!") || t.is_punct("~") || t.is_punct("+") || t.is_punct("-");
    if (word_op || sym_op) {
      uint32_t begin = t.begin;
      std::string op = advance().value;
      NodeId arg = parse_unary();
      NodeId u = ast_.make(NodeKind::UnaryExpression);
      ast_.node(u).text = std::move(op);
      ast_.attach(u, arg);
      finish(u, begin);
      return u;
    }
    if (t.is_punct("++") || t.is_punct("--")) {
      uint32_t begin = t.begin;
      std::string op = advance().value;
      NodeId arg = parse_unary();
      NodeId u = ast_.make(NodeKind::UpdateExpression);
      ast_.node(u).text = std::move(op);
      ast_.node(u).flags |= kFlagPrefix;
      ast_.attach(u, arg);
      finish(u, begin);
      return u;
    }
    return parse_postfix();
  }

  NodeId parse_postfix() {
    uint32_t begin = current().begin;
    NodeId expr = parse_call_member(parse_primary(), begin);
    if (current().is_punct("++") || current().is_punct("--")) {
      std::string op = advance().value;
      NodeId u = ast_.make(NodeKind::UpdateExpression);
      ast_.node(u).text = std::move(op);
      ast_.attach(u, expr);
      finish(u, begin);
      return u;
    }
    return expr;
  }

  NodeId parse_call_member(NodeId expr, uint32_t begin) {
    for (;;) {
      if (current().is_punct(".")) {
        advance();
        if (!current().is(TokenType::Identifier) && !current().is(TokenType::Keyword)) {
          fail("property name");
        }
        const Token& prop = advance();
        NodeId p = ast_.make(NodeKind::Identifier, {prop.begin, prop.end});
        ast_.node(p).text = prop.value;
        NodeId member = ast_.make(NodeKind::MemberExpression);
        ast_.attach(member, expr);
        ast_.attach(member, p);
        finish(member, begin);
        expr = member;
      } else if (current().is_punct("[")) {
        advance();
        NodeId p = parse_assignment();
        expect_punct("]");
        NodeId member = ast_.make(NodeKind::MemberExpression);
        ast_.node(member).flags |= kFlagComputed;
        ast_.attach(member, expr);
        ast_.attach(member, p);
        finish(member, begin);
        expr = member;
      } else if (current().is_punct("(")) {
        NodeId call = ast_.make(NodeKind::CallExpression);
        ast_.attach(call, expr);
        parse_arguments(call);
        finish(call, begin);
        expr = call;
      } else {
        return expr;
      }
    }
  }

  void parse_arguments(NodeId call) {
    expect_punct("(");
    bool first = true;
    while (!current().is_punct(")")) {
      if (!first) expect_punct(",");
      first = false;
      ast_.attach(call, parse_assignment());
    }
    advance();
  }

  NodeId parse_new() {
    uint32_t begin = current().begin;
    advance();  // new
    // The callee is a member chain without calls; `new f()(x)` therefore
    // parses as a call on the construction, matching JS grammar.
    NodeId callee;
    if (current().is_keyword("new")) {
      callee = parse_new();
    } else {
      uint32_t cb = current().begin;
      callee = parse_primary();
      for (;;) {
        if (current().is_punct(".")) {
          advance();
          if (!current().is(TokenType::Identifier) && !current().is(TokenType::Keyword)) {
            fail("property name");
          }
          const Token& prop = advance();
          NodeId p = ast_.make(NodeKind::Identifier, {prop.begin, prop.end});
          ast_.node(p).text = prop.value;
          NodeId member = ast_.make(NodeKind::MemberExpression);
          ast_.attach(member, callee);
          ast_.attach(member, p);
          finish(member, cb);
          callee = member;
        } else if (current().is_punct("[")) {
          advance();
          NodeId p = parse_assignment();
          expect_punct("]");
          NodeId member = ast_.make(NodeKind::MemberExpression);
          ast_.node(member).flags |= kFlagComputed;
          ast_.attach(member, callee);
          ast_.attach(member, p);
          finish(member, cb);
          callee = member;
        } else {
          break;
        }
      }
    }
    NodeId n = ast_.make(NodeKind::NewExpression);
    ast_.attach(n, callee);
    if (current().is_punct("(")) parse_arguments(n);
    finish(n, begin);
    return n;
  }

  // True if tokens starting at the current '(' form an arrow parameter list.
  bool is_arrow_ahead() const {
    size_t i = pos_;
    if (!tokens_[i].is_punct("(")) return false;
    int depth = 0;
    for (; i < tokens_.size(); ++i) {
      if (tokens_[i].is_punct("(")) ++depth;
      if (tokens_[i].is_punct(")")) {
        --depth;
        if (depth == 0) return i + 1 < tokens_.size() && tokens_[i + 1].is_punct("=>");
      }
      if (tokens_[i].is(TokenType::EndOfFile)) return false;
    }
    return false;
  }

  NodeId parse_arrow() {
    uint32_t begin = current().begin;
    NodeId fn = ast_.make(NodeKind::ArrowFunction);
    uint16_t params = 0;
    if (current().is_punct("(")) {
      advance();
      while (!current().is_punct(")")) {
        if (params > 0) expect_punct(",");
        ast_.attach(fn, parse_identifier());
        ++params;
      }
      advance();
    } else {
      ast_.attach(fn, parse_identifier());
      params = 1;
    }
    ast_.node(fn).aux = params;
    expect_punct("=>");
    NodeId body = current().is_punct("{") ? parse_block() : parse_assignment();
    ast_.attach(fn, body);
    finish(fn, begin);
    return fn;
  }

  NodeId parse_object() {
    uint32_t begin = current().begin;
    expect_punct("{");
    NodeId obj = ast_.make(NodeKind::ObjectExpression);
    bool first = true;
    while (!current().is_punct("}")) {
      if (!first) {
        expect_punct(",");
        if (current().is_punct("}")) break;  // trailing comma
      }
      first = false;
      uint32_t pbegin = current().begin;
      NodeId key;
      if (current().is(TokenType::Identifier) || current().is(TokenType::Keyword)) {
        const Token& t = advance();
        key = ast_.make(NodeKind::Identifier, {t.begin, t.end});
        ast_.node(key).text = t.value;
      } else if (current().is(TokenType::String)) {
        const Token& t = advance();
        key = ast_.make(NodeKind::StringLiteral, {t.begin, t.end});
        ast_.node(key).text = t.value;
      } else if (current().is(TokenType::Number)) {
        const Token& t = advance();
        key = ast_.make(NodeKind::NumberLiteral, {t.begin, t.end});
        ast_.node(key).num = t.num;
      } else {
        fail("property key");
      }
      NodeId prop = ast_.make(NodeKind::Property);
      ast_.attach(prop, key);
      if (current().is_punct(":")) {
        advance();
        ast_.attach(prop, parse_assignment());
      } else if (ast_.node(key).kind == NodeKind::Identifier) {
        // Shorthand {a} expands to {a: a}.
        NodeId value = ast_.make(NodeKind::Identifier, ast_.node(key).span);
        ast_.node(value).text = ast_.node(key).text;
        ast_.attach(prop, value);
      } else {
        fail("':'");
      }
      finish(prop, pbegin);
      ast_.attach(obj, prop);
    }
    advance();
    finish(obj, begin);
    return obj;
  }

  NodeId parse_array() {
    uint32_t begin = current().begin;
    expect_punct("[");
    NodeId arr = ast_.make(NodeKind::ArrayExpression);
    bool first = true;
    while (!current().is_punct("]")) {
      if (!first) {
        expect_punct(",");
        if (current().is_punct("]")) break;
      }
      first = false;
      ast_.attach(arr, parse_assignment());
    }
    advance();
    finish(arr, begin);
    return arr;
  }

  NodeId parse_template() {
    const Token t = advance();
    NodeId tpl = ast_.make(NodeKind::TemplateString, {t.begin, t.end});
    for (const TemplateSegment& seg : t.segments) {
      NodeId quasi = ast_.make(NodeKind::StringLiteral);
      ast_.node(quasi).text = seg.quasi;
      ast_.node(quasi).flags |= kFlagQuasi;
      ast_.attach(tpl, quasi);
      if (seg.has_expr) {
        std::string_view sub = std::string_view(source_).substr(seg.expr_begin, seg.expr_end - seg.expr_begin);
        std::vector<Token> sub_tokens = tokenize(sub);
        for (Token& st : sub_tokens) {
          st.begin += seg.expr_begin;
          st.end += seg.expr_begin;
        }
        Parser sub_parser(source_, std::move(sub_tokens), ast_);
        ast_.attach(tpl, sub_parser.parse_lone_expression());
      }
    }
    return tpl;
  }

  NodeId parse_primary() {
    const Token& t = current();
    switch (t.type) {
      case TokenType::Number: {
        advance();
        NodeId n = ast_.make(NodeKind::NumberLiteral, {t.begin, t.end});
        ast_.node(n).num = t.num;
        return n;
      }
      case TokenType::String: {
        advance();
        NodeId n = ast_.make(NodeKind::StringLiteral, {t.begin, t.end});
        ast_.node(n).text = t.value;
        return n;
      }
      case TokenType::TemplateString:
        return parse_template();
      case TokenType::Identifier: {
        if (peek().is_punct("=>")) return parse_arrow();
        return parse_identifier();
      }
      case TokenType::Keyword: {
        if (t.value == "function") return parse_function(NodeKind::FunctionExpression);
        if (t.value == "new") return parse_new();
        if (t.value == "true" || t.value == "false") {
          advance();
          NodeId n = ast_.make(NodeKind::BooleanLiteral, {t.begin, t.end});
          ast_.node(n).num = t.value == "true" ? 1 : 0;
          return n;
        }
        if (t.value == "null") {
          advance();
          return ast_.make(NodeKind::NullLiteral, {t.begin, t.end});
        }
        if (t.value == "this") {
          // Modeled as a plain identifier; good enough for data-flow over the
          // supported subset.
          advance();
          NodeId n = ast_.make(NodeKind::Identifier, {t.begin, t.end});
          ast_.node(n).text = "this";
          return n;
        }
        fail("expression");
      }
      case TokenType::Punct: {
        if (t.value == "(") {
          if (is_arrow_ahead()) return parse_arrow();
          advance();
          NodeId e = parse_assignment();
          expect_punct(")");
          return e;
        }
        if (t.value == "[") return parse_array();
        if (t.value == "{") return parse_object();
        fail("expression");
      }
      case TokenType::EndOfFile:
        fail("expression");
    }
    fail("expression");
  }

  std::string_view source_;
  std::vector<Token> tokens_;
  Ast& ast_;
  size_t pos_ = 0;
};

}  // namespace

Ast parse(std::string_view source) {
  Ast ast;
  Parser parser(source, tokenize(source), ast);
  ast.set_root(parser.parse_program());
  return ast;
}

}  // namespace jwbinder::js
