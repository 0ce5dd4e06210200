#include "jwbinder/js/printer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace jwbinder::js {

namespace {

int binary_level(const std::string& op) {
  if (op == "||") return 3;
  if (op == "&&") return 4;
  if (op == "|") return 5;
  if (op == "^") return 6;
  if (op == "&") return 7;
  if (op == "==" || op == "!=" || op == "===" || op == "!==") return 8;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 9;
  if (op == "<<" || op == ">>" || op == ">>>") return 10;
  if (op == "+" || op == "-") return 11;
  return 12;  // * / %
}

bool valid_utf8(const std::string& s) {
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    size_t extra = c < 0x80 ? 0 : (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xE ? 2 : (c >> 3) == 0x1E ? 3 : 4;
    if (extra == 4) return false;
    if (i + extra >= s.size() && extra > 0) return false;
    for (size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += extra + 1;
  }
  return true;
}

class Printer {
 public:
  explicit Printer(const Ast& ast) : ast_(ast) {}

  std::string run() {
    const Node& program = ast_.node(ast_.root());
    for (NodeId stmt : program.children) statement(stmt, 0);
    return std::move(out_);
  }

  std::string run_expression(NodeId expr) {
    expression(expr, 0, false);
    return std::move(out_);
  }

 private:
  void emit(std::string_view s) { out_ += s; }
  void emit_indent(int depth) { out_.append(static_cast<size_t>(depth) * 2, ' '); }

  void statement(NodeId id, int depth) {
    emit_indent(depth);
    statement_inline(id, depth);
    emit("\n");
  }

  // Statement text without leading indent or trailing newline (so labels can
  // prefix it).
  void statement_inline(NodeId id, int depth) {
    const Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::VariableDeclaration:
        variable_declaration(id);
        emit(";");
        break;
      case NodeKind::AssignStatement:
        expression(id, 0, true);
        emit(";");
        break;
      case NodeKind::ExpressionStatement:
        expression(n.children[0], 0, true);
        emit(";");
        break;
      case NodeKind::FunctionDeclaration:
        function(id, depth);
        break;
      case NodeKind::IfStatement:
        if_statement(id, depth);
        break;
      case NodeKind::ForStatement: {
        emit("for (");
        if (n.children[0] != kNoNode) {
          if (ast_.node(n.children[0]).kind == NodeKind::VariableDeclaration) {
            variable_declaration(n.children[0]);
          } else {
            expression(n.children[0], 0, false);
          }
        }
        emit(";");
        if (n.children[1] != kNoNode) {
          emit(" ");
          expression(n.children[1], 0, false);
        }
        emit(";");
        if (n.children[2] != kNoNode) {
          emit(" ");
          expression(n.children[2], 0, false);
        }
        emit(") ");
        body_block(n.children[3], depth);
        break;
      }
      case NodeKind::WhileStatement:
        emit("while (");
        expression(n.children[0], 0, false);
        emit(") ");
        body_block(n.children[1], depth);
        break;
      case NodeKind::LabeledStatement:
        emit(n.text);
        emit(": ");
        statement_inline(n.children[0], depth);
        break;
      case NodeKind::BreakStatement:
        emit(n.text.empty() ? "break;" : "break " + n.text + ";");
        break;
      case NodeKind::ContinueStatement:
        emit(n.text.empty() ? "continue;" : "continue " + n.text + ";");
        break;
      case NodeKind::ReturnStatement:
        if (n.children.empty()) {
          emit("return;");
        } else {
          emit("return ");
          expression(n.children[0], 0, false);
          emit(";");
        }
        break;
      case NodeKind::ThrowStatement:
        emit("throw ");
        expression(n.children[0], 0, false);
        emit(";");
        break;
      case NodeKind::TryStatement: {
        emit("try ");
        body_block(n.children[0], depth);
        if (n.children[2] != kNoNode) {
          emit(" catch ");
          if (n.children[1] != kNoNode) {
            emit("(");
            expression(n.children[1], 0, false);
            emit(") ");
          }
          body_block(n.children[2], depth);
        }
        if (n.children[3] != kNoNode) {
          emit(" finally ");
          body_block(n.children[3], depth);
        }
        break;
      }
      case NodeKind::BlockStatement:
        body_block(id, depth);
        break;
      case NodeKind::EmptyStatement:
        emit(";");
        break;
      default:
        // Expression node in statement position (defensive for synthesized
        // trees).
        expression(id, 0, true);
        emit(";");
        break;
    }
  }

  void if_statement(NodeId id, int depth) {
    const Node& n = ast_.node(id);
    emit("if (");
    expression(n.children[0], 0, false);
    emit(") ");
    body_block(n.children[1], depth);
    if (n.children.size() > 2 && n.children[2] != kNoNode) {
      emit(" else ");
      const Node& alt = ast_.node(n.children[2]);
      if (alt.kind == NodeKind::IfStatement) {
        if_statement(n.children[2], depth);
      } else {
        body_block(n.children[2], depth);
      }
    }
  }

  void body_block(NodeId id, int depth) {
    const Node& n = ast_.node(id);
    if (n.kind != NodeKind::BlockStatement) {
      emit("{\n");
      statement(id, depth + 1);
      emit_indent(depth);
      emit("}");
      return;
    }
    if (n.children.empty()) {
      emit("{}");
      return;
    }
    emit("{\n");
    for (NodeId stmt : n.children) statement(stmt, depth + 1);
    emit_indent(depth);
    emit("}");
  }

  void variable_declaration(NodeId id) {
    const Node& n = ast_.node(id);
    switch (static_cast<DeclKind>(n.aux)) {
      case DeclKind::Var: emit("var "); break;
      case DeclKind::Let: emit("let "); break;
      case DeclKind::Const: emit("const "); break;
    }
    bool first = true;
    for (NodeId d : n.children) {
      if (!first) emit(", ");
      first = false;
      const Node& declarator = ast_.node(d);
      expression(declarator.children[0], 0, false);
      if (declarator.children.size() > 1) {
        emit(" = ");
        expression(declarator.children[1], 0, false);
      }
    }
  }

  void function(NodeId id, int depth) {
    const Node& n = ast_.node(id);
    NodeId name = n.children[0];
    emit(name != kNoNode ? "function " + ast_.node(name).text : "function ");
    emit("(");
    for (uint16_t i = 0; i < n.aux; ++i) {
      if (i > 0) emit(", ");
      emit(ast_.node(n.children[1 + static_cast<size_t>(i)]).text);
    }
    emit(") ");
    body_block(n.children.back(), depth);
  }

  void maybe_paren(NodeId id, int min_level, int level, bool stmt_start, auto&& inner) {
    bool parens = level < min_level;
    if (parens) emit("(");
    inner();
    if (parens) emit(")");
    (void)id;
    (void)stmt_start;
  }

  // `min_level` is the loosest operator level printable without parentheses;
  // `stmt_start` marks the leftmost position of an expression statement so
  // function/object literals there get wrapped.
  void expression(NodeId id, int min_level, bool stmt_start, int depth = 0) {
    const Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::Identifier:
        emit(n.text);
        break;
      case NodeKind::NumberLiteral:
        emit(format_number(n.num));
        break;
      case NodeKind::StringLiteral:
        string_literal(n.text);
        break;
      case NodeKind::BooleanLiteral:
        emit(n.num != 0 ? "true" : "false");
        break;
      case NodeKind::NullLiteral:
        emit("null");
        break;
      case NodeKind::AssignStatement: {
        maybe_paren(id, min_level, 1, stmt_start, [&] {
          expression(n.children[0], 15, stmt_start, depth);
          emit(" " + n.text + " ");
          expression(n.children[1], 1, false, depth);
        });
        break;
      }
      case NodeKind::ConditionalExpression:
        maybe_paren(id, min_level, 2, stmt_start, [&] {
          expression(n.children[0], 3, stmt_start, depth);
          emit(" ? ");
          expression(n.children[1], 1, false, depth);
          emit(" : ");
          expression(n.children[2], 1, false, depth);
        });
        break;
      case NodeKind::BinaryExpression: {
        int level = binary_level(n.text);
        maybe_paren(id, min_level, level, stmt_start, [&] {
          expression(n.children[0], level, stmt_start, depth);
          emit(" " + n.text + " ");
          expression(n.children[1], level + 1, false, depth);
        });
        break;
      }
      case NodeKind::UnaryExpression:
        maybe_paren(id, min_level, 13, stmt_start, [&] {
          bool word = n.text == "typeof" || n.text == "void" || n.text == "delete";
          emit(n.text);
          if (word) emit(" ");
          size_t mark = out_.size();
          expression(n.children[0], 13, false, depth);
          // Avoid gluing sign operators into -- or ++.
          if (!word && out_.size() > mark && out_[mark] == n.text[0] &&
              (n.text == "-" || n.text == "+")) {
            out_.insert(mark, " ");
          }
        });
        break;
      case NodeKind::UpdateExpression:
        if (n.flags & kFlagPrefix) {
          maybe_paren(id, min_level, 13, stmt_start, [&] {
            emit(n.text);
            expression(n.children[0], 13, false, depth);
          });
        } else {
          maybe_paren(id, min_level, 14, stmt_start, [&] {
            expression(n.children[0], 15, stmt_start, depth);
            emit(n.text);
          });
        }
        break;
      case NodeKind::MemberExpression:
        maybe_paren(id, min_level, 15, stmt_start, [&] {
          const Node& object = ast_.node(n.children[0]);
          bool object_parens = object.kind == NodeKind::NumberLiteral && !(n.flags & kFlagComputed);
          if (object_parens) emit("(");
          expression(n.children[0], 15, stmt_start, depth);
          if (object_parens) emit(")");
          if (n.flags & kFlagComputed) {
            emit("[");
            expression(n.children[1], 0, false, depth);
            emit("]");
          } else {
            emit(".");
            emit(ast_.node(n.children[1]).text);
          }
        });
        break;
      case NodeKind::CallExpression:
        maybe_paren(id, min_level, 15, stmt_start, [&] {
          expression(n.children[0], 15, stmt_start, depth);
          arguments(n, 1, depth);
        });
        break;
      case NodeKind::NewExpression:
        maybe_paren(id, min_level, 15, stmt_start, [&] {
          emit("new ");
          const Node& callee = ast_.node(n.children[0]);
          bool callee_parens = callee.kind == NodeKind::CallExpression;
          if (callee_parens) emit("(");
          expression(n.children[0], 15, false, depth);
          if (callee_parens) emit(")");
          arguments(n, 1, depth);
        });
        break;
      case NodeKind::ArrayExpression: {
        emit("[");
        bool first = true;
        for (NodeId e : n.children) {
          if (!first) emit(", ");
          first = false;
          expression(e, 1, false, depth);
        }
        emit("]");
        break;
      }
      case NodeKind::ObjectExpression: {
        bool parens = stmt_start;
        if (parens) emit("(");
        if (n.children.empty()) {
          emit("{}");
        } else {
          emit("{ ");
          bool first = true;
          for (NodeId p : n.children) {
            if (!first) emit(", ");
            first = false;
            const Node& prop = ast_.node(p);
            const Node& key = ast_.node(prop.children[0]);
            if (key.kind == NodeKind::Identifier) {
              emit(key.text);
            } else if (key.kind == NodeKind::StringLiteral) {
              string_literal(key.text);
            } else {
              emit(format_number(key.num));
            }
            emit(": ");
            expression(prop.children[1], 1, false, depth);
          }
          emit(" }");
        }
        if (parens) emit(")");
        break;
      }
      case NodeKind::FunctionExpression: {
        bool parens = stmt_start;
        if (parens) emit("(");
        function(id, depth);
        if (parens) emit(")");
        break;
      }
      case NodeKind::ArrowFunction: {
        maybe_paren(id, min_level, 1, stmt_start, [&] {
          emit("(");
          for (uint16_t i = 0; i < n.aux; ++i) {
            if (i > 0) emit(", ");
            emit(ast_.node(n.children[static_cast<size_t>(i)]).text);
          }
          emit(") => ");
          NodeId body = n.children.back();
          if (ast_.node(body).kind == NodeKind::BlockStatement) {
            body_block(body, depth);
          } else if (ast_.node(body).kind == NodeKind::ObjectExpression) {
            emit("(");
            expression(body, 1, false, depth);
            emit(")");
          } else {
            expression(body, 1, false, depth);
          }
        });
        break;
      }
      case NodeKind::TemplateString: {
        emit("`");
        for (NodeId c : n.children) {
          const Node& chunk = ast_.node(c);
          if (chunk.kind == NodeKind::StringLiteral && (chunk.flags & kFlagQuasi)) {
            template_chunk(chunk.text);
          } else {
            emit("${");
            expression(c, 0, false, depth);
            emit("}");
          }
        }
        emit("`");
        break;
      }
      default:
        // Statement kinds never appear in expression positions.
        emit("/*?*/");
        break;
    }
  }

  void arguments(const Node& n, size_t from, int depth) {
    emit("(");
    for (size_t i = from; i < n.children.size(); ++i) {
      if (i > from) emit(", ");
      expression(n.children[i], 1, false, depth);
    }
    emit(")");
  }

  void string_literal(const std::string& value) {
    bool utf8 = valid_utf8(value);
    emit("\"");
    for (unsigned char c : value) {
      switch (c) {
        case '"': emit("\\\""); break;
        case '\\': emit("\\\\"); break;
        case '\n': emit("\\n"); break;
        case '\r': emit("\\r"); break;
        case '\t': emit("\\t"); break;
        case '\b': emit("\\b"); break;
        case '\f': emit("\\f"); break;
        case '\v': emit("\\v"); break;
        default:
          if (c < 0x20 || c == 0x7F || (c >= 0x80 && !utf8)) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02X", c);
            emit(buf);
          } else {
            out_ += static_cast<char>(c);
          }
      }
    }
    emit("\"");
  }

  void template_chunk(const std::string& value) {
    bool utf8 = valid_utf8(value);
    for (size_t i = 0; i < value.size(); ++i) {
      unsigned char c = static_cast<unsigned char>(value[i]);
      if (c == '`' || c == '\\') {
        out_ += '\\';
        out_ += static_cast<char>(c);
      } else if (c == '$' && i + 1 < value.size() && value[i + 1] == '{') {
        emit("\\$");
      } else if (c < 0x20 && c != '\n' && c != '\t') {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02X", c);
        emit(buf);
      } else if (c >= 0x80 && !utf8) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "\\x%02X", c);
        emit(buf);
      } else {
        out_ += static_cast<char>(c);
      }
    }
  }

  const Ast& ast_;
  std::string out_;
};

}  // namespace

std::string format_number(double value) {
  if (value == 0) return "0";
  if (std::isnan(value)) return "NaN";
  if (std::isinf(value)) return value > 0 ? "Infinity" : "-Infinity";
  char buf[40];
  auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

std::string print(const Ast& ast) { return Printer(ast).run(); }

std::string print_expression(const Ast& ast, NodeId expr) {
  return Printer(ast).run_expression(expr);
}

}  // namespace jwbinder::js
