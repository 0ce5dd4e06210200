#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace jwbinder::js {

using NodeId = uint32_t;
inline constexpr NodeId kNoNode = 0xFFFFFFFFu;

enum class NodeKind : uint8_t {
  Program,
  VariableDeclaration,
  VariableDeclarator,
  AssignStatement,
  FunctionDeclaration,
  FunctionExpression,
  ArrowFunction,
  CallExpression,
  NewExpression,
  MemberExpression,
  Identifier,
  NumberLiteral,
  StringLiteral,
  BooleanLiteral,
  NullLiteral,
  ArrayExpression,
  ObjectExpression,
  Property,
  TemplateString,
  BinaryExpression,
  UnaryExpression,
  UpdateExpression,
  ConditionalExpression,
  IfStatement,
  ForStatement,
  WhileStatement,
  LabeledStatement,
  BreakStatement,
  ContinueStatement,
  ReturnStatement,
  ThrowStatement,
  TryStatement,
  BlockStatement,
  ExpressionStatement,
  EmptyStatement,
};

const char* node_kind_name(NodeKind kind);

struct Span {
  uint32_t begin = 0;
  uint32_t end = 0;
};

// Node flags.
inline constexpr uint8_t kFlagComputed = 1;  // member access a[b]
inline constexpr uint8_t kFlagPrefix = 2;    // ++x rather than x++
inline constexpr uint8_t kFlagQuasi = 4;     // template-string text chunk

enum class DeclKind : uint8_t { Var, Let, Const };

// One AST node. Children are slots into the owning Ast arena; the meaning of
// each slot depends on the kind:
//
//   Program, BlockStatement      statements...
//   VariableDeclaration          declarators... (aux = DeclKind)
//   VariableDeclarator           [id, init?]
//   AssignStatement              [target, value], text = operator
//   FunctionDeclaration          [name, params..., body], aux = param count
//   FunctionExpression           [name | kNoNode, params..., body], aux = param count
//   ArrowFunction                [params..., body], aux = param count
//   CallExpression/NewExpression [callee, args...]
//   MemberExpression             [object, property] (kFlagComputed for a[b])
//   Property                     [key, value]
//   BinaryExpression             [left, right], text = operator
//   UnaryExpression              [argument], text = operator
//   UpdateExpression             [argument], text = operator, kFlagPrefix
//   ConditionalExpression        [test, consequent, alternate]
//   IfStatement                  [test, consequent, alternate?]
//   ForStatement                 [init | kNoNode, test | kNoNode, update | kNoNode, body]
//   WhileStatement               [test, body]
//   LabeledStatement             [body], text = label
//   Break/ContinueStatement      no children, text = label ("" if none)
//   ReturnStatement              [argument?]
//   ThrowStatement               [argument]
//   TryStatement                 [block, param | kNoNode, handler | kNoNode, finalizer | kNoNode]
//   ExpressionStatement          [expression]
//   TemplateString               chunks... (quasi chunks are StringLiteral + kFlagQuasi)
//   ArrayExpression              elements...
//   ObjectExpression             properties...
//
// Identifier carries its lexeme in `text`; StringLiteral its decoded value;
// NumberLiteral its value in `num`; BooleanLiteral 0/1 in `num`.
struct Node {
  NodeKind kind = NodeKind::Program;
  uint8_t flags = 0;
  uint16_t aux = 0;
  Span span;
  NodeId parent = kNoNode;
  double num = 0.0;
  std::string text;
  std::vector<NodeId> children;

  bool is_literal() const {
    return kind == NodeKind::NumberLiteral || kind == NodeKind::StringLiteral ||
           kind == NodeKind::BooleanLiteral || kind == NodeKind::NullLiteral;
  }
};

// Arena-backed syntax tree. Ids are stable for the lifetime of the Ast, which
// is what the dependency-graph layers hang their edges on.
class Ast {
 public:
  NodeId make(NodeKind kind, Span span = {}) {
    nodes_.push_back(Node{});
    nodes_.back().kind = kind;
    nodes_.back().span = span;
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  Node& node(NodeId id) { return nodes_[id]; }
  const Node& node(NodeId id) const { return nodes_[id]; }

  NodeId root() const { return root_; }
  void set_root(NodeId id) { root_ = id; }
  size_t size() const { return nodes_.size(); }

  // Appends `child` to `parent`'s slot list. kNoNode is recorded as an empty
  // slot and left parentless.
  void attach(NodeId parent, NodeId child) {
    nodes_[parent].children.push_back(child);
    if (child != kNoNode) nodes_[child].parent = parent;
  }

  // Deep-copies a subtree (possibly from another Ast) and returns the new
  // root id, unattached.
  NodeId clone_from(const Ast& src, NodeId src_id);

  // Replaces `old_child` inside `parent`'s slots with `new_child`.
  void replace_child(NodeId parent, NodeId old_child, NodeId new_child);

  template <typename Fn>
  void for_each_node(Fn&& fn) const {
    for (NodeId i = 0; i < nodes_.size(); ++i) fn(i, nodes_[i]);
  }

 private:
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
};

// Structural equality ignoring spans (and node identity).
bool structurally_equal(const Ast& a, NodeId an, const Ast& b, NodeId bn);
inline bool structurally_equal(const Ast& a, const Ast& b) {
  return structurally_equal(a, a.root(), b, b.root());
}

// True for nodes that occupy a statement position.
bool is_statement_kind(NodeKind kind);

}  // namespace jwbinder::js
