#include "jwbinder/js/ast.hpp"

namespace jwbinder::js {

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Program: return "Program";
    case NodeKind::VariableDeclaration: return "VariableDeclaration";
    case NodeKind::VariableDeclarator: return "VariableDeclarator";
    case NodeKind::AssignStatement: return "AssignStatement";
    case NodeKind::FunctionDeclaration: return "FunctionDeclaration";
    case NodeKind::FunctionExpression: return "FunctionExpression";
    case NodeKind::ArrowFunction: return "ArrowFunction";
    case NodeKind::CallExpression: return "CallExpression";
    case NodeKind::NewExpression: return "NewExpression";
    case NodeKind::MemberExpression: return "MemberExpression";
    case NodeKind::Identifier: return "Identifier";
    case NodeKind::NumberLiteral: return "NumberLiteral";
    case NodeKind::StringLiteral: return "StringLiteral";
    case NodeKind::BooleanLiteral: return "BooleanLiteral";
    case NodeKind::NullLiteral: return "NullLiteral";
    case NodeKind::ArrayExpression: return "ArrayExpression";
    case NodeKind::ObjectExpression: return "ObjectExpression";
    case NodeKind::Property: return "Property";
    case NodeKind::TemplateString: return "TemplateString";
    case NodeKind::BinaryExpression: return "BinaryExpression";
    case NodeKind::UnaryExpression: return "UnaryExpression";
    case NodeKind::UpdateExpression: return "UpdateExpression";
    case NodeKind::ConditionalExpression: return "ConditionalExpression";
    case NodeKind::IfStatement: return "IfStatement";
    case NodeKind::ForStatement: return "ForStatement";
    case NodeKind::WhileStatement: return "WhileStatement";
    case NodeKind::LabeledStatement: return "LabeledStatement";
    case NodeKind::BreakStatement: return "BreakStatement";
    case NodeKind::ContinueStatement: return "ContinueStatement";
    case NodeKind::ReturnStatement: return "ReturnStatement";
    case NodeKind::ThrowStatement: return "ThrowStatement";
    case NodeKind::TryStatement: return "TryStatement";
    case NodeKind::BlockStatement: return "BlockStatement";
    case NodeKind::ExpressionStatement: return "ExpressionStatement";
    case NodeKind::EmptyStatement: return "EmptyStatement";
  }
  return "?";
}

NodeId Ast::clone_from(const Ast& src, NodeId src_id) {
  if (src_id == kNoNode) return kNoNode;
  // Copied by value: self-clones reallocate the arena under references.
  Node snapshot = src.node(src_id);
  NodeId id = make(snapshot.kind, snapshot.span);
  {
    Node& n = node(id);
    n.flags = snapshot.flags;
    n.aux = snapshot.aux;
    n.num = snapshot.num;
    n.text = snapshot.text;
  }
  for (NodeId child : snapshot.children) {
    attach(id, clone_from(src, child));
  }
  return id;
}

void Ast::replace_child(NodeId parent, NodeId old_child, NodeId new_child) {
  for (NodeId& slot : nodes_[parent].children) {
    if (slot == old_child) {
      slot = new_child;
      if (new_child != kNoNode) nodes_[new_child].parent = parent;
      return;
    }
  }
}

bool structurally_equal(const Ast& a, NodeId an, const Ast& b, NodeId bn) {
  if (an == kNoNode || bn == kNoNode) return an == bn;
  const Node& x = a.node(an);
  const Node& y = b.node(bn);
  if (x.kind != y.kind || x.flags != y.flags || x.aux != y.aux) return false;
  if (x.text != y.text) return false;
  if (x.num != y.num && !(x.num != x.num && y.num != y.num)) return false;
  if (x.children.size() != y.children.size()) return false;
  for (size_t i = 0; i < x.children.size(); ++i) {
    if (!structurally_equal(a, x.children[i], b, y.children[i])) return false;
  }
  return true;
}

bool is_statement_kind(NodeKind kind) {
  switch (kind) {
    case NodeKind::VariableDeclaration:
    case NodeKind::AssignStatement:
    case NodeKind::FunctionDeclaration:
    case NodeKind::IfStatement:
    case NodeKind::ForStatement:
    case NodeKind::WhileStatement:
    case NodeKind::LabeledStatement:
    case NodeKind::BreakStatement:
    case NodeKind::ContinueStatement:
    case NodeKind::ReturnStatement:
    case NodeKind::ThrowStatement:
    case NodeKind::TryStatement:
    case NodeKind::BlockStatement:
    case NodeKind::ExpressionStatement:
    case NodeKind::EmptyStatement:
      return true;
    default:
      return false;
  }
}

}  // namespace jwbinder::js
