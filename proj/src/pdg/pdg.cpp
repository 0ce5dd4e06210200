#include "jwbinder/pdg/pdg.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace jwbinder::pdg {

using js::Ast;
using js::kNoNode;
using js::Node;
using js::NodeId;
using js::NodeKind;

namespace {

const std::unordered_set<std::string>& known_globals() {
  static const std::unordered_set<std::string> globals = {
      "WebAssembly", "document", "window", "fetch", "atob", "btoa", "console",
      "Math", "JSON", "Promise", "Uint8Array", "Int8Array", "Uint16Array",
      "Uint32Array", "ArrayBuffer", "DataView", "XMLHttpRequest", "String",
      "Number", "Boolean", "Array", "Object", "Function", "parseInt",
      "parseFloat", "isNaN", "undefined", "NaN", "Infinity", "Response",
      "TextEncoder", "TextDecoder", "eval", "this", "location", "navigator",
      "setTimeout", "setInterval", "Error", "RegExp", "Date", "escape",
      "unescape", "encodeURIComponent", "decodeURIComponent", "globalThis",
  };
  return globals;
}

struct Binding {
  std::string name;
  std::vector<NodeId> defs;
  std::vector<NodeId> uses;
  bool synthetic = false;
};

struct Scope {
  int parent = -1;
  bool is_function = false;
  std::map<std::string, size_t> bindings;  // name -> index into bindings_
};

bool is_function_kind(NodeKind k) {
  return k == NodeKind::FunctionDeclaration || k == NodeKind::FunctionExpression ||
         k == NodeKind::ArrowFunction;
}

class Builder {
 public:
  explicit Builder(const Ast& ast) : ast_(ast) {}

  void run() {
    root_scope_ = new_scope(-1, true);
    collect(ast_.root(), root_scope_);
    resolve(ast_.root(), root_scope_);
    make_data_edges();
    make_promise_edges();
    make_control_edges(ast_.root());
    collect_names();
  }

  std::vector<DataEdge> data_edges;
  std::vector<ControlEdge> control_edges;
  std::unordered_set<std::string> names;
  std::vector<std::string> synthetic_globals;

 private:
  // ---- scope construction (pass 1) ----

  int new_scope(int parent, bool is_function) {
    scopes_.push_back(Scope{parent, is_function, {}});
    return static_cast<int>(scopes_.size()) - 1;
  }

  int nearest_function_scope(int scope) const {
    while (!scopes_[scope].is_function) scope = scopes_[scope].parent;
    return scope;
  }

  size_t declare(int scope, const std::string& name, NodeId def_node, bool synthetic = false) {
    auto it = scopes_[scope].bindings.find(name);
    size_t index;
    if (it == scopes_[scope].bindings.end()) {
      bindings_.push_back(Binding{name, {}, {}, synthetic});
      index = bindings_.size() - 1;
      scopes_[scope].bindings.emplace(name, index);
    } else {
      index = it->second;
    }
    if (def_node != kNoNode) bindings_[index].defs.push_back(def_node);
    return index;
  }

  // Registers declarations; remembers the scope assigned to each
  // scope-introducing node so the resolve pass can replay it.
  void collect(NodeId id, int scope) {
    if (id == kNoNode) return;
    const Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::VariableDeclaration: {
        bool is_var = static_cast<js::DeclKind>(n.aux) == js::DeclKind::Var;
        int target = is_var ? nearest_function_scope(scope) : scope;
        for (NodeId d : n.children) {
          const Node& declarator = ast_.node(d);
          declare(target, ast_.node(declarator.children[0]).text, declarator.children[0]);
          if (declarator.children.size() > 1) collect(declarator.children[1], scope);
        }
        return;
      }
      case NodeKind::FunctionDeclaration: {
        declare(nearest_function_scope(scope), ast_.node(n.children[0]).text, n.children[0]);
        int fn_scope = new_scope(scope, true);
        scope_of_[id] = fn_scope;
        for (uint16_t i = 0; i < n.aux; ++i) {
          NodeId param = n.children[1 + static_cast<size_t>(i)];
          declare(fn_scope, ast_.node(param).text, param);
        }
        collect(n.children.back(), fn_scope);
        return;
      }
      case NodeKind::FunctionExpression: {
        int fn_scope = new_scope(scope, true);
        scope_of_[id] = fn_scope;
        if (n.children[0] != kNoNode) {
          declare(fn_scope, ast_.node(n.children[0]).text, n.children[0]);
        }
        for (uint16_t i = 0; i < n.aux; ++i) {
          NodeId param = n.children[1 + static_cast<size_t>(i)];
          declare(fn_scope, ast_.node(param).text, param);
        }
        collect(n.children.back(), fn_scope);
        return;
      }
      case NodeKind::ArrowFunction: {
        int fn_scope = new_scope(scope, true);
        scope_of_[id] = fn_scope;
        for (uint16_t i = 0; i < n.aux; ++i) {
          NodeId param = n.children[static_cast<size_t>(i)];
          declare(fn_scope, ast_.node(param).text, param);
        }
        collect(n.children.back(), fn_scope);
        return;
      }
      case NodeKind::BlockStatement:
      case NodeKind::ForStatement: {
        int block_scope = new_scope(scope, false);
        scope_of_[id] = block_scope;
        for (NodeId c : n.children) collect(c, block_scope);
        return;
      }
      case NodeKind::TryStatement: {
        collect(n.children[0], scope);
        if (n.children[2] != kNoNode) {
          // One scope for the handler block including the catch parameter.
          int handler_scope = new_scope(scope, false);
          scope_of_[n.children[2]] = handler_scope;
          if (n.children[1] != kNoNode) {
            declare(handler_scope, ast_.node(n.children[1]).text, n.children[1]);
          }
          for (NodeId c : ast_.node(n.children[2]).children) collect(c, handler_scope);
        }
        if (n.children[3] != kNoNode) collect(n.children[3], scope);
        return;
      }
      default:
        for (NodeId c : n.children) collect(c, scope);
        return;
    }
  }

  // ---- use/def resolution (pass 2) ----

  size_t resolve_name(int scope, const std::string& name) {
    for (int s = scope; s != -1; s = scopes_[s].parent) {
      auto it = scopes_[s].bindings.find(name);
      if (it != scopes_[s].bindings.end()) return it->second;
    }
    bool known = known_globals().count(name) > 0;
    size_t index = declare(root_scope_, name, kNoNode, !known);
    if (!known) unresolved_.push_back(name);
    return index;
  }

  void record_use(NodeId id, int scope) {
    const std::string& name = ast_.node(id).text;
    size_t b = resolve_name(scope, name);
    bindings_[b].uses.push_back(id);
    binding_of_[id] = b;
  }

  void record_def(NodeId id, int scope, bool also_use) {
    const std::string& name = ast_.node(id).text;
    size_t b = resolve_name(scope, name);
    bindings_[b].defs.push_back(id);
    if (also_use) bindings_[b].uses.push_back(id);
    binding_of_[id] = b;
  }

  // The innermost object identifier of a member chain, if any.
  NodeId member_base(NodeId id) const {
    const Node* n = &ast_.node(id);
    while (n->kind == NodeKind::MemberExpression) {
      id = n->children[0];
      n = &ast_.node(id);
    }
    return n->kind == NodeKind::Identifier ? id : kNoNode;
  }

  void resolve_member_target(NodeId member, int scope) {
    const Node& m = ast_.node(member);
    NodeId base = member_base(member);
    // Writing through a member mutates the base object: def + use.
    if (base != kNoNode) record_def(base, scope, true);
    // Computed property expressions and intermediate computed links are
    // ordinary reads.
    NodeId cur = member;
    while (ast_.node(cur).kind == NodeKind::MemberExpression) {
      const Node& cn = ast_.node(cur);
      if (cn.flags & js::kFlagComputed) resolve(cn.children[1], scope);
      cur = cn.children[0];
    }
    if (ast_.node(cur).kind != NodeKind::Identifier) resolve(cur, scope);
    (void)m;
  }

  void resolve(NodeId id, int scope) {
    if (id == kNoNode) return;
    const Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::Identifier:
        record_use(id, scope);
        return;
      case NodeKind::VariableDeclaration:
        for (NodeId d : n.children) {
          const Node& declarator = ast_.node(d);
          // Keep the binding index on the declarator id for queries.
          binding_of_[declarator.children[0]] =
              resolve_name(scope, ast_.node(declarator.children[0]).text);
          if (declarator.children.size() > 1) resolve(declarator.children[1], scope);
        }
        return;
      case NodeKind::AssignStatement: {
        NodeId target = n.children[0];
        if (ast_.node(target).kind == NodeKind::Identifier) {
          record_def(target, scope, n.text != "=");
        } else {
          resolve_member_target(target, scope);
        }
        resolve(n.children[1], scope);
        return;
      }
      case NodeKind::UpdateExpression: {
        NodeId target = n.children[0];
        if (ast_.node(target).kind == NodeKind::Identifier) {
          record_def(target, scope, true);
        } else {
          resolve_member_target(target, scope);
        }
        return;
      }
      case NodeKind::MemberExpression:
        resolve(n.children[0], scope);
        if (n.flags & js::kFlagComputed) resolve(n.children[1], scope);
        return;
      case NodeKind::Property:
        resolve(n.children[1], scope);
        return;
      case NodeKind::FunctionDeclaration:
      case NodeKind::FunctionExpression:
      case NodeKind::ArrowFunction: {
        int fn_scope = scope_of_.at(id);
        // Parameter binding indices for later queries.
        size_t first = n.kind == NodeKind::ArrowFunction ? 0 : 1;
        for (uint16_t i = 0; i < n.aux; ++i) {
          NodeId param = n.children[first + static_cast<size_t>(i)];
          binding_of_[param] = resolve_name(fn_scope, ast_.node(param).text);
        }
        resolve(n.children.back(), fn_scope);
        return;
      }
      case NodeKind::BlockStatement:
      case NodeKind::ForStatement: {
        auto it = scope_of_.find(id);
        int inner = it == scope_of_.end() ? scope : it->second;
        for (NodeId c : n.children) resolve(c, inner);
        return;
      }
      case NodeKind::TryStatement:
        resolve(n.children[0], scope);
        if (n.children[2] != kNoNode) resolve(n.children[2], scope);
        if (n.children[3] != kNoNode) resolve(n.children[3], scope);
        return;
      default:
        for (NodeId c : n.children) resolve(c, scope);
        return;
    }
  }

  // ---- edges ----

  void make_data_edges() {
    for (const Binding& b : bindings_) {
      for (NodeId def : b.defs) {
        for (NodeId use : b.uses) {
          if (def == use) continue;
          data_edges.push_back({def, use, b.name});
        }
      }
    }
  }

  // Resolves whether a promise expression chains back to a known async FFI
  // call (WebAssembly.instantiate and friends, fetch).
  bool is_async_ffi_root(NodeId expr, int depth = 0) const {
    if (expr == kNoNode || depth > 8) return false;
    const Node& n = ast_.node(expr);
    if (n.kind == NodeKind::CallExpression) {
      const Node& callee = ast_.node(n.children[0]);
      if (callee.kind == NodeKind::Identifier && callee.text == "fetch") return true;
      if (callee.kind == NodeKind::MemberExpression) {
        const Node& prop = ast_.node(callee.children[1]);
        const Node& obj = ast_.node(callee.children[0]);
        if (!(callee.flags & js::kFlagComputed)) {
          if (obj.kind == NodeKind::Identifier && obj.text == "WebAssembly" &&
              (prop.text == "instantiate" || prop.text == "instantiateStreaming" ||
               prop.text == "compile" || prop.text == "compileStreaming")) {
            return true;
          }
          // Chained .then: the root decides.
          if (prop.text == "then" || prop.text == "catch") {
            return is_async_ffi_root(callee.children[0], depth + 1);
          }
        }
      }
      return false;
    }
    if (n.kind == NodeKind::Identifier) {
      auto it = binding_of_.find(expr);
      if (it == binding_of_.end()) return false;
      for (NodeId def : bindings_[it->second].defs) {
        NodeId value = def_value(def);
        if (value != kNoNode && is_async_ffi_root(value, depth + 1)) return true;
      }
    }
    return false;
  }

  // The initializing/assigned expression behind a definition occurrence.
  NodeId def_value(NodeId def) const {
    const Node& d = ast_.node(def);
    if (d.parent == kNoNode) return kNoNode;
    const Node& p = ast_.node(d.parent);
    if (p.kind == NodeKind::VariableDeclarator && p.children[0] == def &&
        p.children.size() > 1) {
      return p.children[1];
    }
    if (p.kind == NodeKind::AssignStatement && p.children[0] == def) return p.children[1];
    return kNoNode;
  }

  void make_promise_edges() {
    ast_.for_each_node([&](NodeId, const Node& n) {
      if (n.kind != NodeKind::CallExpression || n.children.size() < 2) return;
      const Node& callee = ast_.node(n.children[0]);
      if (callee.kind != NodeKind::MemberExpression || (callee.flags & js::kFlagComputed)) return;
      if (ast_.node(callee.children[1]).text != "then") return;
      NodeId base = callee.children[0];
      if (!is_async_ffi_root(base)) return;
      NodeId cb = n.children[1];
      const Node* cbn = &ast_.node(cb);
      if (cbn->kind == NodeKind::Identifier) {
        auto it = binding_of_.find(cb);
        if (it == binding_of_.end()) return;
        for (NodeId def : bindings_[it->second].defs) {
          NodeId value = def_value(def);
          if (value == kNoNode && ast_.node(def).parent != kNoNode &&
              is_function_kind(ast_.node(ast_.node(def).parent).kind)) {
            value = ast_.node(def).parent;  // hoisted function declaration
          }
          if (value != kNoNode && is_function_kind(ast_.node(value).kind)) {
            cb = value;
            cbn = &ast_.node(cb);
            break;
          }
        }
      }
      if (!is_function_kind(cbn->kind) || cbn->aux == 0) return;
      size_t first = cbn->kind == NodeKind::ArrowFunction ? 0 : 1;
      NodeId param = cbn->children[first];
      data_edges.push_back({base, param, ast_.node(param).text});
    });
  }

  void add_branch_edges(NodeId from, NodeId block, ControlLabel label) {
    if (block == kNoNode) return;
    const Node& b = ast_.node(block);
    if (b.kind != NodeKind::BlockStatement) {
      control_edges.push_back({from, control_target(block), label});
      return;
    }
    for (NodeId stmt : b.children) {
      control_edges.push_back({from, control_target(stmt), label});
    }
  }

  // Expression statements are represented by their expression, matching how
  // call sites are marked.
  NodeId control_target(NodeId stmt) const {
    const Node& n = ast_.node(stmt);
    if (n.kind == NodeKind::ExpressionStatement) return n.children[0];
    return stmt;
  }

  void make_control_edges(NodeId id) {
    if (id == kNoNode) return;
    const Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::IfStatement:
        add_branch_edges(n.children[0], n.children[1], ControlLabel::True);
        if (n.children.size() > 2) {
          add_branch_edges(n.children[0], n.children[2], ControlLabel::False);
        }
        break;
      case NodeKind::WhileStatement:
        add_branch_edges(n.children[0], n.children[1], ControlLabel::True);
        break;
      case NodeKind::ForStatement:
        if (n.children[1] != kNoNode) {
          add_branch_edges(n.children[1], n.children[3], ControlLabel::True);
        } else {
          add_branch_edges(id, n.children[3], ControlLabel::Uncond);
        }
        break;
      case NodeKind::ConditionalExpression:
        control_edges.push_back({n.children[0], n.children[1], ControlLabel::True});
        control_edges.push_back({n.children[0], n.children[2], ControlLabel::False});
        break;
      case NodeKind::Program:
      case NodeKind::LabeledStatement:
        for (NodeId c : n.children) {
          if (c != kNoNode) control_edges.push_back({id, control_target(c), ControlLabel::Uncond});
        }
        break;
      case NodeKind::FunctionDeclaration:
      case NodeKind::FunctionExpression:
      case NodeKind::ArrowFunction: {
        NodeId body = n.children.back();
        add_branch_edges(id, body, ControlLabel::Uncond);
        break;
      }
      default:
        break;
    }
    for (NodeId c : n.children) make_control_edges(c);
  }

  void collect_names() {
    ast_.for_each_node([&](NodeId, const Node& n) {
      if (n.kind == NodeKind::Identifier) names.insert(n.text);
      if ((n.kind == NodeKind::LabeledStatement || n.kind == NodeKind::BreakStatement ||
           n.kind == NodeKind::ContinueStatement) &&
          !n.text.empty()) {
        names.insert(n.text);
      }
    });
    std::sort(unresolved_.begin(), unresolved_.end());
    unresolved_.erase(std::unique(unresolved_.begin(), unresolved_.end()), unresolved_.end());
    synthetic_globals = std::move(unresolved_);
  }

  const Ast& ast_;
  std::vector<Scope> scopes_;
  std::vector<Binding> bindings_;
  std::unordered_map<NodeId, int> scope_of_;
  std::unordered_map<NodeId, size_t> binding_of_;
  std::vector<std::string> unresolved_;
  int root_scope_ = 0;
};

}  // namespace

Pdg build_pdg(const js::Ast& ast) {
  Pdg pdg(ast);
  Builder builder(ast);
  builder.run();
  std::sort(builder.data_edges.begin(), builder.data_edges.end(),
            [](const DataEdge& a, const DataEdge& b) {
              return std::tie(a.def, a.use, a.var) < std::tie(b.def, b.use, b.var);
            });
  builder.data_edges.erase(
      std::unique(builder.data_edges.begin(), builder.data_edges.end(),
                  [](const DataEdge& a, const DataEdge& b) {
                    return a.def == b.def && a.use == b.use && a.var == b.var;
                  }),
      builder.data_edges.end());
  pdg.data_edges_ = std::move(builder.data_edges);
  pdg.control_edges_ = std::move(builder.control_edges);
  pdg.names_ = std::move(builder.names);
  pdg.synthetic_globals_ = std::move(builder.synthetic_globals);
  for (size_t i = 0; i < pdg.data_edges_.size(); ++i) {
    pdg.edges_by_def_[pdg.data_edges_[i].def].push_back(i);
    pdg.edges_by_use_[pdg.data_edges_[i].use].push_back(i);
  }
  return pdg;
}

std::vector<NodeId> Pdg::defs_of(NodeId use) const {
  std::vector<NodeId> out;
  auto it = edges_by_use_.find(use);
  if (it == edges_by_use_.end()) return out;
  for (size_t i : it->second) out.push_back(data_edges_[i].def);
  return out;
}

std::vector<NodeId> Pdg::uses_of(NodeId def) const {
  std::vector<NodeId> out;
  auto it = edges_by_def_.find(def);
  if (it == edges_by_def_.end()) return out;
  for (size_t i : it->second) out.push_back(data_edges_[i].use);
  return out;
}

namespace {

// Shared traversal machinery for flows_from/flows_to. Forward hops propagate
// a value toward the expressions computed from it; backward hops are their
// exact mirrors, so the two closures stay mutually consistent.
struct FlowWalk {
  const Ast& ast;
  const Pdg& pdg;
  bool forward;

  void successors(NodeId id, std::vector<NodeId>& out) const {
    const Node& n = ast.node(id);
    if (forward) {
      for (NodeId use : pdg.uses_of(id)) out.push_back(use);
      NodeId parent = n.parent;
      if (parent == kNoNode) return;
      const Node& p = ast.node(parent);
      switch (p.kind) {
        case NodeKind::VariableDeclarator:
          if (p.children.size() > 1 && p.children[1] == id) out.push_back(p.children[0]);
          break;
        case NodeKind::AssignStatement:
          if (p.children[1] == id) {
            NodeId target = p.children[0];
            const Node& t = ast.node(target);
            if (t.kind == NodeKind::Identifier) {
              out.push_back(target);
            } else if (t.kind == NodeKind::MemberExpression) {
              NodeId base = target;
              while (ast.node(base).kind == NodeKind::MemberExpression) {
                base = ast.node(base).children[0];
              }
              if (ast.node(base).kind == NodeKind::Identifier) out.push_back(base);
            }
          }
          break;
        case NodeKind::MemberExpression:
          if (p.children[0] == id) out.push_back(parent);
          break;
        case NodeKind::CallExpression:
        case NodeKind::NewExpression:
          out.push_back(parent);  // callee or argument: the result derives from it
          break;
        case NodeKind::ConditionalExpression:
          if (p.children[1] == id || p.children[2] == id) out.push_back(parent);
          break;
        case NodeKind::Property:
          if (p.children[1] == id) out.push_back(parent);
          break;
        case NodeKind::ArrayExpression:
        case NodeKind::ObjectExpression:
        case NodeKind::TemplateString:
        case NodeKind::BinaryExpression:
        case NodeKind::UnaryExpression:
          out.push_back(parent);
          break;
        default:
          break;
      }
    } else {
      for (NodeId def : pdg.defs_of(id)) out.push_back(def);
      switch (n.kind) {
        case NodeKind::Identifier: {
          NodeId parent = n.parent;
          if (parent == kNoNode) break;
          const Node& p = ast.node(parent);
          if (p.kind == NodeKind::VariableDeclarator && p.children[0] == id &&
              p.children.size() > 1) {
            out.push_back(p.children[1]);
          }
          if (p.kind == NodeKind::AssignStatement && p.children[0] == id) {
            out.push_back(p.children[1]);
          }
          // Member-target base defs mirror the forward member-write hop.
          if (p.kind == NodeKind::MemberExpression) {
            NodeId top = parent;
            while (ast.node(top).parent != kNoNode &&
                   ast.node(ast.node(top).parent).kind == NodeKind::MemberExpression) {
              top = ast.node(top).parent;
            }
            NodeId maybe_assign = ast.node(top).parent;
            if (maybe_assign != kNoNode) {
              const Node& a = ast.node(maybe_assign);
              if (a.kind == NodeKind::AssignStatement && a.children[0] == top) {
                out.push_back(a.children[1]);
              }
            }
          }
          break;
        }
        case NodeKind::MemberExpression:
          out.push_back(n.children[0]);
          break;
        case NodeKind::CallExpression:
        case NodeKind::NewExpression:
          for (NodeId c : n.children) out.push_back(c);
          break;
        case NodeKind::ConditionalExpression:
          out.push_back(n.children[1]);
          out.push_back(n.children[2]);
          break;
        case NodeKind::ArrayExpression:
        case NodeKind::ObjectExpression:
        case NodeKind::TemplateString:
        case NodeKind::BinaryExpression:
        case NodeKind::UnaryExpression:
          for (NodeId c : n.children) out.push_back(c);
          break;
        case NodeKind::Property:
          out.push_back(n.children[1]);
          break;
        default:
          break;
      }
    }
  }

  std::set<NodeId> closure(NodeId start) const {
    std::set<NodeId> visited;
    std::deque<NodeId> queue = {start};
    std::vector<NodeId> next;
    while (!queue.empty()) {
      NodeId id = queue.front();
      queue.pop_front();
      next.clear();
      successors(id, next);
      for (NodeId s : next) {
        if (s == kNoNode || s == start || visited.count(s)) continue;
        visited.insert(s);
        queue.push_back(s);
      }
    }
    return visited;
  }
};

}  // namespace

std::set<NodeId> Pdg::flows_from(NodeId node) const {
  return FlowWalk{*ast_, *this, true}.closure(node);
}

std::set<NodeId> Pdg::flows_to(NodeId node) const {
  return FlowWalk{*ast_, *this, false}.closure(node);
}

std::string Pdg::dump() const {
  std::string out;
  for (const DataEdge& e : data_edges_) {
    out += "n" + std::to_string(e.def) + " -> n" + std::to_string(e.use) +
           " DEF->USE var=" + e.var + "\n";
  }
  for (const ControlEdge& e : control_edges_) {
    const char* label = e.label == ControlLabel::True    ? "True"
                        : e.label == ControlLabel::False ? "False"
                                                         : "Uncond";
    out += "n" + std::to_string(e.from) + " -> n" + std::to_string(e.to) +
           " CTL label=" + label + "\n";
  }
  return out;
}

}  // namespace jwbinder::pdg
