#include "jwbinder/recon/integrate.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "jwbinder/js/parser.hpp"
#include "jwbinder/js/printer.hpp"

namespace jwbinder::recon {

using js::Ast;
using js::kNoNode;
using js::Node;
using js::NodeId;
using js::NodeKind;

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Code: return "code";
    case Mode::Data: return "data";
    case Mode::All: return "all";
  }
  return "?";
}

Mode parse_mode(const std::string& name) {
  if (name == "code") return Mode::Code;
  if (name == "data") return Mode::Data;
  if (name == "all") return Mode::All;
  throw std::invalid_argument("mode must be code, data or all");
}

namespace {

NodeId clone_with_map(Ast& dst, const Ast& src, NodeId src_id,
                      std::unordered_map<NodeId, NodeId>& map) {
  if (src_id == kNoNode) return kNoNode;
  Node snapshot = src.node(src_id);  // by value, safe against reallocation
  NodeId id = dst.make(snapshot.kind, snapshot.span);
  {
    Node& n = dst.node(id);
    n.flags = snapshot.flags;
    n.aux = snapshot.aux;
    n.num = snapshot.num;
    n.text = snapshot.text;
  }
  map[src_id] = id;
  for (NodeId child : snapshot.children) {
    dst.attach(id, clone_with_map(dst, src, child, map));
  }
  return id;
}

bool is_container(NodeKind k) {
  return k == NodeKind::Program || k == NodeKind::BlockStatement;
}

class Integrator {
 public:
  Integrator(const js::Ast& program, const interop::InteropMap& interops,
             const std::map<size_t, ssr::JsFragment>& code_fragments,
             const std::map<size_t, ssr::JsFragment>& data_fragments, Mode mode)
      : interops_(interops),
        code_fragments_(code_fragments),
        data_fragments_(data_fragments),
        mode_(mode) {
    clone_with_map(out_.ast, program, program.root(), map_);
    out_.ast.set_root(map_.at(program.root()));
  }

  Ipdg run() {
    if (mode_ == Mode::Code || mode_ == Mode::All) replace_invocations();
    if (mode_ == Mode::Data || mode_ == Mode::All) insert_data_fragments();
    insert_helper_prelude();
    return std::move(out_);
  }

 private:
  Ast& ast() { return out_.ast; }

  // The statement whose container holds `node`, or kNoNode when the node is
  // no longer attached to the tree (a previous splice removed it).
  NodeId enclosing_statement(NodeId node) const {
    NodeId cur = node;
    for (;;) {
      NodeId parent = out_.ast.node(cur).parent;
      if (parent == kNoNode) return cur == out_.ast.root() ? cur : kNoNode;
      if (is_container(out_.ast.node(parent).kind)) return cur;
      cur = parent;
    }
  }

  void insert_before(NodeId stmt, const std::vector<NodeId>& new_stmts) {
    NodeId container = ast().node(stmt).parent;
    auto& children = ast().node(container).children;
    auto it = std::find(children.begin(), children.end(), stmt);
    children.insert(it, new_stmts.begin(), new_stmts.end());
    for (NodeId s : new_stmts) ast().node(s).parent = container;
  }

  void replace_statement(NodeId stmt, const std::vector<NodeId>& new_stmts) {
    NodeId container = ast().node(stmt).parent;
    auto& children = ast().node(container).children;
    auto it = std::find(children.begin(), children.end(), stmt);
    it = children.erase(it);
    children.insert(it, new_stmts.begin(), new_stmts.end());
    for (NodeId s : new_stmts) ast().node(s).parent = container;
  }

  NodeId make_binding(const std::string& name, NodeId init) {
    NodeId decl = ast().make(NodeKind::VariableDeclaration);
    ast().node(decl).aux = static_cast<uint16_t>(js::DeclKind::Const);
    NodeId declarator = ast().make(NodeKind::VariableDeclarator);
    NodeId id = ast().make(NodeKind::Identifier);
    ast().node(id).text = name;
    ast().attach(declarator, id);
    ast().attach(declarator, init);
    ast().attach(decl, declarator);
    return decl;
  }

  void replace_invocations() {
    for (size_t i = 0; i < interops_.export_invocations.size(); ++i) {
      auto frag_it = code_fragments_.find(i);
      if (frag_it == code_fragments_.end()) continue;  // unresolved unit
      const ssr::JsFragment& frag = frag_it->second;
      auto call_it = map_.find(interops_.export_invocations[i].call_node);
      if (call_it == map_.end()) continue;
      NodeId call = call_it->second;
      NodeId stmt = enclosing_statement(call);
      if (stmt == kNoNode) continue;  // detached by an earlier splice

      std::vector<NodeId> stmts;
      const Node& call_node = ast().node(call);
      for (size_t p = 0; p < frag.param_names.size(); ++p) {
        NodeId arg;
        if (1 + p < call_node.children.size()) {
          arg = call_node.children[1 + p];
        } else {
          arg = ast().make(NodeKind::NumberLiteral);  // missing argument: zero
        }
        stmts.push_back(make_binding(frag.param_names[p], arg));
      }
      std::unordered_map<NodeId, NodeId> frag_map;
      const Node& frag_program = frag.ast.node(frag.ast.root());
      for (NodeId s : frag_program.children) {
        stmts.push_back(clone_with_map(ast(), frag.ast, s, frag_map));
      }
      splice_helpers(frag);

      const Node& parent = ast().node(ast().node(call).parent);
      bool whole_statement = parent.kind == NodeKind::ExpressionStatement &&
                             ast().node(call).parent == stmt;
      if (whole_statement) {
        replace_statement(stmt, stmts);
      } else {
        insert_before(stmt, stmts);
        NodeId value;
        if (frag.result_expr != kNoNode) {
          auto mapped = frag_map.find(frag.result_expr);
          value = mapped != frag_map.end() ? ast().clone_from(ast(), mapped->second)
                                           : ast().clone_from(frag.ast, frag.result_expr);
        } else {
          value = ast().make(NodeKind::Identifier);
          ast().node(value).text = "undefined";
        }
        ast().replace_child(ast().node(call).parent, call, value);
      }
      out_.splices.push_back({stmt, SpliceKind::InvocationReplacement});
    }
  }

  void insert_data_fragments() {
    for (size_t s = 0; s < interops_.instantiation_sites.size(); ++s) {
      auto frag_it = data_fragments_.find(s);
      if (frag_it == data_fragments_.end()) continue;
      const ssr::JsFragment& frag = frag_it->second;
      const Node& frag_program = frag.ast.node(frag.ast.root());
      if (frag_program.children.empty()) continue;
      auto site_it = map_.find(interops_.instantiation_sites[s].node);
      if (site_it == map_.end()) continue;
      NodeId stmt = enclosing_statement(site_it->second);
      if (stmt == kNoNode) continue;
      std::vector<NodeId> stmts;
      for (NodeId c : frag_program.children) {
        stmts.push_back(ast().clone_from(frag.ast, c));
      }
      insert_before(stmt, stmts);
      out_.splices.push_back({stmt, SpliceKind::InstantiationInsertion});
    }
  }

  void splice_helpers(const ssr::JsFragment& frag) {
    for (const auto& [actual, canonical] : frag.helpers_used) {
      helpers_needed_[actual] = canonical;
    }
  }

  void insert_helper_prelude() {
    if (helpers_needed_.empty()) return;
    std::string source = ssr::helper_prelude(helpers_needed_);
    js::Ast parsed = js::parse(source);
    const Node& program = parsed.node(parsed.root());
    std::vector<NodeId> stmts;
    for (NodeId s : program.children) stmts.push_back(ast().clone_from(parsed, s));
    auto& children = ast().node(ast().root()).children;
    children.insert(children.begin(), stmts.begin(), stmts.end());
    for (NodeId s : stmts) ast().node(s).parent = ast().root();
    if (!stmts.empty()) out_.splices.push_back({stmts.front(), SpliceKind::HelperPrelude});
  }

  const interop::InteropMap& interops_;
  const std::map<size_t, ssr::JsFragment>& code_fragments_;
  const std::map<size_t, ssr::JsFragment>& data_fragments_;
  Mode mode_;
  Ipdg out_;
  std::unordered_map<NodeId, NodeId> map_;
  std::map<std::string, std::string> helpers_needed_;
};

}  // namespace

Ipdg integrate(const js::Ast& program, const interop::InteropMap& interops,
               const std::map<size_t, ssr::JsFragment>& code_fragments,
               const std::map<size_t, ssr::JsFragment>& data_fragments, Mode mode) {
  return Integrator(program, interops, code_fragments, data_fragments, mode).run();
}

std::string reconstruct(const Ipdg& ipdg) { return js::print(ipdg.ast); }

}  // namespace jwbinder::recon
