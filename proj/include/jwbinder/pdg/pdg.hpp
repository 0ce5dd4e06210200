#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "jwbinder/js/ast.hpp"

namespace jwbinder::pdg {

enum class ControlLabel : uint8_t { True, False, Uncond };

struct ControlEdge {
  js::NodeId from;
  js::NodeId to;
  ControlLabel label;
};

struct DataEdge {
  js::NodeId def;
  js::NodeId use;
  std::string var;
};

// Program dependency graph: the AST plus def-use data edges under lexical
// scoping (function declarations hoisted, `var` function-scoped, let/const
// block-scoped) and labeled control edges from condition nodes into the
// statements they guard.
//
// Data flow is flow-insensitive inside a scope: every definition of a name
// gets an edge to every use, which over-approximates reachability in the
// direction that is safe for interop discovery.
class Pdg {
 public:
  explicit Pdg(const js::Ast& ast) : ast_(&ast) {}

  const js::Ast& ast() const { return *ast_; }

  const std::vector<DataEdge>& data_edges() const { return data_edges_; }
  const std::vector<ControlEdge>& control_edges() const { return control_edges_; }

  // Transitive forward/backward data-flow closure from a node, following
  // def-use edges plus structural value propagation (reassignment, member
  // bases, call results, literal containers, promise callbacks). The start
  // node is not part of the result.
  std::set<js::NodeId> flows_from(js::NodeId node) const;
  std::set<js::NodeId> flows_to(js::NodeId node) const;

  // Definition occurrences feeding a use node, and vice versa.
  std::vector<js::NodeId> defs_of(js::NodeId use) const;
  std::vector<js::NodeId> uses_of(js::NodeId def) const;

  // Every identifier lexeme occurring in the program (generated names must
  // avoid all of them).
  const std::unordered_set<std::string>& identifier_names() const { return names_; }

  // Names read without any reachable declaration or known global.
  const std::vector<std::string>& synthetic_globals() const { return synthetic_globals_; }

  // One edge per line: "n<from> -> n<to> DEF->USE var=<name>" and
  // "n<from> -> n<to> CTL label=<True|False|Uncond>".
  std::string dump() const;

 private:
  friend Pdg build_pdg(const js::Ast& ast);

  const js::Ast* ast_;
  std::vector<DataEdge> data_edges_;
  std::vector<ControlEdge> control_edges_;
  std::unordered_map<js::NodeId, std::vector<size_t>> edges_by_def_;
  std::unordered_map<js::NodeId, std::vector<size_t>> edges_by_use_;
  std::unordered_set<std::string> names_;
  std::vector<std::string> synthetic_globals_;
};

Pdg build_pdg(const js::Ast& ast);

}  // namespace jwbinder::pdg
