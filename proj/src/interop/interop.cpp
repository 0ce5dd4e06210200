#include "jwbinder/interop/interop.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <optional>
#include <set>
#include <unordered_map>

namespace jwbinder::interop {

using js::Ast;
using js::kNoNode;
using js::Node;
using js::NodeId;
using js::NodeKind;

namespace {

KeyApiTable make_defaults() {
  KeyApiTable t;
  t.apis = {
      "WebAssembly.instantiate",
      "WebAssembly.instantiateStreaming",
      "WebAssembly.compile",
      "WebAssembly.compileStreaming",
      "WebAssembly.Module",
      "WebAssembly.Instance",
      "WebAssembly.Memory",
      "WebAssembly.Table",
      "instance.exports",  // property pattern, matched structurally
  };
  return t;
}

// Static member path of an expression ("WebAssembly.instantiate"); computed
// links are folded when the index is a string literal. Aliased roots are
// resolved through single definitions a few hops deep.
std::optional<std::string> callee_path(const pdg::Pdg& pdg, NodeId node, int depth = 0) {
  const Ast& ast = pdg.ast();
  const Node& n = ast.node(node);
  if (n.kind == NodeKind::Identifier) {
    if (n.text == "WebAssembly" || n.text == "fetch" || n.text == "atob") return n.text;
    if (depth > 4) return std::nullopt;
    for (NodeId def : pdg.defs_of(node)) {
      const Node& d = ast.node(def);
      if (d.parent == kNoNode) continue;
      const Node& p = ast.node(d.parent);
      NodeId value = kNoNode;
      if (p.kind == NodeKind::VariableDeclarator && p.children[0] == def && p.children.size() > 1) {
        value = p.children[1];
      } else if (p.kind == NodeKind::AssignStatement && p.children[0] == def) {
        value = p.children[1];
      }
      if (value == kNoNode) continue;
      const Node& v = ast.node(value);
      if (v.kind == NodeKind::Identifier || v.kind == NodeKind::MemberExpression) {
        if (auto resolved = callee_path(pdg, value, depth + 1)) return resolved;
      }
    }
    return n.text;
  }
  if (n.kind == NodeKind::MemberExpression) {
    std::string link;
    const Node& prop = ast.node(n.children[1]);
    if (n.flags & js::kFlagComputed) {
      if (prop.kind != NodeKind::StringLiteral) return std::nullopt;
      link = prop.text;
    } else {
      link = prop.text;
    }
    auto base = callee_path(pdg, n.children[0], depth);
    if (!base) return std::nullopt;
    return *base + "." + link;
  }
  return std::nullopt;
}

enum class ApiClass {
  Instantiate,
  InstantiateStreaming,
  Compile,
  ModuleCtor,
  InstanceCtor,
  MemoryCtor,
  TableCtor,
};

struct RawSite {
  NodeId node;
  std::string api_name;
  ApiClass cls;
  NodeId module_arg = kNoNode;
  NodeId import_object = kNoNode;
  bool folded = false;
  NodeId folded_into_arg = kNoNode;
};

// Value states tracked while flowing site results forward.
enum class VState : uint8_t {
  Module,          // WebAssembly.Module value
  ModulePromise,   // promise resolving to a module
  InstancePromise, // promise from instantiate/instantiateStreaming
  InstanceResult,  // resolved instantiate() value: instance or {module, instance}
  Instance,
  Exports,
  ExportFn,
  MemoryOrTable,
};

struct WorkItem {
  NodeId node;
  size_t site;
  VState state;
  std::string name;  // export name when state == ExportFn
};

bool is_reserved_prop(const std::string& p) {
  return p == "exports" || p == "instance" || p == "module" || p == "then" ||
         p == "catch" || p == "finally";
}

std::optional<std::string> static_prop_name(const Ast& ast, const Node& member) {
  const Node& prop = ast.node(member.children[1]);
  if (member.flags & js::kFlagComputed) {
    if (prop.kind == NodeKind::StringLiteral) return prop.text;
    return std::nullopt;
  }
  return prop.text;
}

class InteropFinder {
 public:
  InteropFinder(const pdg::Pdg& pdg, const KeyApiTable& apis) : pdg_(pdg), ast_(pdg.ast()), apis_(apis) {}

  InteropMap run() {
    collect_raw_sites();
    propagate();
    return finish();
  }

 private:
  void collect_raw_sites() {
    ast_.for_each_node([&](NodeId id, const Node& n) {
      bool is_call = n.kind == NodeKind::CallExpression;
      bool is_new = n.kind == NodeKind::NewExpression;
      if (!is_call && !is_new) return;
      auto path = callee_path(pdg_, n.children[0]);
      if (!path || !apis_.contains(*path)) return;

      RawSite site;
      site.node = id;
      site.api_name = *path;
      auto arg = [&](size_t i) {
        return n.children.size() > 1 + i ? n.children[1 + i] : kNoNode;
      };
      if (*path == "WebAssembly.instantiate") {
        site.cls = ApiClass::Instantiate;
        site.module_arg = arg(0);
        site.import_object = arg(1);
      } else if (*path == "WebAssembly.instantiateStreaming") {
        site.cls = ApiClass::InstantiateStreaming;
        site.module_arg = arg(0);
        site.import_object = arg(1);
      } else if (*path == "WebAssembly.compile" || *path == "WebAssembly.compileStreaming") {
        site.cls = ApiClass::Compile;
        site.module_arg = arg(0);
      } else if (*path == "WebAssembly.Module") {
        site.cls = ApiClass::ModuleCtor;
        site.module_arg = arg(0);
      } else if (*path == "WebAssembly.Instance") {
        site.cls = ApiClass::InstanceCtor;
        site.module_arg = arg(0);
        site.import_object = arg(1);
      } else if (*path == "WebAssembly.Memory") {
        site.cls = ApiClass::MemoryCtor;
      } else if (*path == "WebAssembly.Table") {
        site.cls = ApiClass::TableCtor;
      } else {
        return;
      }
      raw_sites_.push_back(site);
    });
  }

  void enqueue(NodeId node, size_t site, VState state, const std::string& name = "") {
    if (node == kNoNode) return;
    auto key = std::make_tuple(node, state, name);
    if (!visited_.insert(key).second) return;
    work_.push_back({node, site, state, name});
  }

  void propagate() {
    for (size_t i = 0; i < raw_sites_.size(); ++i) {
      switch (raw_sites_[i].cls) {
        case ApiClass::Instantiate:
        case ApiClass::InstantiateStreaming:
          enqueue(raw_sites_[i].node, i, VState::InstancePromise);
          break;
        case ApiClass::Compile:
          enqueue(raw_sites_[i].node, i, VState::ModulePromise);
          break;
        case ApiClass::ModuleCtor:
          enqueue(raw_sites_[i].node, i, VState::Module);
          break;
        case ApiClass::InstanceCtor:
          enqueue(raw_sites_[i].node, i, VState::Instance);
          break;
        case ApiClass::MemoryCtor:
        case ApiClass::TableCtor:
          enqueue(raw_sites_[i].node, i, VState::MemoryOrTable);
          break;
      }
    }
    while (!work_.empty()) {
      WorkItem item = work_.front();
      work_.pop_front();
      step(item);
    }
  }

  void step(const WorkItem& item) {
    const Node& n = ast_.node(item.node);

    // Folding: a module (or memory/table) produced by one key API and
    // consumed by another site belongs to that consumer.
    if (item.state == VState::Module || item.state == VState::ModulePromise) {
      check_module_fold(item);
    }
    if (item.state == VState::MemoryOrTable) {
      check_import_object_fold(item);
    }

    // Through variables: a value assigned or declared flows to every use of
    // the binding.
    if (n.parent != kNoNode) {
      const Node& p = ast_.node(n.parent);
      if (p.kind == NodeKind::VariableDeclarator && p.children.size() > 1 &&
          p.children[1] == item.node) {
        for (NodeId use : pdg_.uses_of(p.children[0])) {
          enqueue(use, item.site, item.state, item.name);
        }
      }
      if (p.kind == NodeKind::AssignStatement && p.children[1] == item.node &&
          ast_.node(p.children[0]).kind == NodeKind::Identifier) {
        for (NodeId use : pdg_.uses_of(p.children[0])) {
          enqueue(use, item.site, item.state, item.name);
        }
      }

      // Property refinement.
      if (p.kind == NodeKind::MemberExpression && p.children[0] == item.node) {
        auto prop = static_prop_name(ast_, p);
        if (prop) apply_property(item, n.parent, *prop);
      }

      // Export invocation: the tracked function is called.
      if (p.kind == NodeKind::CallExpression && p.children[0] == item.node &&
          item.state == VState::ExportFn) {
        record_invocation(n.parent, item.name, item.site);
      }
    }
  }

  void apply_property(const WorkItem& item, NodeId member, const std::string& prop) {
    switch (item.state) {
      case VState::InstancePromise:
      case VState::ModulePromise:
        if (prop == "then") handle_then(item, member);
        return;
      case VState::InstanceResult:
        if (prop == "instance") {
          enqueue(member, item.site, VState::Instance);
        } else if (prop == "module") {
          enqueue(member, item.site, VState::Module);
        } else if (prop == "exports") {
          enqueue(member, item.site, VState::Exports);
        } else if (!is_reserved_prop(prop)) {
          enqueue(member, item.site, VState::ExportFn, prop);
        }
        return;
      case VState::Instance:
        if (prop == "exports") {
          enqueue(member, item.site, VState::Exports);
        } else if (!is_reserved_prop(prop)) {
          enqueue(member, item.site, VState::ExportFn, prop);
        }
        return;
      case VState::Exports:
        if (!is_reserved_prop(prop)) enqueue(member, item.site, VState::ExportFn, prop);
        return;
      default:
        return;
    }
  }

  void handle_then(const WorkItem& item, NodeId member) {
    const Node& m = ast_.node(member);
    if (m.parent == kNoNode) return;
    const Node& call = ast_.node(m.parent);
    if (call.kind != NodeKind::CallExpression || call.children[0] != member) return;
    // The chained promise keeps flowing (x.then(...) commonly returns x's
    // resolution when callbacks return nothing).
    enqueue(m.parent, item.site, item.state, item.name);
    if (call.children.size() < 2) return;
    NodeId cb = resolve_function(call.children[1]);
    if (cb == kNoNode) return;
    const Node& fn = ast_.node(cb);
    if (fn.aux == 0) return;
    size_t first = fn.kind == NodeKind::ArrowFunction ? 0 : 1;
    NodeId param = fn.children[first];
    VState resolved = item.state == VState::InstancePromise ? VState::InstanceResult : VState::Module;
    enqueue(param, item.site, resolved);
    for (NodeId use : pdg_.uses_of(param)) enqueue(use, item.site, resolved);
  }

  NodeId resolve_function(NodeId node) const {
    const Node& n = ast_.node(node);
    if (n.kind == NodeKind::FunctionExpression || n.kind == NodeKind::ArrowFunction ||
        n.kind == NodeKind::FunctionDeclaration) {
      return node;
    }
    if (n.kind == NodeKind::Identifier) {
      for (NodeId def : pdg_.defs_of(node)) {
        const Node& d = ast_.node(def);
        if (d.parent == kNoNode) continue;
        const Node& p = ast_.node(d.parent);
        if (p.kind == NodeKind::FunctionDeclaration && p.children[0] == def) return d.parent;
        if (p.kind == NodeKind::VariableDeclarator && p.children[0] == def &&
            p.children.size() > 1) {
          const Node& v = ast_.node(p.children[1]);
          if (v.kind == NodeKind::FunctionExpression || v.kind == NodeKind::ArrowFunction) {
            return p.children[1];
          }
        }
      }
    }
    return kNoNode;
  }

  void check_module_fold(const WorkItem& item) {
    for (RawSite& consumer : raw_sites_) {
      if (consumer.node == raw_sites_[item.site].node) continue;
      if (consumer.module_arg == kNoNode) continue;
      if (item.node == consumer.module_arg || is_descendant(item.node, consumer.module_arg)) {
        raw_sites_[item.site].folded = true;
        raw_sites_[item.site].folded_into_arg = consumer.node;
      }
    }
  }

  void check_import_object_fold(const WorkItem& item) {
    for (const RawSite& consumer : raw_sites_) {
      if (consumer.import_object == kNoNode) continue;
      if (is_descendant(item.node, consumer.import_object)) {
        raw_sites_[item.site].folded = true;
      }
    }
  }

  bool is_descendant(NodeId node, NodeId ancestor) const {
    while (node != kNoNode) {
      if (node == ancestor) return true;
      node = ast_.node(node).parent;
    }
    return false;
  }

  void record_invocation(NodeId call, const std::string& name, size_t raw_site) {
    invocations_.insert({call, name, raw_site});
  }

  // Resolves a node to an object literal through single definitions.
  NodeId resolve_object(NodeId node, int depth = 0) const {
    if (node == kNoNode || depth > 8) return kNoNode;
    const Node& n = ast_.node(node);
    if (n.kind == NodeKind::ObjectExpression) return node;
    if (n.kind == NodeKind::Identifier) {
      for (NodeId def : pdg_.defs_of(node)) {
        const Node& d = ast_.node(def);
        if (d.parent == kNoNode) continue;
        const Node& p = ast_.node(d.parent);
        if (p.kind == NodeKind::VariableDeclarator && p.children[0] == def &&
            p.children.size() > 1) {
          NodeId r = resolve_object(p.children[1], depth + 1);
          if (r != kNoNode) return r;
        }
        if (p.kind == NodeKind::AssignStatement && p.children[0] == def) {
          NodeId r = resolve_object(p.children[1], depth + 1);
          if (r != kNoNode) return r;
        }
      }
    }
    return kNoNode;
  }

  std::optional<std::string> property_key(const Node& prop) const {
    const Node& key = ast_.node(prop.children[0]);
    if (key.kind == NodeKind::Identifier || key.kind == NodeKind::StringLiteral) return key.text;
    return std::nullopt;
  }

  void collect_bindings(Site& site) const {
    NodeId obj = resolve_object(site.import_object);
    if (obj == kNoNode) return;
    for (NodeId p : ast_.node(obj).children) {
      const Node& prop = ast_.node(p);
      auto module_name = property_key(prop);
      if (!module_name) continue;
      NodeId inner = resolve_object(prop.children[1]);
      if (inner == kNoNode) continue;  // one level of aliasing only
      for (NodeId q : ast_.node(inner).children) {
        const Node& field = ast_.node(q);
        auto field_name = property_key(field);
        if (!field_name) continue;
        site.bindings.push_back({*module_name, *field_name, field.children[1]});
      }
    }
  }

  InteropMap finish() {
    InteropMap map;
    std::unordered_map<size_t, size_t> site_index;  // raw index -> final index
    for (size_t i = 0; i < raw_sites_.size(); ++i) {
      const RawSite& raw = raw_sites_[i];
      if (raw.folded) continue;
      Site site;
      site.node = raw.node;
      site.api_name = raw.api_name;
      site.module_arg = raw.module_arg;
      site.import_object = raw.import_object;
      for (size_t k = 0; k < raw_sites_.size(); ++k) {
        if (raw_sites_[k].folded && raw_sites_[k].folded_into_arg == raw.node) {
          site.folded_chain.push_back(raw_sites_[k].node);
        }
      }
      collect_bindings(site);
      site_index[i] = map.instantiation_sites.size();
      map.instantiation_sites.push_back(std::move(site));
    }
    for (const auto& inv : invocations_) {
      auto it = site_index.find(inv.site_index);
      if (it == site_index.end()) continue;  // invocation on a folded site
      map.export_invocations.push_back({inv.call_node, inv.export_name, it->second});
    }
    std::sort(map.export_invocations.begin(), map.export_invocations.end(),
              [](const Invocation& a, const Invocation& b) {
                return std::tie(a.call_node, a.export_name, a.site_index) <
                       std::tie(b.call_node, b.export_name, b.site_index);
              });
    for (const Site& site : map.instantiation_sites) {
      for (const ImportBinding& b : site.bindings) {
        map.import_bindings.emplace(std::make_pair(b.module_name, b.field_name), b.expr);
      }
    }
    return map;
  }

  struct PendingInvocation {
    NodeId call_node;
    std::string export_name;
    size_t site_index;
    bool operator<(const PendingInvocation& o) const {
      return std::tie(call_node, export_name, site_index) <
             std::tie(o.call_node, o.export_name, o.site_index);
    }
  };

  const pdg::Pdg& pdg_;
  const Ast& ast_;
  const KeyApiTable& apis_;
  std::vector<RawSite> raw_sites_;
  std::deque<WorkItem> work_;
  std::set<std::tuple<NodeId, VState, std::string>> visited_;
  std::set<PendingInvocation> invocations_;
};

}  // namespace

KeyApiTable KeyApiTable::defaults() { return make_defaults(); }

KeyApiTable KeyApiTable::from_file(const std::string& path) {
  KeyApiTable t;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open key-API table: " + path);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;
    t.apis.push_back(line);
  }
  return t;
}

bool KeyApiTable::contains(const std::string& path) const {
  return std::find(apis.begin(), apis.end(), path) != apis.end();
}

const char* origin_kind_name(OriginKind k) {
  switch (k) {
    case OriginKind::InlineTypedArray: return "inline-typed-array";
    case OriginKind::Base64String: return "base64-string";
    case OriginKind::HexString: return "hex-string";
    case OriginKind::AssetFile: return "asset-file";
    case OriginKind::Unresolved: return "unresolved";
  }
  return "?";
}

const char* unresolved_reason_name(UnresolvedReason r) {
  switch (r) {
    case UnresolvedReason::None: return "none";
    case UnresolvedReason::NetworkOnly: return "network-only";
    case UnresolvedReason::DynamicConstruction: return "dynamic-construction";
    case UnresolvedReason::DepthExceeded: return "depth-exceeded";
  }
  return "?";
}

InteropMap find_interops(const pdg::Pdg& pdg, const KeyApiTable& apis) {
  return InteropFinder(pdg, apis).run();
}

}  // namespace jwbinder::interop
