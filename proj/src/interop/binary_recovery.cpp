#include <cctype>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "jwbinder/interop/interop.hpp"

namespace jwbinder::interop {

using js::Ast;
using js::kNoNode;
using js::Node;
using js::NodeId;
using js::NodeKind;

namespace {

constexpr uint8_t kWasmMagic[4] = {0x00, 0x61, 0x73, 0x6D};

bool has_wasm_magic(const std::vector<uint8_t>& bytes) {
  return bytes.size() >= 4 && bytes[0] == kWasmMagic[0] && bytes[1] == kWasmMagic[1] &&
         bytes[2] == kWasmMagic[2] && bytes[3] == kWasmMagic[3];
}

std::optional<std::vector<uint8_t>> decode_base64(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.empty() || text.size() % 4 != 0) return std::nullopt;
  std::vector<uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  uint32_t acc = 0;
  int bits = 0;
  size_t padding = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '=') {
      ++padding;
      if (i + 2 < text.size()) return std::nullopt;
      continue;
    }
    if (padding) return std::nullopt;
    int v = value_of(c);
    if (v < 0) return std::nullopt;
    acc = (acc << 6) | static_cast<uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

std::optional<std::vector<uint8_t>> decode_hex(const std::string& text) {
  if (text.size() < 16 || text.size() % 2 != 0) return std::nullopt;
  std::vector<uint8_t> out;
  out.reserve(text.size() / 2);
  for (size_t i = 0; i < text.size(); i += 2) {
    auto digit = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      return -1;
    };
    int hi = digit(text[i]);
    int lo = digit(text[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<uint8_t>(hi * 16 + lo));
  }
  return out;
}

// Folds string literals and + concatenations of them.
std::optional<std::string> fold_string(const Ast& ast, NodeId node, int depth = 0) {
  if (node == kNoNode || depth > 64) return std::nullopt;
  const Node& n = ast.node(node);
  if (n.kind == NodeKind::StringLiteral) return n.text;
  if (n.kind == NodeKind::BinaryExpression && n.text == "+") {
    auto l = fold_string(ast, n.children[0], depth + 1);
    auto r = fold_string(ast, n.children[1], depth + 1);
    if (l && r) return *l + *r;
  }
  return std::nullopt;
}

std::optional<std::vector<uint8_t>> numeric_array_bytes(const Ast& ast, NodeId node) {
  const Node& n = ast.node(node);
  if (n.kind != NodeKind::ArrayExpression || n.children.empty()) return std::nullopt;
  std::vector<uint8_t> out;
  out.reserve(n.children.size());
  for (NodeId c : n.children) {
    const Node& e = ast.node(c);
    double v;
    if (e.kind == NodeKind::NumberLiteral) {
      v = e.num;
    } else if (e.kind == NodeKind::UnaryExpression && e.text == "-" &&
               ast.node(e.children[0]).kind == NodeKind::NumberLiteral) {
      v = -ast.node(e.children[0]).num;
    } else {
      return std::nullopt;
    }
    out.push_back(static_cast<uint8_t>(static_cast<int64_t>(v) & 0xFF));
  }
  return out;
}

std::string url_basename(const std::string& url) {
  std::string s = url;
  size_t q = s.find_first_of("?#");
  if (q != std::string::npos) s = s.substr(0, q);
  size_t slash = s.find_last_of('/');
  if (slash != std::string::npos) s = s.substr(slash + 1);
  return s;
}

std::optional<std::vector<uint8_t>> read_asset(const std::string& assets_dir,
                                               const std::string& url) {
  if (assets_dir.empty()) return std::nullopt;
  std::string base = url_basename(url);
  if (base.empty()) return std::nullopt;
  std::filesystem::path path = std::filesystem::path(assets_dir) / base;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

struct Candidate {
  BinaryOrigin origin;
  bool magic = false;
};

class Recovery {
 public:
  Recovery(const pdg::Pdg& pdg, const std::string& assets_dir, int depth_cap)
      : pdg_(pdg), ast_(pdg.ast()), assets_dir_(assets_dir), depth_cap_(depth_cap) {}

  BinaryOrigin run(NodeId start) {
    if (start == kNoNode) {
      BinaryOrigin out;
      out.reason = UnresolvedReason::DynamicConstruction;
      return out;
    }
    std::deque<std::pair<NodeId, int>> queue = {{start, 0}};
    visited_.insert(start);
    bool frontier_cut = false;
    while (!queue.empty()) {
      auto [node, depth] = queue.front();
      queue.pop_front();
      if (auto hit = inspect(node)) {
        if (hit->magic) {
          hit->origin.provenance = provenance_of(node, start);
          return hit->origin;
        }
        if (!fallback_) {
          hit->origin.provenance = provenance_of(node, start);
          fallback_ = hit->origin;
        }
        continue;
      }
      if (depth >= depth_cap_) {
        frontier_cut = true;
        continue;
      }
      for (NodeId next : predecessors(node)) {
        if (next == kNoNode || visited_.count(next)) continue;
        visited_.insert(next);
        parent_[next] = node;
        queue.push_back({next, depth + 1});
      }
    }
    if (fallback_) return *fallback_;
    BinaryOrigin out;
    if (saw_network_) {
      out.reason = UnresolvedReason::NetworkOnly;
    } else if (frontier_cut) {
      out.reason = UnresolvedReason::DepthExceeded;
    } else {
      out.reason = UnresolvedReason::DynamicConstruction;
    }
    return out;
  }

 private:
  std::vector<NodeId> provenance_of(NodeId node, NodeId start) const {
    std::vector<NodeId> chain = {node};
    while (node != start) {
      auto it = parent_.find(node);
      if (it == parent_.end()) break;
      node = it->second;
      chain.push_back(node);
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
  }

  std::optional<Candidate> inspect(NodeId id) {
    const Node& n = ast_.node(id);

    if (auto bytes = numeric_array_bytes(ast_, id)) {
      Candidate c;
      c.origin.kind = OriginKind::InlineTypedArray;
      c.origin.bytes = std::move(*bytes);
      c.magic = has_wasm_magic(c.origin.bytes);
      if (!c.magic) c.origin.note = "bytes do not start with the module magic";
      return c;
    }

    if (n.kind == NodeKind::CallExpression) {
      const Node& callee = ast_.node(n.children[0]);
      if (callee.kind == NodeKind::Identifier && callee.text == "atob" &&
          n.children.size() > 1) {
        if (auto text = fold_string(ast_, n.children[1])) {
          if (auto bytes = decode_base64(*text)) {
            Candidate c;
            c.origin.kind = OriginKind::Base64String;
            c.origin.bytes = std::move(*bytes);
            c.magic = has_wasm_magic(c.origin.bytes);
            if (!c.magic) c.origin.note = "decoded base64 lacks the module magic";
            return c;
          }
        }
      }
      if (callee.kind == NodeKind::Identifier && callee.text == "fetch") {
        saw_network_ = true;
        if (n.children.size() > 1) {
          if (auto url = fold_string(ast_, n.children[1])) {
            if (auto bytes = read_asset(assets_dir_, *url)) {
              Candidate c;
              c.origin.kind = OriginKind::AssetFile;
              c.origin.bytes = std::move(*bytes);
              c.magic = has_wasm_magic(c.origin.bytes);
              if (!c.magic) c.origin.note = "asset file lacks the module magic";
              return c;
            }
          }
        }
        return std::nullopt;
      }
    }

    if (n.kind == NodeKind::StringLiteral || n.kind == NodeKind::BinaryExpression) {
      if (auto text = fold_string(ast_, id)) {
        if (auto bytes = decode_hex(*text); bytes && has_wasm_magic(*bytes)) {
          Candidate c;
          c.origin.kind = OriginKind::HexString;
          c.origin.bytes = std::move(*bytes);
          c.magic = true;
          return c;
        }
        if (auto bytes = decode_base64(*text); bytes && has_wasm_magic(*bytes)) {
          Candidate c;
          c.origin.kind = OriginKind::Base64String;
          c.origin.bytes = std::move(*bytes);
          c.magic = true;
          return c;
        }
      }
    }
    return std::nullopt;
  }

  // Backward neighbors: where could this value have come from.
  std::vector<NodeId> predecessors(NodeId id) {
    std::vector<NodeId> out;
    const Node& n = ast_.node(id);
    switch (n.kind) {
      case NodeKind::Identifier: {
        for (NodeId def : pdg_.defs_of(id)) {
          const Node& d = ast_.node(def);
          if (d.parent == kNoNode) continue;
          const Node& p = ast_.node(d.parent);
          if (p.kind == NodeKind::VariableDeclarator && p.children[0] == def &&
              p.children.size() > 1) {
            out.push_back(p.children[1]);
          } else if (p.kind == NodeKind::AssignStatement && p.children[0] == def) {
            out.push_back(p.children[1]);
          } else if (p.kind == NodeKind::MemberExpression) {
            // Member-write def (arr[i] = v): the filled values feed the array.
            NodeId top = d.parent;
            while (ast_.node(top).parent != kNoNode &&
                   ast_.node(ast_.node(top).parent).kind == NodeKind::MemberExpression) {
              top = ast_.node(top).parent;
            }
            NodeId assign = ast_.node(top).parent;
            if (assign != kNoNode) {
              const Node& a = ast_.node(assign);
              if (a.kind == NodeKind::AssignStatement && a.children[0] == top) {
                out.push_back(a.children[1]);
              }
            }
          }
        }
        break;
      }
      case NodeKind::NewExpression:
      case NodeKind::CallExpression:
        // Wrappers and conversions: walk into callee base and arguments.
        for (size_t i = 0; i < n.children.size(); ++i) out.push_back(n.children[i]);
        break;
      case NodeKind::MemberExpression:
        out.push_back(n.children[0]);
        if (n.flags & js::kFlagComputed) out.push_back(n.children[1]);
        break;
      case NodeKind::ConditionalExpression:
        out.push_back(n.children[1]);
        out.push_back(n.children[2]);
        break;
      case NodeKind::BinaryExpression:
      case NodeKind::UnaryExpression:
      case NodeKind::ArrayExpression:
      case NodeKind::TemplateString:
        for (NodeId c : n.children) out.push_back(c);
        break;
      case NodeKind::Property:
        out.push_back(n.children[1]);
        break;
      case NodeKind::ObjectExpression:
        for (NodeId c : n.children) out.push_back(c);
        break;
      default:
        break;
    }
    return out;
  }

  const pdg::Pdg& pdg_;
  const Ast& ast_;
  std::string assets_dir_;
  int depth_cap_;
  std::unordered_set<NodeId> visited_;
  std::unordered_map<NodeId, NodeId> parent_;
  std::optional<BinaryOrigin> fallback_;
  bool saw_network_ = false;
};

}  // namespace

BinaryOrigin recover_binary(const pdg::Pdg& pdg, const Site& site, const std::string& assets_dir,
                            int depth_cap) {
  return Recovery(pdg, assets_dir, depth_cap).run(site.module_arg);
}

}  // namespace jwbinder::interop
