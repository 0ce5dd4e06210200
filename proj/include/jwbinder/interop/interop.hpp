#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "jwbinder/pdg/pdg.hpp"

namespace jwbinder::interop {

// Call/construction paths treated as WebAssembly modularization or
// instantiation interfaces. Loadable from a text file (one dotted path per
// line, '#' comments) so the set can be extended without code changes.
struct KeyApiTable {
  std::vector<std::string> apis;

  static KeyApiTable defaults();
  static KeyApiTable from_file(const std::string& path);
  bool contains(const std::string& path) const;
};

enum class OriginKind : uint8_t {
  InlineTypedArray,
  Base64String,
  HexString,
  AssetFile,
  Unresolved,
};

enum class UnresolvedReason : uint8_t {
  None,
  NetworkOnly,
  DynamicConstruction,
  DepthExceeded,
};

const char* origin_kind_name(OriginKind k);
const char* unresolved_reason_name(UnresolvedReason r);

struct BinaryOrigin {
  OriginKind kind = OriginKind::Unresolved;
  UnresolvedReason reason = UnresolvedReason::None;
  std::vector<uint8_t> bytes;
  std::vector<js::NodeId> provenance;  // walk from the module argument to the source
  std::string note;                    // set when bytes are present but not magic-prefixed

  bool resolved() const { return kind != OriginKind::Unresolved; }
};

struct ImportBinding {
  std::string module_name;
  std::string field_name;
  js::NodeId expr;  // the JS expression supplied for this import
};

struct Site {
  js::NodeId node;
  std::string api_name;
  js::NodeId module_arg = js::kNoNode;
  js::NodeId import_object = js::kNoNode;
  std::vector<ImportBinding> bindings;
  std::vector<js::NodeId> folded_chain;  // modularization nodes folded into this site
};

struct Invocation {
  js::NodeId call_node;
  std::string export_name;
  size_t site_index;
};

struct InteropMap {
  std::vector<Site> instantiation_sites;
  std::vector<Invocation> export_invocations;
  // Flattened view; first binding wins on key collisions across sites.
  std::map<std::pair<std::string, std::string>, js::NodeId> import_bindings;
  std::map<size_t, BinaryOrigin> binaries;  // site index -> recovered origin

  bool empty() const { return instantiation_sites.empty(); }
};

// Walks the PDG for key-API hits, folds modularization results into the
// instantiation sites consuming them, traces instances forward to export
// invocations, and collects import-object bindings (object literals one
// level deep).
InteropMap find_interops(const pdg::Pdg& pdg, const KeyApiTable& apis = KeyApiTable::defaults());

// Walks data edges backward from the site's module argument through
// variables and known decode idioms (typed-array literals, atob of a base64
// literal, hex string fills, fetch against the asset directory) until a
// constant byte source is found. `assets_dir` may be empty.
BinaryOrigin recover_binary(const pdg::Pdg& pdg, const Site& site, const std::string& assets_dir,
                            int depth_cap = 64);

}  // namespace jwbinder::interop
