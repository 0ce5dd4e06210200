#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "jwbinder/js/ast.hpp"
#include "jwbinder/ssr/name_generator.hpp"
#include "jwbinder/wasm/module.hpp"

namespace jwbinder::ssr {

// Semantic tag attached to an emitted expression node. The generated text is
// plain ES6; tags carry the original operation so the reference evaluator can
// apply exact semantics (32-bit wrapping, typed memory access, ...).
struct TypeTag {
  wasm::Op op;
  uint32_t mem_offset = 0;  // static offset immediate for loads/stores
};

// A sequence of statements abstracted from one function (or the data
// section), ready to splice into the program.
struct JsFragment {
  js::Ast ast;  // Program node whose children are the fragment statements
  js::NodeId result_expr = js::kNoNode;
  std::vector<std::string> param_names;
  std::vector<wasm::ValType> param_types;
  std::optional<wasm::ValType> result_type;
  std::map<std::string, std::string> helpers_used;  // actual name -> canonical name
  std::unordered_map<js::NodeId, TypeTag> tags;
  std::string mem_name;  // linear-memory identifier, empty when unused
  std::vector<std::string> diagnostics;
  std::vector<std::string> data_names;  // declared DATA_* constants (data abstraction)
};

// How an imported function is rendered at call sites: an expression to clone
// (from the analyzed program's import bindings) and the label used in host
// traces. When src_ast is null a `module.field` member chain is synthesized.
struct BoundImport {
  const js::Ast* src_ast = nullptr;
  js::NodeId expr = js::kNoNode;
  std::string label;
};

struct AbstractionContext {
  const wasm::WasmModule* module = nullptr;
  std::vector<std::optional<BoundImport>> func_imports;  // by import-function index
  NameGenerator* names = nullptr;
};

// Bindings that synthesize `module.field` expressions for every import.
AbstractionContext standalone_context(const wasm::WasmModule& module, NameGenerator& names);

class AbstractionError : public std::runtime_error {
 public:
  explicit AbstractionError(const std::string& what) : std::runtime_error(what) {}
};

// Stack-driven code abstraction of one defined function (module-wide index).
// Internal callees are abstracted recursively into function declarations
// inside the fragment; dynamic indirect calls go through a dispatch stub
// listing the type-compatible table entries.
JsFragment abstract_function(const AbstractionContext& ctx, uint32_t func_index);

// Data abstraction: one `const DATA_n = ...;` per segment (string literal
// when at least 90% of the bytes print as ASCII, else a byte array) plus a
// DATA_n_OFFSET sibling.
JsFragment abstract_data(const wasm::WasmModule& module, NameGenerator& names);

// JS definitions for the helpers a set of fragments uses, in deterministic
// order, as parseable source text.
std::string helper_prelude(const std::map<std::string, std::string>& helpers_used);

}  // namespace jwbinder::ssr
