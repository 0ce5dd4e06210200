#pragma once

// Test-only reference assembler: emits WebAssembly binaries directly from
// declarative descriptions, independent of the decoder under test. Builders
// record their declarations so conformance tests can compare decoder output
// against what was assembled.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jwbinder/wasm/module.hpp"

namespace testsupport {

using jwbinder::wasm::ValType;

// Appends instruction bytes. Blocks opened with block()/loop()/if_() must be
// closed with end(); the function-terminating end is added by the builder.
class CodeWriter {
 public:
  CodeWriter& raw(uint8_t byte) {
    bytes_.push_back(byte);
    return *this;
  }
  CodeWriter& uleb(uint64_t v) {
    do {
      uint8_t b = v & 0x7F;
      v >>= 7;
      if (v) b |= 0x80;
      bytes_.push_back(b);
    } while (v);
    return *this;
  }
  CodeWriter& sleb(int64_t v) {
    for (;;) {
      uint8_t b = v & 0x7F;
      v >>= 7;
      bool done = (v == 0 && !(b & 0x40)) || (v == -1 && (b & 0x40));
      if (!done) b |= 0x80;
      bytes_.push_back(b);
      if (done) return *this;
    }
  }

  CodeWriter& unreachable() { return raw(0x00); }
  CodeWriter& nop() { return raw(0x01); }
  CodeWriter& block(std::optional<ValType> t = {}) { return blockty(0x02, t); }
  CodeWriter& loop(std::optional<ValType> t = {}) { return blockty(0x03, t); }
  CodeWriter& if_(std::optional<ValType> t = {}) { return blockty(0x04, t); }
  CodeWriter& else_() { return raw(0x05); }
  CodeWriter& end() { return raw(0x0B); }
  CodeWriter& br(uint32_t depth) { return raw(0x0C).uleb(depth); }
  CodeWriter& br_if(uint32_t depth) { return raw(0x0D).uleb(depth); }
  CodeWriter& br_table(const std::vector<uint32_t>& cases, uint32_t fallback) {
    raw(0x0E).uleb(cases.size());
    for (uint32_t c : cases) uleb(c);
    return uleb(fallback);
  }
  CodeWriter& ret() { return raw(0x0F); }
  CodeWriter& call(uint32_t func) { return raw(0x10).uleb(func); }
  CodeWriter& call_indirect(uint32_t type) { return raw(0x11).uleb(type).raw(0x00); }
  CodeWriter& drop() { return raw(0x1A); }
  CodeWriter& select() { return raw(0x1B); }
  CodeWriter& local_get(uint32_t i) { return raw(0x20).uleb(i); }
  CodeWriter& local_set(uint32_t i) { return raw(0x21).uleb(i); }
  CodeWriter& local_tee(uint32_t i) { return raw(0x22).uleb(i); }
  CodeWriter& global_get(uint32_t i) { return raw(0x23).uleb(i); }
  CodeWriter& global_set(uint32_t i) { return raw(0x24).uleb(i); }
  CodeWriter& i32_load(uint32_t align = 2, uint32_t offset = 0) {
    return raw(0x28).uleb(align).uleb(offset);
  }
  CodeWriter& i32_load8_u(uint32_t align = 0, uint32_t offset = 0) {
    return raw(0x2D).uleb(align).uleb(offset);
  }
  CodeWriter& i32_store(uint32_t align = 2, uint32_t offset = 0) {
    return raw(0x36).uleb(align).uleb(offset);
  }
  CodeWriter& i32_store8(uint32_t align = 0, uint32_t offset = 0) {
    return raw(0x3A).uleb(align).uleb(offset);
  }
  CodeWriter& memory_size() { return raw(0x3F).raw(0x00); }
  CodeWriter& memory_grow() { return raw(0x40).raw(0x00); }
  CodeWriter& i32_const(int32_t v) { return raw(0x41).sleb(v); }
  CodeWriter& i64_const(int64_t v) { return raw(0x42).sleb(v); }
  CodeWriter& f32_const(float v);
  CodeWriter& f64_const(double v);
  // Plain value operators addressed by raw opcode byte (see the core binary
  // format); named helpers cover the common ones.
  CodeWriter& i32_add() { return raw(0x6A); }
  CodeWriter& i32_sub() { return raw(0x6B); }
  CodeWriter& i32_mul() { return raw(0x6C); }
  CodeWriter& i32_div_s() { return raw(0x6D); }
  CodeWriter& i32_eqz() { return raw(0x45); }
  CodeWriter& i32_eq() { return raw(0x46); }
  CodeWriter& i32_lt_s() { return raw(0x48); }
  CodeWriter& i32_ge_s() { return raw(0x4E); }
  CodeWriter& i32_popcnt() { return raw(0x69); }

  const std::vector<uint8_t>& bytes() const { return bytes_; }

 private:
  CodeWriter& blockty(uint8_t opcode, std::optional<ValType> t) {
    raw(opcode);
    bytes_.push_back(t ? static_cast<uint8_t>(*t) : 0x40);
    return *this;
  }

  std::vector<uint8_t> bytes_;
};

struct BuiltExport {
  std::string name;
  uint8_t kind;
  uint32_t index;
};

struct BuiltData {
  std::optional<uint32_t> offset;  // empty = dynamic offset expression
  std::vector<uint8_t> bytes;
};

class ModuleBuilder {
 public:
  // Returns the type index, deduplicating identical signatures.
  uint32_t add_type(std::vector<ValType> params, std::vector<ValType> results);

  // Imported functions must be declared before defined functions.
  uint32_t import_func(std::string module, std::string field, uint32_t type_index);

  // Returns the module-wide function index.
  uint32_t add_func(uint32_t type_index, std::vector<ValType> locals, CodeWriter body);

  void export_func(std::string name, uint32_t func_index);
  void add_memory(uint32_t min_pages, std::optional<uint32_t> max_pages = {});
  void add_table(uint32_t min, std::optional<uint32_t> max = {});
  void add_global(ValType type, bool mutable_, CodeWriter init);
  void add_data(uint32_t offset, std::vector<uint8_t> bytes);
  void add_data(uint32_t offset, const std::string& text);
  void add_data_dynamic(CodeWriter offset_expr, std::vector<uint8_t> bytes);
  void add_element(uint32_t offset, std::vector<uint32_t> func_indices);

  std::vector<uint8_t> build() const;

  // Declarations for conformance checks.
  size_t type_count() const { return types_.size(); }
  size_t import_count() const { return imports_.size(); }
  size_t func_count() const { return funcs_.size(); }
  size_t global_count() const { return globals_.size(); }
  size_t element_count() const { return elements_.size(); }
  const std::vector<BuiltExport>& exports() const { return exports_; }
  std::vector<BuiltData> data_segments() const {
    std::vector<BuiltData> out;
    for (const DataEntry& d : data_) out.push_back({d.offset, d.bytes});
    return out;
  }
  size_t memory_count() const { return memories_.size(); }

 private:
  struct ImportEntry {
    std::string module, field;
    uint32_t type_index;
  };
  struct FuncEntry {
    uint32_t type_index;
    std::vector<ValType> locals;
    std::vector<uint8_t> body;
  };
  struct GlobalEntry {
    ValType type;
    bool mutable_;
    std::vector<uint8_t> init;
  };
  struct DataEntry {
    std::optional<uint32_t> offset;
    std::vector<uint8_t> offset_expr;  // used when offset is dynamic
    std::vector<uint8_t> bytes;
  };
  struct ElemEntry {
    uint32_t offset;
    std::vector<uint32_t> funcs;
  };
  struct Mem {
    uint32_t min;
    std::optional<uint32_t> max;
  };

  std::vector<std::pair<std::vector<ValType>, std::vector<ValType>>> types_;
  std::vector<ImportEntry> imports_;
  std::vector<FuncEntry> funcs_;
  std::vector<BuiltExport> exports_;
  std::vector<Mem> memories_;
  std::vector<Mem> tables_;
  std::vector<GlobalEntry> globals_;
  std::vector<DataEntry> data_;
  std::vector<ElemEntry> elements_;
};

}  // namespace testsupport
