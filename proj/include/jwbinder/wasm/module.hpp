#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jwbinder::wasm {

enum class ValType : uint8_t { I32 = 0x7F, I64 = 0x7E, F32 = 0x7D, F64 = 0x7C };

const char* valtype_name(ValType t);

enum class Op : uint8_t {
  Unreachable, Nop, Block, Loop, If, Else, End, Br, BrIf, BrTable, Return,
  Call, CallIndirect, Drop, Select,
  LocalGet, LocalSet, LocalTee, GlobalGet, GlobalSet,
  I32Load, I64Load, F32Load, F64Load,
  I32Load8S, I32Load8U, I32Load16S, I32Load16U,
  I64Load8S, I64Load8U, I64Load16S, I64Load16U, I64Load32S, I64Load32U,
  I32Store, I64Store, F32Store, F64Store,
  I32Store8, I32Store16, I64Store8, I64Store16, I64Store32,
  MemorySize, MemoryGrow,
  I32Const, I64Const, F32Const, F64Const,
  I32Eqz, I32Eq, I32Ne, I32LtS, I32LtU, I32GtS, I32GtU, I32LeS, I32LeU, I32GeS, I32GeU,
  I64Eqz, I64Eq, I64Ne, I64LtS, I64LtU, I64GtS, I64GtU, I64LeS, I64LeU, I64GeS, I64GeU,
  F32Eq, F32Ne, F32Lt, F32Gt, F32Le, F32Ge,
  F64Eq, F64Ne, F64Lt, F64Gt, F64Le, F64Ge,
  I32Clz, I32Ctz, I32Popcnt,
  I32Add, I32Sub, I32Mul, I32DivS, I32DivU, I32RemS, I32RemU,
  I32And, I32Or, I32Xor, I32Shl, I32ShrS, I32ShrU, I32Rotl, I32Rotr,
  I64Clz, I64Ctz, I64Popcnt,
  I64Add, I64Sub, I64Mul, I64DivS, I64DivU, I64RemS, I64RemU,
  I64And, I64Or, I64Xor, I64Shl, I64ShrS, I64ShrU, I64Rotl, I64Rotr,
  F32Add, F32Sub, F32Mul, F32Div,
  F64Add, F64Sub, F64Mul, F64Div,
  I32WrapI64,
  I32TruncF32S, I32TruncF32U, I32TruncF64S, I32TruncF64U,
  I64ExtendI32S, I64ExtendI32U,
  I64TruncF32S, I64TruncF32U, I64TruncF64S, I64TruncF64U,
  F32ConvertI32S, F32ConvertI32U, F32ConvertI64S, F32ConvertI64U, F32DemoteF64,
  F64ConvertI32S, F64ConvertI32U, F64ConvertI64S, F64ConvertI64U, F64PromoteF32,
};

const char* mnemonic(Op op);

// A structured instruction: block/loop/if carry nested bodies instead of flat
// `end`-terminated runs; `else` arms are attached to their `if`.
struct Instruction {
  Op op = Op::Nop;
  uint32_t a = 0;       // index / depth / alignment / default branch depth
  uint32_t b = 0;       // memarg offset
  int64_t i64_val = 0;  // i32/i64 const payload (i32 sign-extended)
  float f32_val = 0;
  double f64_val = 0;
  std::vector<uint32_t> table;  // br_table case depths
  std::optional<ValType> block_result;
  std::vector<Instruction> body;
  std::vector<Instruction> else_body;
  uint32_t offset = 0;  // byte offset of the opcode in the module
};

struct FuncType {
  std::vector<ValType> params;
  std::vector<ValType> results;
  bool operator==(const FuncType&) const = default;
};

enum class ExternalKind : uint8_t { Func = 0, Table = 1, Memory = 2, Global = 3 };

struct Limits {
  uint32_t min = 0;
  std::optional<uint32_t> max;
};

struct Import {
  std::string module;
  std::string field;
  ExternalKind kind = ExternalKind::Func;
  uint32_t type_index = 0;           // functions
  Limits limits;                     // tables and memories
  ValType global_type = ValType::I32;
  bool global_mutable = false;
};

struct Function {
  uint32_t type_index = 0;
  std::vector<ValType> locals;  // flattened, excluding parameters
  std::vector<Instruction> body;
  bool body_ok = true;
  std::string body_error;
};

struct Export {
  std::string name;
  ExternalKind kind = ExternalKind::Func;
  uint32_t index = 0;
};

struct Global {
  ValType type = ValType::I32;
  bool is_mutable = false;
  std::vector<Instruction> init;
};

struct DataSegment {
  uint32_t mem_index = 0;
  std::vector<Instruction> offset_expr;
  std::optional<uint32_t> const_offset;  // empty when the offset is dynamic
  std::vector<uint8_t> bytes;
};

struct ElementSegment {
  uint32_t table_index = 0;
  std::vector<Instruction> offset_expr;
  std::optional<uint32_t> const_offset;
  std::vector<uint32_t> func_indices;
};

struct WasmModule {
  std::vector<FuncType> types;
  std::vector<Import> imports;
  std::vector<Function> functions;
  std::vector<Export> exports;
  std::vector<Limits> memories;
  std::vector<Limits> tables;
  std::vector<Global> globals;
  std::vector<DataSegment> data_segments;
  std::vector<ElementSegment> elements;
  std::vector<uint8_t> skipped_sections;   // ids of custom/unknown sections
  std::vector<std::string> diagnostics;    // per-function decode notes

  uint32_t import_func_count() const {
    uint32_t n = 0;
    for (const Import& imp : imports) {
      if (imp.kind == ExternalKind::Func) ++n;
    }
    return n;
  }

  uint32_t total_func_count() const {
    return import_func_count() + static_cast<uint32_t>(functions.size());
  }

  // `index` is in the module-wide function index space (imports first).
  bool is_imported_func(uint32_t index) const { return index < import_func_count(); }

  // The import entry for an imported function index.
  const Import& func_import(uint32_t index) const;

  const FuncType& func_type(uint32_t index) const;

  // Defined-function record for a module-wide index.
  const Function& defined_func(uint32_t index) const {
    return functions[index - import_func_count()];
  }
};

// Typing summary for plain value operators (const, arithmetic, comparison,
// conversion). Ops with control or memory effects are not covered.
struct OpSignature {
  std::vector<ValType> params;
  std::optional<ValType> result;
};
std::optional<OpSignature> value_op_signature(Op op);

}  // namespace jwbinder::wasm
