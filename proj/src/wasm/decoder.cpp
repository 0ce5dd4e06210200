#include "jwbinder/wasm/decoder.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <optional>

namespace jwbinder::wasm {

namespace {

using Kind = DecodeError::Kind;

enum class Imm : uint8_t {
  None,
  BlockType,
  LabelIdx,
  LabelTable,
  FuncIdx,
  CallIndirect,
  LocalIdx,
  GlobalIdx,
  MemArg,
  MemReserved,
  I32,
  I64,
  F32,
  F64,
};

struct OpEntry {
  Op op;
  Imm imm;
  bool valid = false;
};

const std::array<OpEntry, 256>& opcode_table() {
  static const std::array<OpEntry, 256> table = [] {
    std::array<OpEntry, 256> t{};
    auto set = [&](uint8_t byte, Op op, Imm imm) { t[byte] = {op, imm, true}; };
    set(0x00, Op::Unreachable, Imm::None);
    set(0x01, Op::Nop, Imm::None);
    set(0x02, Op::Block, Imm::BlockType);
    set(0x03, Op::Loop, Imm::BlockType);
    set(0x04, Op::If, Imm::BlockType);
    set(0x05, Op::Else, Imm::None);
    set(0x0B, Op::End, Imm::None);
    set(0x0C, Op::Br, Imm::LabelIdx);
    set(0x0D, Op::BrIf, Imm::LabelIdx);
    set(0x0E, Op::BrTable, Imm::LabelTable);
    set(0x0F, Op::Return, Imm::None);
    set(0x10, Op::Call, Imm::FuncIdx);
    set(0x11, Op::CallIndirect, Imm::CallIndirect);
    set(0x1A, Op::Drop, Imm::None);
    set(0x1B, Op::Select, Imm::None);
    set(0x20, Op::LocalGet, Imm::LocalIdx);
    set(0x21, Op::LocalSet, Imm::LocalIdx);
    set(0x22, Op::LocalTee, Imm::LocalIdx);
    set(0x23, Op::GlobalGet, Imm::GlobalIdx);
    set(0x24, Op::GlobalSet, Imm::GlobalIdx);
    uint8_t b = 0x28;
    for (Op op : {Op::I32Load, Op::I64Load, Op::F32Load, Op::F64Load, Op::I32Load8S,
                  Op::I32Load8U, Op::I32Load16S, Op::I32Load16U, Op::I64Load8S,
                  Op::I64Load8U, Op::I64Load16S, Op::I64Load16U, Op::I64Load32S,
                  Op::I64Load32U, Op::I32Store, Op::I64Store, Op::F32Store, Op::F64Store,
                  Op::I32Store8, Op::I32Store16, Op::I64Store8, Op::I64Store16,
                  Op::I64Store32}) {
      set(b++, op, Imm::MemArg);
    }
    set(0x3F, Op::MemorySize, Imm::MemReserved);
    set(0x40, Op::MemoryGrow, Imm::MemReserved);
    set(0x41, Op::I32Const, Imm::I32);
    set(0x42, Op::I64Const, Imm::I64);
    set(0x43, Op::F32Const, Imm::F32);
    set(0x44, Op::F64Const, Imm::F64);
    b = 0x45;
    for (Op op : {Op::I32Eqz, Op::I32Eq, Op::I32Ne, Op::I32LtS, Op::I32LtU, Op::I32GtS,
                  Op::I32GtU, Op::I32LeS, Op::I32LeU, Op::I32GeS, Op::I32GeU, Op::I64Eqz,
                  Op::I64Eq, Op::I64Ne, Op::I64LtS, Op::I64LtU, Op::I64GtS, Op::I64GtU,
                  Op::I64LeS, Op::I64LeU, Op::I64GeS, Op::I64GeU, Op::F32Eq, Op::F32Ne,
                  Op::F32Lt, Op::F32Gt, Op::F32Le, Op::F32Ge, Op::F64Eq, Op::F64Ne,
                  Op::F64Lt, Op::F64Gt, Op::F64Le, Op::F64Ge, Op::I32Clz, Op::I32Ctz,
                  Op::I32Popcnt, Op::I32Add, Op::I32Sub, Op::I32Mul, Op::I32DivS,
                  Op::I32DivU, Op::I32RemS, Op::I32RemU, Op::I32And, Op::I32Or, Op::I32Xor,
                  Op::I32Shl, Op::I32ShrS, Op::I32ShrU, Op::I32Rotl, Op::I32Rotr,
                  Op::I64Clz, Op::I64Ctz, Op::I64Popcnt, Op::I64Add, Op::I64Sub, Op::I64Mul,
                  Op::I64DivS, Op::I64DivU, Op::I64RemS, Op::I64RemU, Op::I64And, Op::I64Or,
                  Op::I64Xor, Op::I64Shl, Op::I64ShrS, Op::I64ShrU, Op::I64Rotl,
                  Op::I64Rotr}) {
      set(b++, op, Imm::None);
    }
    // 0x8B..0x91 (f32 unary family) stay unsupported.
    b = 0x92;
    for (Op op : {Op::F32Add, Op::F32Sub, Op::F32Mul, Op::F32Div}) set(b++, op, Imm::None);
    b = 0xA0;
    for (Op op : {Op::F64Add, Op::F64Sub, Op::F64Mul, Op::F64Div}) set(b++, op, Imm::None);
    b = 0xA7;
    for (Op op : {Op::I32WrapI64, Op::I32TruncF32S, Op::I32TruncF32U, Op::I32TruncF64S,
                  Op::I32TruncF64U, Op::I64ExtendI32S, Op::I64ExtendI32U, Op::I64TruncF32S,
                  Op::I64TruncF32U, Op::I64TruncF64S, Op::I64TruncF64U, Op::F32ConvertI32S,
                  Op::F32ConvertI32U, Op::F32ConvertI64S, Op::F32ConvertI64U,
                  Op::F32DemoteF64, Op::F64ConvertI32S, Op::F64ConvertI32U,
                  Op::F64ConvertI64S, Op::F64ConvertI64U, Op::F64PromoteF32}) {
      set(b++, op, Imm::None);
    }
    return t;
  }();
  return table;
}

class Reader {
 public:
  Reader(std::span<const uint8_t> bytes, size_t base) : bytes_(bytes), base_(base) {}

  size_t offset() const { return base_ + pos_; }
  // Error offsets stay inside the buffer even at end-of-payload.
  size_t error_offset() const {
    return base_ + (bytes_.empty() ? 0 : std::min(pos_, bytes_.size() - 1));
  }
  size_t pos() const { return pos_; }
  bool done() const { return pos_ >= bytes_.size(); }
  size_t remaining() const { return bytes_.size() - pos_; }

  uint8_t byte() {
    if (pos_ >= bytes_.size()) {
      throw DecodeError(Kind::TruncatedSection, error_offset(), "unexpected end of payload");
    }
    return bytes_[pos_++];
  }

  uint32_t uleb32() {
    auto [value, next] = decode_uleb32(bytes_, pos_);
    pos_ = next;
    return value;
  }

  int32_t sleb32() {
    auto [value, next] = decode_sleb32(bytes_, pos_);
    pos_ = next;
    return value;
  }

  int64_t sleb64() {
    auto [value, next] = decode_sleb64(bytes_, pos_);
    pos_ = next;
    return value;
  }

  std::span<const uint8_t> raw(size_t n) {
    if (remaining() < n) {
      throw DecodeError(Kind::TruncatedSection, error_offset(), "payload shorter than declared");
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::string name() {
    uint32_t len = uleb32();
    auto body = raw(len);
    return std::string(reinterpret_cast<const char*>(body.data()), body.size());
  }

  float f32() {
    auto body = raw(4);
    float v;
    std::memcpy(&v, body.data(), 4);
    return v;
  }

  double f64() {
    auto body = raw(8);
    double v;
    std::memcpy(&v, body.data(), 8);
    return v;
  }

 private:
  std::span<const uint8_t> bytes_;
  size_t base_;
  size_t pos_ = 0;
};

ValType read_valtype(Reader& r) {
  size_t at = r.offset();
  uint8_t b = r.byte();
  switch (b) {
    case 0x7F: return ValType::I32;
    case 0x7E: return ValType::I64;
    case 0x7D: return ValType::F32;
    case 0x7C: return ValType::F64;
    default:
      throw DecodeError(Kind::UnsupportedOpcode, at, "unsupported value type", b);
  }
}

Limits read_limits(Reader& r) {
  uint8_t flag = r.byte();
  Limits limits;
  limits.min = r.uleb32();
  if (flag == 1) {
    limits.max = r.uleb32();
  } else if (flag != 0) {
    throw DecodeError(Kind::Malformed, r.offset() - 1, "malformed limits flag");
  }
  return limits;
}

// Terminators a nested instruction run can end with.
enum class Terminator { End, Else };

Terminator decode_instrs(Reader& r, std::vector<Instruction>& out, int depth) {
  if (depth > 512) {
    throw DecodeError(Kind::Malformed, r.offset(), "block nesting too deep");
  }
  for (;;) {
    size_t at = r.offset();
    uint8_t byte = r.byte();
    const OpEntry& entry = opcode_table()[byte];
    if (!entry.valid) {
      throw DecodeError(Kind::UnsupportedOpcode, at, "unsupported opcode", byte);
    }
    if (entry.op == Op::End) return Terminator::End;
    if (entry.op == Op::Else) return Terminator::Else;

    Instruction instr;
    instr.op = entry.op;
    instr.offset = static_cast<uint32_t>(at);
    switch (entry.imm) {
      case Imm::None:
        break;
      case Imm::BlockType: {
        size_t bt_at = r.offset();
        uint8_t bt = r.byte();
        if (bt == 0x40) {
          instr.block_result = std::nullopt;
        } else if (bt == 0x7F || bt == 0x7E || bt == 0x7D || bt == 0x7C) {
          instr.block_result = static_cast<ValType>(bt);
        } else {
          throw DecodeError(Kind::UnsupportedOpcode, bt_at, "unsupported block type", bt);
        }
        break;
      }
      case Imm::LabelIdx:
      case Imm::FuncIdx:
      case Imm::LocalIdx:
      case Imm::GlobalIdx:
        instr.a = r.uleb32();
        break;
      case Imm::LabelTable: {
        uint32_t count = r.uleb32();
        instr.table.reserve(count);
        for (uint32_t i = 0; i < count; ++i) instr.table.push_back(r.uleb32());
        instr.a = r.uleb32();  // default depth
        break;
      }
      case Imm::CallIndirect: {
        instr.a = r.uleb32();  // type index
        size_t rs = r.offset();
        if (r.byte() != 0) {
          throw DecodeError(Kind::Malformed, rs, "nonzero table byte in call_indirect");
        }
        break;
      }
      case Imm::MemArg:
        instr.a = r.uleb32();  // alignment
        instr.b = r.uleb32();  // offset
        break;
      case Imm::MemReserved: {
        size_t rs = r.offset();
        if (r.byte() != 0) {
          throw DecodeError(Kind::Malformed, rs, "nonzero memory index");
        }
        break;
      }
      case Imm::I32:
        instr.i64_val = r.sleb32();
        break;
      case Imm::I64:
        instr.i64_val = r.sleb64();
        break;
      case Imm::F32:
        instr.f32_val = r.f32();
        break;
      case Imm::F64:
        instr.f64_val = r.f64();
        break;
    }

    if (instr.op == Op::Block || instr.op == Op::Loop) {
      if (decode_instrs(r, instr.body, depth + 1) == Terminator::Else) {
        throw DecodeError(Kind::Malformed, r.offset(), "else outside if");
      }
    } else if (instr.op == Op::If) {
      Terminator t = decode_instrs(r, instr.body, depth + 1);
      if (t == Terminator::Else) {
        if (decode_instrs(r, instr.else_body, depth + 1) == Terminator::Else) {
          throw DecodeError(Kind::Malformed, r.offset(), "double else");
        }
      }
    }
    out.push_back(std::move(instr));
  }
}

std::vector<Instruction> decode_const_expr(Reader& r) {
  std::vector<Instruction> instrs;
  if (decode_instrs(r, instrs, 0) == Terminator::Else) {
    throw DecodeError(Kind::Malformed, r.offset(), "else in constant expression");
  }
  return instrs;
}

std::optional<uint32_t> const_i32_offset(const std::vector<Instruction>& expr) {
  if (expr.size() == 1 && expr[0].op == Op::I32Const) {
    return static_cast<uint32_t>(expr[0].i64_val);
  }
  return std::nullopt;
}

constexpr uint8_t kMagic[8] = {0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};

}  // namespace

std::vector<Instruction> decode_body(std::span<const uint8_t> bytes, size_t stream_offset) {
  Reader r(bytes, stream_offset);
  std::vector<Instruction> instrs;
  if (decode_instrs(r, instrs, 0) == Terminator::Else) {
    throw DecodeError(Kind::Malformed, r.offset(), "else outside if");
  }
  if (!r.done()) {
    throw DecodeError(Kind::Malformed, r.offset(), "trailing bytes after body end");
  }
  return instrs;
}

WasmModule decode_module(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw DecodeError(Kind::BadMagic, 0, "bad magic or version");
  }

  WasmModule mod;
  std::vector<uint32_t> declared_func_types;
  size_t pos = 8;
  int last_known_id = 0;

  while (pos < bytes.size()) {
    size_t section_at = pos;
    uint8_t id = bytes[pos++];
    auto [payload_len, after_len] = decode_uleb32(bytes, pos);
    pos = after_len;
    if (bytes.size() - pos < payload_len) {
      throw DecodeError(Kind::TruncatedSection, section_at, "section payload truncated");
    }
    Reader r(bytes.subspan(pos, payload_len), pos);
    size_t section_end = pos + payload_len;

    if (id == 0 || id == 8 || id > 11) {
      mod.skipped_sections.push_back(id);
      pos = section_end;
      continue;
    }
    if (id <= last_known_id) {
      throw DecodeError(Kind::Malformed, section_at, "section out of order");
    }
    last_known_id = id;

    switch (id) {
      case 1: {  // type
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          size_t at = r.offset();
          if (r.byte() != 0x60) {
            throw DecodeError(Kind::Malformed, at, "expected functype tag 0x60");
          }
          FuncType ft;
          uint32_t np = r.uleb32();
          for (uint32_t k = 0; k < np; ++k) ft.params.push_back(read_valtype(r));
          uint32_t nr = r.uleb32();
          if (nr > 1) {
            throw DecodeError(Kind::UnsupportedOpcode, at, "multi-value result", 0x60);
          }
          for (uint32_t k = 0; k < nr; ++k) ft.results.push_back(read_valtype(r));
          mod.types.push_back(std::move(ft));
        }
        break;
      }
      case 2: {  // import
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          Import imp;
          imp.module = r.name();
          imp.field = r.name();
          size_t at = r.offset();
          uint8_t kind = r.byte();
          switch (kind) {
            case 0x00:
              imp.kind = ExternalKind::Func;
              imp.type_index = r.uleb32();
              if (imp.type_index >= mod.types.size()) {
                throw DecodeError(Kind::Malformed, at, "import type index out of range");
              }
              break;
            case 0x01: {
              imp.kind = ExternalKind::Table;
              size_t et = r.offset();
              if (r.byte() != 0x70) {
                throw DecodeError(Kind::Malformed, et, "unsupported table element type");
              }
              imp.limits = read_limits(r);
              break;
            }
            case 0x02:
              imp.kind = ExternalKind::Memory;
              imp.limits = read_limits(r);
              break;
            case 0x03:
              imp.kind = ExternalKind::Global;
              imp.global_type = read_valtype(r);
              imp.global_mutable = r.byte() != 0;
              break;
            default:
              throw DecodeError(Kind::Malformed, at, "unknown import kind");
          }
          mod.imports.push_back(std::move(imp));
        }
        break;
      }
      case 3: {  // function
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          size_t at = r.offset();
          uint32_t type_index = r.uleb32();
          if (type_index >= mod.types.size()) {
            throw DecodeError(Kind::Malformed, at, "function type index out of range");
          }
          declared_func_types.push_back(type_index);
        }
        break;
      }
      case 4: {  // table
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          size_t at = r.offset();
          if (r.byte() != 0x70) {
            throw DecodeError(Kind::Malformed, at, "unsupported table element type");
          }
          mod.tables.push_back(read_limits(r));
        }
        break;
      }
      case 5: {  // memory
        uint32_t count = r.uleb32();
        if (count > 1) {
          throw DecodeError(Kind::UnsupportedOpcode, r.offset(), "multiple memories", 0x05);
        }
        for (uint32_t i = 0; i < count; ++i) mod.memories.push_back(read_limits(r));
        break;
      }
      case 6: {  // global
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          Global g;
          g.type = read_valtype(r);
          g.is_mutable = r.byte() != 0;
          g.init = decode_const_expr(r);
          mod.globals.push_back(std::move(g));
        }
        break;
      }
      case 7: {  // export
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          Export ex;
          ex.name = r.name();
          size_t at = r.offset();
          uint8_t kind = r.byte();
          if (kind > 3) throw DecodeError(Kind::Malformed, at, "unknown export kind");
          ex.kind = static_cast<ExternalKind>(kind);
          ex.index = r.uleb32();
          mod.exports.push_back(std::move(ex));
        }
        break;
      }
      case 9: {  // element
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          ElementSegment seg;
          seg.table_index = r.uleb32();
          seg.offset_expr = decode_const_expr(r);
          seg.const_offset = const_i32_offset(seg.offset_expr);
          uint32_t n = r.uleb32();
          for (uint32_t k = 0; k < n; ++k) seg.func_indices.push_back(r.uleb32());
          mod.elements.push_back(std::move(seg));
        }
        break;
      }
      case 10: {  // code
        uint32_t count = r.uleb32();
        if (count != declared_func_types.size()) {
          throw DecodeError(Kind::Malformed, r.offset(),
                            "code entry count differs from function section");
        }
        for (uint32_t i = 0; i < count; ++i) {
          uint32_t body_size = r.uleb32();
          size_t body_at = r.offset();
          auto body_bytes = r.raw(body_size);
          Function fn;
          fn.type_index = declared_func_types[i];
          Reader body(body_bytes, body_at);
          try {
            uint32_t local_groups = body.uleb32();
            for (uint32_t g = 0; g < local_groups; ++g) {
              uint32_t n = body.uleb32();
              if (n > 100000) {
                throw DecodeError(Kind::Malformed, body.offset(), "excessive local count");
              }
              ValType t = read_valtype(body);
              fn.locals.insert(fn.locals.end(), n, t);
            }
            if (decode_instrs(body, fn.body, 0) == Terminator::Else) {
              throw DecodeError(Kind::Malformed, body.offset(), "else outside if");
            }
            if (!body.done()) {
              throw DecodeError(Kind::Malformed, body.offset(), "trailing bytes in body");
            }
          } catch (const DecodeError& e) {
            fn.body_ok = false;
            fn.body_error = e.what();
            fn.body.clear();
            mod.diagnostics.push_back("function " + std::to_string(i) + " skipped: " + e.what());
          }
          mod.functions.push_back(std::move(fn));
        }
        break;
      }
      case 11: {  // data
        uint32_t count = r.uleb32();
        for (uint32_t i = 0; i < count; ++i) {
          DataSegment seg;
          seg.mem_index = r.uleb32();
          seg.offset_expr = decode_const_expr(r);
          seg.const_offset = const_i32_offset(seg.offset_expr);
          uint32_t len = r.uleb32();
          auto payload = r.raw(len);
          seg.bytes.assign(payload.begin(), payload.end());
          mod.data_segments.push_back(std::move(seg));
        }
        break;
      }
      default:
        break;
    }

    if (r.pos() != payload_len) {
      throw DecodeError(Kind::Malformed, pos + r.pos(), "section payload size mismatch");
    }
    pos = section_end;
  }

  if (!declared_func_types.empty() && mod.functions.empty()) {
    throw DecodeError(Kind::Malformed, bytes.size(), "function section without code section");
  }
  uint32_t total_funcs = mod.total_func_count();
  for (const Export& ex : mod.exports) {
    if (ex.kind == ExternalKind::Func && ex.index >= total_funcs) {
      throw DecodeError(Kind::Malformed, bytes.size(), "export function index out of range");
    }
  }
  for (const ElementSegment& seg : mod.elements) {
    for (uint32_t idx : seg.func_indices) {
      if (idx >= total_funcs) {
        throw DecodeError(Kind::Malformed, bytes.size(), "element function index out of range");
      }
    }
  }
  return mod;
}

}  // namespace jwbinder::wasm
