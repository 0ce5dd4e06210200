#include "jwbinder/wasm/module.hpp"

#include <stdexcept>

namespace jwbinder::wasm {

const char* valtype_name(ValType t) {
  switch (t) {
    case ValType::I32: return "i32";
    case ValType::I64: return "i64";
    case ValType::F32: return "f32";
    case ValType::F64: return "f64";
  }
  return "?";
}

const char* mnemonic(Op op) {
  switch (op) {
    case Op::Unreachable: return "unreachable";
    case Op::Nop: return "nop";
    case Op::Block: return "block";
    case Op::Loop: return "loop";
    case Op::If: return "if";
    case Op::Else: return "else";
    case Op::End: return "end";
    case Op::Br: return "br";
    case Op::BrIf: return "br_if";
    case Op::BrTable: return "br_table";
    case Op::Return: return "return";
    case Op::Call: return "call";
    case Op::CallIndirect: return "call_indirect";
    case Op::Drop: return "drop";
    case Op::Select: return "select";
    case Op::LocalGet: return "local.get";
    case Op::LocalSet: return "local.set";
    case Op::LocalTee: return "local.tee";
    case Op::GlobalGet: return "global.get";
    case Op::GlobalSet: return "global.set";
    case Op::I32Load: return "i32.load";
    case Op::I64Load: return "i64.load";
    case Op::F32Load: return "f32.load";
    case Op::F64Load: return "f64.load";
    case Op::I32Load8S: return "i32.load8_s";
    case Op::I32Load8U: return "i32.load8_u";
    case Op::I32Load16S: return "i32.load16_s";
    case Op::I32Load16U: return "i32.load16_u";
    case Op::I64Load8S: return "i64.load8_s";
    case Op::I64Load8U: return "i64.load8_u";
    case Op::I64Load16S: return "i64.load16_s";
    case Op::I64Load16U: return "i64.load16_u";
    case Op::I64Load32S: return "i64.load32_s";
    case Op::I64Load32U: return "i64.load32_u";
    case Op::I32Store: return "i32.store";
    case Op::I64Store: return "i64.store";
    case Op::F32Store: return "f32.store";
    case Op::F64Store: return "f64.store";
    case Op::I32Store8: return "i32.store8";
    case Op::I32Store16: return "i32.store16";
    case Op::I64Store8: return "i64.store8";
    case Op::I64Store16: return "i64.store16";
    case Op::I64Store32: return "i64.store32";
    case Op::MemorySize: return "memory.size";
    case Op::MemoryGrow: return "memory.grow";
    case Op::I32Const: return "i32.const";
    case Op::I64Const: return "i64.const";
    case Op::F32Const: return "f32.const";
    case Op::F64Const: return "f64.const";
    case Op::I32Eqz: return "i32.eqz";
    case Op::I32Eq: return "i32.eq";
    case Op::I32Ne: return "i32.ne";
    case Op::I32LtS: return "i32.lt_s";
    case Op::I32LtU: return "i32.lt_u";
    case Op::I32GtS: return "i32.gt_s";
    case Op::I32GtU: return "i32.gt_u";
    case Op::I32LeS: return "i32.le_s";
    case Op::I32LeU: return "i32.le_u";
    case Op::I32GeS: return "i32.ge_s";
    case Op::I32GeU: return "i32.ge_u";
    case Op::I64Eqz: return "i64.eqz";
    case Op::I64Eq: return "i64.eq";
    case Op::I64Ne: return "i64.ne";
    case Op::I64LtS: return "i64.lt_s";
    case Op::I64LtU: return "i64.lt_u";
    case Op::I64GtS: return "i64.gt_s";
    case Op::I64GtU: return "i64.gt_u";
    case Op::I64LeS: return "i64.le_s";
    case Op::I64LeU: return "i64.le_u";
    case Op::I64GeS: return "i64.ge_s";
    case Op::I64GeU: return "i64.ge_u";
    case Op::F32Eq: return "f32.eq";
    case Op::F32Ne: return "f32.ne";
    case Op::F32Lt: return "f32.lt";
    case Op::F32Gt: return "f32.gt";
    case Op::F32Le: return "f32.le";
    case Op::F32Ge: return "f32.ge";
    case Op::F64Eq: return "f64.eq";
    case Op::F64Ne: return "f64.ne";
    case Op::F64Lt: return "f64.lt";
    case Op::F64Gt: return "f64.gt";
    case Op::F64Le: return "f64.le";
    case Op::F64Ge: return "f64.ge";
    case Op::I32Clz: return "i32.clz";
    case Op::I32Ctz: return "i32.ctz";
    case Op::I32Popcnt: return "i32.popcnt";
    case Op::I32Add: return "i32.add";
    case Op::I32Sub: return "i32.sub";
    case Op::I32Mul: return "i32.mul";
    case Op::I32DivS: return "i32.div_s";
    case Op::I32DivU: return "i32.div_u";
    case Op::I32RemS: return "i32.rem_s";
    case Op::I32RemU: return "i32.rem_u";
    case Op::I32And: return "i32.and";
    case Op::I32Or: return "i32.or";
    case Op::I32Xor: return "i32.xor";
    case Op::I32Shl: return "i32.shl";
    case Op::I32ShrS: return "i32.shr_s";
    case Op::I32ShrU: return "i32.shr_u";
    case Op::I32Rotl: return "i32.rotl";
    case Op::I32Rotr: return "i32.rotr";
    case Op::I64Clz: return "i64.clz";
    case Op::I64Ctz: return "i64.ctz";
    case Op::I64Popcnt: return "i64.popcnt";
    case Op::I64Add: return "i64.add";
    case Op::I64Sub: return "i64.sub";
    case Op::I64Mul: return "i64.mul";
    case Op::I64DivS: return "i64.div_s";
    case Op::I64DivU: return "i64.div_u";
    case Op::I64RemS: return "i64.rem_s";
    case Op::I64RemU: return "i64.rem_u";
    case Op::I64And: return "i64.and";
    case Op::I64Or: return "i64.or";
    case Op::I64Xor: return "i64.xor";
    case Op::I64Shl: return "i64.shl";
    case Op::I64ShrS: return "i64.shr_s";
    case Op::I64ShrU: return "i64.shr_u";
    case Op::I64Rotl: return "i64.rotl";
    case Op::I64Rotr: return "i64.rotr";
    case Op::F32Add: return "f32.add";
    case Op::F32Sub: return "f32.sub";
    case Op::F32Mul: return "f32.mul";
    case Op::F32Div: return "f32.div";
    case Op::F64Add: return "f64.add";
    case Op::F64Sub: return "f64.sub";
    case Op::F64Mul: return "f64.mul";
    case Op::F64Div: return "f64.div";
    case Op::I32WrapI64: return "i32.wrap_i64";
    case Op::I32TruncF32S: return "i32.trunc_f32_s";
    case Op::I32TruncF32U: return "i32.trunc_f32_u";
    case Op::I32TruncF64S: return "i32.trunc_f64_s";
    case Op::I32TruncF64U: return "i32.trunc_f64_u";
    case Op::I64ExtendI32S: return "i64.extend_i32_s";
    case Op::I64ExtendI32U: return "i64.extend_i32_u";
    case Op::I64TruncF32S: return "i64.trunc_f32_s";
    case Op::I64TruncF32U: return "i64.trunc_f32_u";
    case Op::I64TruncF64S: return "i64.trunc_f64_s";
    case Op::I64TruncF64U: return "i64.trunc_f64_u";
    case Op::F32ConvertI32S: return "f32.convert_i32_s";
    case Op::F32ConvertI32U: return "f32.convert_i32_u";
    case Op::F32ConvertI64S: return "f32.convert_i64_s";
    case Op::F32ConvertI64U: return "f32.convert_i64_u";
    case Op::F32DemoteF64: return "f32.demote_f64";
    case Op::F64ConvertI32S: return "f64.convert_i32_s";
    case Op::F64ConvertI32U: return "f64.convert_i32_u";
    case Op::F64ConvertI64S: return "f64.convert_i64_s";
    case Op::F64ConvertI64U: return "f64.convert_i64_u";
    case Op::F64PromoteF32: return "f64.promote_f32";
  }
  return "?";
}

const Import& WasmModule::func_import(uint32_t index) const {
  uint32_t n = 0;
  for (const Import& imp : imports) {
    if (imp.kind == ExternalKind::Func) {
      if (n == index) return imp;
      ++n;
    }
  }
  throw std::out_of_range("imported function index out of range");
}

const FuncType& WasmModule::func_type(uint32_t index) const {
  if (is_imported_func(index)) return types.at(func_import(index).type_index);
  return types.at(functions.at(index - import_func_count()).type_index);
}

std::optional<OpSignature> value_op_signature(Op op) {
  using VT = ValType;
  auto sig = [](std::vector<VT> params, std::optional<VT> result) {
    return OpSignature{std::move(params), result};
  };
  switch (op) {
    case Op::I32Const: return sig({}, VT::I32);
    case Op::I64Const: return sig({}, VT::I64);
    case Op::F32Const: return sig({}, VT::F32);
    case Op::F64Const: return sig({}, VT::F64);

    case Op::I32Eqz: return sig({VT::I32}, VT::I32);
    case Op::I64Eqz: return sig({VT::I64}, VT::I32);
    case Op::I32Clz:
    case Op::I32Ctz:
    case Op::I32Popcnt: return sig({VT::I32}, VT::I32);
    case Op::I64Clz:
    case Op::I64Ctz:
    case Op::I64Popcnt: return sig({VT::I64}, VT::I64);

    case Op::I32Eq: case Op::I32Ne: case Op::I32LtS: case Op::I32LtU:
    case Op::I32GtS: case Op::I32GtU: case Op::I32LeS: case Op::I32LeU:
    case Op::I32GeS: case Op::I32GeU:
      return sig({VT::I32, VT::I32}, VT::I32);
    case Op::I64Eq: case Op::I64Ne: case Op::I64LtS: case Op::I64LtU:
    case Op::I64GtS: case Op::I64GtU: case Op::I64LeS: case Op::I64LeU:
    case Op::I64GeS: case Op::I64GeU:
      return sig({VT::I64, VT::I64}, VT::I32);
    case Op::F32Eq: case Op::F32Ne: case Op::F32Lt: case Op::F32Gt:
    case Op::F32Le: case Op::F32Ge:
      return sig({VT::F32, VT::F32}, VT::I32);
    case Op::F64Eq: case Op::F64Ne: case Op::F64Lt: case Op::F64Gt:
    case Op::F64Le: case Op::F64Ge:
      return sig({VT::F64, VT::F64}, VT::I32);

    case Op::I32Add: case Op::I32Sub: case Op::I32Mul: case Op::I32DivS:
    case Op::I32DivU: case Op::I32RemS: case Op::I32RemU: case Op::I32And:
    case Op::I32Or: case Op::I32Xor: case Op::I32Shl: case Op::I32ShrS:
    case Op::I32ShrU: case Op::I32Rotl: case Op::I32Rotr:
      return sig({VT::I32, VT::I32}, VT::I32);
    case Op::I64Add: case Op::I64Sub: case Op::I64Mul: case Op::I64DivS:
    case Op::I64DivU: case Op::I64RemS: case Op::I64RemU: case Op::I64And:
    case Op::I64Or: case Op::I64Xor: case Op::I64Shl: case Op::I64ShrS:
    case Op::I64ShrU: case Op::I64Rotl: case Op::I64Rotr:
      return sig({VT::I64, VT::I64}, VT::I64);
    case Op::F32Add: case Op::F32Sub: case Op::F32Mul: case Op::F32Div:
      return sig({VT::F32, VT::F32}, VT::F32);
    case Op::F64Add: case Op::F64Sub: case Op::F64Mul: case Op::F64Div:
      return sig({VT::F64, VT::F64}, VT::F64);

    case Op::I32WrapI64: return sig({VT::I64}, VT::I32);
    case Op::I32TruncF32S: case Op::I32TruncF32U: return sig({VT::F32}, VT::I32);
    case Op::I32TruncF64S: case Op::I32TruncF64U: return sig({VT::F64}, VT::I32);
    case Op::I64ExtendI32S: case Op::I64ExtendI32U: return sig({VT::I32}, VT::I64);
    case Op::I64TruncF32S: case Op::I64TruncF32U: return sig({VT::F32}, VT::I64);
    case Op::I64TruncF64S: case Op::I64TruncF64U: return sig({VT::F64}, VT::I64);
    case Op::F32ConvertI32S: case Op::F32ConvertI32U: return sig({VT::I32}, VT::F32);
    case Op::F32ConvertI64S: case Op::F32ConvertI64U: return sig({VT::I64}, VT::F32);
    case Op::F32DemoteF64: return sig({VT::F64}, VT::F32);
    case Op::F64ConvertI32S: case Op::F64ConvertI32U: return sig({VT::I32}, VT::F64);
    case Op::F64ConvertI64S: case Op::F64ConvertI64U: return sig({VT::I64}, VT::F64);
    case Op::F64PromoteF32: return sig({VT::F32}, VT::F64);

    default:
      return std::nullopt;
  }
}

}  // namespace jwbinder::wasm
