#include "jwbinder/oracle/values.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace jwbinder::oracle {

using wasm::Op;
using wasm::ValType;

Value Value::zero_of(ValType t) {
  switch (t) {
    case ValType::I32: return make_i32(0);
    case ValType::I64: return make_i64(0);
    case ValType::F32: return make_f32(0);
    case ValType::F64: return make_f64(0);
  }
  return make_i32(0);
}

double Value::as_double() const {
  switch (type) {
    case ValType::I32: return i32;
    case ValType::I64: return static_cast<double>(i64);
    case ValType::F32: return f32;
    case ValType::F64: return f64;
  }
  return 0;
}

bool Value::truthy() const {
  switch (type) {
    case ValType::I32: return i32 != 0;
    case ValType::I64: return i64 != 0;
    case ValType::F32: return f32 != 0;
    case ValType::F64: return f64 != 0;
  }
  return false;
}

bool Value::exact_equals(const Value& other) const {
  if (type != other.type) return false;
  switch (type) {
    case ValType::I32: return i32 == other.i32;
    case ValType::I64: return i64 == other.i64;
    case ValType::F32: {
      if (std::isnan(f32) || std::isnan(other.f32)) {
        return std::isnan(f32) && std::isnan(other.f32);
      }
      uint32_t a, b;
      std::memcpy(&a, &f32, 4);
      std::memcpy(&b, &other.f32, 4);
      return a == b;
    }
    case ValType::F64: {
      if (std::isnan(f64) || std::isnan(other.f64)) {
        return std::isnan(f64) && std::isnan(other.f64);
      }
      uint64_t a, b;
      std::memcpy(&a, &f64, 8);
      std::memcpy(&b, &other.f64, 8);
      return a == b;
    }
  }
  return false;
}

std::string Value::to_string() const {
  switch (type) {
    case ValType::I32: return "i32:" + std::to_string(i32);
    case ValType::I64: return "i64:" + std::to_string(i64);
    case ValType::F32: return "f32:" + std::to_string(f32);
    case ValType::F64: return "f64:" + std::to_string(f64);
  }
  return "?";
}

const char* trap_name(TrapKind k) {
  switch (k) {
    case TrapKind::None: return "none";
    case TrapKind::DivByZero: return "div-by-zero";
    case TrapKind::IntegerOverflow: return "integer-overflow";
    case TrapKind::InvalidConversion: return "invalid-conversion";
    case TrapKind::Unreachable: return "unreachable";
    case TrapKind::OobMemory: return "oob-memory";
    case TrapKind::BadIndirect: return "bad-indirect";
    case TrapKind::Fuel: return "fuel-exhausted";
  }
  return "?";
}

bool HostTrace::operator==(const HostTrace& other) const {
  if (calls.size() != other.calls.size()) return false;
  for (size_t i = 0; i < calls.size(); ++i) {
    if (calls[i].callee != other.calls[i].callee) return false;
    if (calls[i].args.size() != other.calls[i].args.size()) return false;
    for (size_t j = 0; j < calls[i].args.size(); ++j) {
      if (!calls[i].args[j].exact_equals(other.calls[i].args[j])) return false;
    }
  }
  return true;
}

namespace {

int32_t wrap32(uint32_t v) { return static_cast<int32_t>(v); }
uint32_t u32(int32_t v) { return static_cast<uint32_t>(v); }
uint64_t u64(int64_t v) { return static_cast<uint64_t>(v); }

template <typename F>
int32_t check_trunc(F x, double lo, double hi) {
  if (std::isnan(x)) throw EvalTrap{TrapKind::InvalidConversion};
  double t = std::trunc(static_cast<double>(x));
  if (t < lo || t > hi) throw EvalTrap{TrapKind::InvalidConversion};
  return 0;  // caller recomputes; this validates only
}

}  // namespace

Value apply_value_op(Op op, std::span<const Value> args) {
  auto a = [&](size_t i) { return args[i]; };
  auto bi32 = [&](auto f) { return Value::make_i32(wrap32(f(u32(a(0).i32), u32(a(1).i32)))); };
  auto bi64 = [&](auto f) {
    return Value::make_i64(static_cast<int64_t>(f(u64(a(0).i64), u64(a(1).i64))));
  };
  auto cmp = [&](bool v) { return Value::make_i32(v ? 1 : 0); };

  switch (op) {
    case Op::I32Add: return bi32([](uint32_t x, uint32_t y) { return x + y; });
    case Op::I32Sub: return bi32([](uint32_t x, uint32_t y) { return x - y; });
    case Op::I32Mul: return bi32([](uint32_t x, uint32_t y) { return x * y; });
    case Op::I32DivS: {
      int32_t x = a(0).i32, y = a(1).i32;
      if (y == 0) throw EvalTrap{TrapKind::DivByZero};
      if (x == INT32_MIN && y == -1) throw EvalTrap{TrapKind::IntegerOverflow};
      return Value::make_i32(x / y);
    }
    case Op::I32DivU: {
      if (a(1).i32 == 0) throw EvalTrap{TrapKind::DivByZero};
      return Value::make_i32(wrap32(u32(a(0).i32) / u32(a(1).i32)));
    }
    case Op::I32RemS: {
      int32_t x = a(0).i32, y = a(1).i32;
      if (y == 0) throw EvalTrap{TrapKind::DivByZero};
      if (x == INT32_MIN && y == -1) return Value::make_i32(0);
      return Value::make_i32(x % y);
    }
    case Op::I32RemU: {
      if (a(1).i32 == 0) throw EvalTrap{TrapKind::DivByZero};
      return Value::make_i32(wrap32(u32(a(0).i32) % u32(a(1).i32)));
    }
    case Op::I32And: return bi32([](uint32_t x, uint32_t y) { return x & y; });
    case Op::I32Or: return bi32([](uint32_t x, uint32_t y) { return x | y; });
    case Op::I32Xor: return bi32([](uint32_t x, uint32_t y) { return x ^ y; });
    case Op::I32Shl: return bi32([](uint32_t x, uint32_t y) { return x << (y & 31); });
    case Op::I32ShrS:
      return Value::make_i32(a(0).i32 >> (u32(a(1).i32) & 31));
    case Op::I32ShrU: return bi32([](uint32_t x, uint32_t y) { return x >> (y & 31); });
    case Op::I32Rotl: return bi32([](uint32_t x, uint32_t y) { return std::rotl(x, static_cast<int>(y & 31)); });
    case Op::I32Rotr: return bi32([](uint32_t x, uint32_t y) { return std::rotr(x, static_cast<int>(y & 31)); });
    case Op::I32Clz: return Value::make_i32(std::countl_zero(u32(a(0).i32)));
    case Op::I32Ctz: return Value::make_i32(std::countr_zero(u32(a(0).i32)));
    case Op::I32Popcnt: return Value::make_i32(std::popcount(u32(a(0).i32)));
    case Op::I32Eqz: return cmp(a(0).i32 == 0);
    case Op::I32Eq: return cmp(a(0).i32 == a(1).i32);
    case Op::I32Ne: return cmp(a(0).i32 != a(1).i32);
    case Op::I32LtS: return cmp(a(0).i32 < a(1).i32);
    case Op::I32LtU: return cmp(u32(a(0).i32) < u32(a(1).i32));
    case Op::I32GtS: return cmp(a(0).i32 > a(1).i32);
    case Op::I32GtU: return cmp(u32(a(0).i32) > u32(a(1).i32));
    case Op::I32LeS: return cmp(a(0).i32 <= a(1).i32);
    case Op::I32LeU: return cmp(u32(a(0).i32) <= u32(a(1).i32));
    case Op::I32GeS: return cmp(a(0).i32 >= a(1).i32);
    case Op::I32GeU: return cmp(u32(a(0).i32) >= u32(a(1).i32));

    case Op::I64Add: return bi64([](uint64_t x, uint64_t y) { return x + y; });
    case Op::I64Sub: return bi64([](uint64_t x, uint64_t y) { return x - y; });
    case Op::I64Mul: return bi64([](uint64_t x, uint64_t y) { return x * y; });
    case Op::I64DivS: {
      int64_t x = a(0).i64, y = a(1).i64;
      if (y == 0) throw EvalTrap{TrapKind::DivByZero};
      if (x == INT64_MIN && y == -1) throw EvalTrap{TrapKind::IntegerOverflow};
      return Value::make_i64(x / y);
    }
    case Op::I64DivU: {
      if (a(1).i64 == 0) throw EvalTrap{TrapKind::DivByZero};
      return Value::make_i64(static_cast<int64_t>(u64(a(0).i64) / u64(a(1).i64)));
    }
    case Op::I64RemS: {
      int64_t x = a(0).i64, y = a(1).i64;
      if (y == 0) throw EvalTrap{TrapKind::DivByZero};
      if (x == INT64_MIN && y == -1) return Value::make_i64(0);
      return Value::make_i64(x % y);
    }
    case Op::I64RemU: {
      if (a(1).i64 == 0) throw EvalTrap{TrapKind::DivByZero};
      return Value::make_i64(static_cast<int64_t>(u64(a(0).i64) % u64(a(1).i64)));
    }
    case Op::I64And: return bi64([](uint64_t x, uint64_t y) { return x & y; });
    case Op::I64Or: return bi64([](uint64_t x, uint64_t y) { return x | y; });
    case Op::I64Xor: return bi64([](uint64_t x, uint64_t y) { return x ^ y; });
    case Op::I64Shl: return bi64([](uint64_t x, uint64_t y) { return x << (y & 63); });
    case Op::I64ShrS: return Value::make_i64(a(0).i64 >> (u64(a(1).i64) & 63));
    case Op::I64ShrU: return bi64([](uint64_t x, uint64_t y) { return x >> (y & 63); });
    case Op::I64Rotl: return bi64([](uint64_t x, uint64_t y) { return std::rotl(x, static_cast<int>(y & 63)); });
    case Op::I64Rotr: return bi64([](uint64_t x, uint64_t y) { return std::rotr(x, static_cast<int>(y & 63)); });
    case Op::I64Clz: return Value::make_i64(std::countl_zero(u64(a(0).i64)));
    case Op::I64Ctz: return Value::make_i64(std::countr_zero(u64(a(0).i64)));
    case Op::I64Popcnt: return Value::make_i64(std::popcount(u64(a(0).i64)));
    case Op::I64Eqz: return cmp(a(0).i64 == 0);
    case Op::I64Eq: return cmp(a(0).i64 == a(1).i64);
    case Op::I64Ne: return cmp(a(0).i64 != a(1).i64);
    case Op::I64LtS: return cmp(a(0).i64 < a(1).i64);
    case Op::I64LtU: return cmp(u64(a(0).i64) < u64(a(1).i64));
    case Op::I64GtS: return cmp(a(0).i64 > a(1).i64);
    case Op::I64GtU: return cmp(u64(a(0).i64) > u64(a(1).i64));
    case Op::I64LeS: return cmp(a(0).i64 <= a(1).i64);
    case Op::I64LeU: return cmp(u64(a(0).i64) <= u64(a(1).i64));
    case Op::I64GeS: return cmp(a(0).i64 >= a(1).i64);
    case Op::I64GeU: return cmp(u64(a(0).i64) >= u64(a(1).i64));

    case Op::F32Add: return Value::make_f32(a(0).f32 + a(1).f32);
    case Op::F32Sub: return Value::make_f32(a(0).f32 - a(1).f32);
    case Op::F32Mul: return Value::make_f32(a(0).f32 * a(1).f32);
    case Op::F32Div: return Value::make_f32(a(0).f32 / a(1).f32);
    case Op::F64Add: return Value::make_f64(a(0).f64 + a(1).f64);
    case Op::F64Sub: return Value::make_f64(a(0).f64 - a(1).f64);
    case Op::F64Mul: return Value::make_f64(a(0).f64 * a(1).f64);
    case Op::F64Div: return Value::make_f64(a(0).f64 / a(1).f64);
    case Op::F32Eq: return cmp(a(0).f32 == a(1).f32);
    case Op::F32Ne: return cmp(a(0).f32 != a(1).f32);
    case Op::F32Lt: return cmp(a(0).f32 < a(1).f32);
    case Op::F32Gt: return cmp(a(0).f32 > a(1).f32);
    case Op::F32Le: return cmp(a(0).f32 <= a(1).f32);
    case Op::F32Ge: return cmp(a(0).f32 >= a(1).f32);
    case Op::F64Eq: return cmp(a(0).f64 == a(1).f64);
    case Op::F64Ne: return cmp(a(0).f64 != a(1).f64);
    case Op::F64Lt: return cmp(a(0).f64 < a(1).f64);
    case Op::F64Gt: return cmp(a(0).f64 > a(1).f64);
    case Op::F64Le: return cmp(a(0).f64 <= a(1).f64);
    case Op::F64Ge: return cmp(a(0).f64 >= a(1).f64);

    case Op::I32WrapI64: return Value::make_i32(static_cast<int32_t>(u64(a(0).i64)));
    case Op::I32TruncF32S:
      check_trunc(a(0).f32, -2147483648.0, 2147483647.0);
      return Value::make_i32(static_cast<int32_t>(std::trunc(a(0).f32)));
    case Op::I32TruncF64S:
      check_trunc(a(0).f64, -2147483648.0, 2147483647.0);
      return Value::make_i32(static_cast<int32_t>(std::trunc(a(0).f64)));
    case Op::I32TruncF32U:
      check_trunc(a(0).f32, 0.0, 4294967295.0);
      return Value::make_i32(wrap32(static_cast<uint32_t>(std::trunc(a(0).f32))));
    case Op::I32TruncF64U:
      check_trunc(a(0).f64, 0.0, 4294967295.0);
      return Value::make_i32(wrap32(static_cast<uint32_t>(std::trunc(a(0).f64))));
    case Op::I64ExtendI32S: return Value::make_i64(a(0).i32);
    case Op::I64ExtendI32U: return Value::make_i64(static_cast<int64_t>(u32(a(0).i32)));
    case Op::I64TruncF32S:
      check_trunc(a(0).f32, -9223372036854775808.0, 9223372036854774784.0);
      return Value::make_i64(static_cast<int64_t>(std::trunc(a(0).f32)));
    case Op::I64TruncF64S:
      check_trunc(a(0).f64, -9223372036854775808.0, 9223372036854774784.0);
      return Value::make_i64(static_cast<int64_t>(std::trunc(a(0).f64)));
    case Op::I64TruncF32U:
      check_trunc(a(0).f32, 0.0, 18446744073709549568.0);
      return Value::make_i64(static_cast<int64_t>(static_cast<uint64_t>(std::trunc(a(0).f32))));
    case Op::I64TruncF64U:
      check_trunc(a(0).f64, 0.0, 18446744073709549568.0);
      return Value::make_i64(static_cast<int64_t>(static_cast<uint64_t>(std::trunc(a(0).f64))));
    case Op::F32ConvertI32S: return Value::make_f32(static_cast<float>(a(0).i32));
    case Op::F32ConvertI32U: return Value::make_f32(static_cast<float>(u32(a(0).i32)));
    case Op::F32ConvertI64S: return Value::make_f32(static_cast<float>(a(0).i64));
    case Op::F32ConvertI64U: return Value::make_f32(static_cast<float>(u64(a(0).i64)));
    case Op::F32DemoteF64: return Value::make_f32(static_cast<float>(a(0).f64));
    case Op::F64ConvertI32S: return Value::make_f64(a(0).i32);
    case Op::F64ConvertI32U: return Value::make_f64(u32(a(0).i32));
    case Op::F64ConvertI64S: return Value::make_f64(static_cast<double>(a(0).i64));
    case Op::F64ConvertI64U: return Value::make_f64(static_cast<double>(u64(a(0).i64)));
    case Op::F64PromoteF32: return Value::make_f64(a(0).f32);
    default:
      throw EvalTrap{TrapKind::Unreachable};
  }
}

}  // namespace jwbinder::oracle
