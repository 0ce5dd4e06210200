#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jwbinder/wasm/module.hpp"

namespace jwbinder::oracle {

// Tagged runtime value with two's-complement 32/64-bit integer semantics.
struct Value {
  wasm::ValType type = wasm::ValType::I32;
  int32_t i32 = 0;
  int64_t i64 = 0;
  float f32 = 0;
  double f64 = 0;

  static Value make_i32(int32_t v) { return {wasm::ValType::I32, v, 0, 0, 0}; }
  static Value make_i64(int64_t v) { return {wasm::ValType::I64, 0, v, 0, 0}; }
  static Value make_f32(float v) { return {wasm::ValType::F32, 0, 0, v, 0}; }
  static Value make_f64(double v) { return {wasm::ValType::F64, 0, 0, 0, v}; }
  static Value zero_of(wasm::ValType t);

  double as_double() const;
  bool truthy() const;

  // Integers exact; floats bitwise except NaNs, which compare by NaN-ness.
  bool exact_equals(const Value& other) const;

  std::string to_string() const;
};

enum class TrapKind : uint8_t {
  None,
  DivByZero,
  IntegerOverflow,
  InvalidConversion,
  Unreachable,
  OobMemory,
  BadIndirect,
  Fuel,
};

const char* trap_name(TrapKind k);

struct EvalTrap {
  TrapKind kind;
};

struct HostCall {
  std::string callee;
  std::vector<Value> args;
};

struct HostTrace {
  std::vector<HostCall> calls;
  bool operator==(const HostTrace& other) const;
};

struct RunResult {
  std::optional<Value> value;
  TrapKind trap = TrapKind::None;
  HostTrace trace;
};

// An imported function stand-in shared by interpreter and evaluator runs:
// records its calls and produces deterministic results.
struct HostStub {
  std::string label;
  std::optional<wasm::ValType> result_type;
  std::function<Value(size_t ordinal, const std::vector<Value>& args)> behavior;

  Value invoke(size_t ordinal, const std::vector<Value>& args) const {
    if (behavior) return behavior(ordinal, args);
    return Value::zero_of(result_type.value_or(wasm::ValType::I32));
  }
};

// Applies a pure value operator (const excluded) with exact semantics.
// Throws EvalTrap for division by zero, overflow and invalid conversions.
Value apply_value_op(wasm::Op op, std::span<const Value> args);

}  // namespace jwbinder::oracle
