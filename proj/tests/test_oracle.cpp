#include "doctest.h"
#include "jwbinder/oracle/differential.hpp"
#include "jwbinder/wasm/decoder.hpp"
#include "support/fixture_gen.hpp"
#include "support/fixtures.hpp"
#include "support/module_builder.hpp"

using namespace jwbinder;
using oracle::Value;
using testsupport::CodeWriter;
using testsupport::ModuleBuilder;
using wasm::ValType;

namespace {

wasm::WasmModule simple_module(std::vector<ValType> params, std::vector<ValType> results,
                               std::vector<ValType> locals, CodeWriter body) {
  ModuleBuilder b;
  uint32_t type = b.add_type(std::move(params), std::move(results));
  uint32_t func = b.add_func(type, std::move(locals), std::move(body));
  b.export_func("main", func);
  return wasm::decode_module(b.build());
}

}  // namespace

TEST_CASE("interp: add(3, 4) = 7 against brute-force addition") {
  CodeWriter w;
  w.local_get(0).local_get(1).i32_add();
  wasm::WasmModule mod = simple_module({ValType::I32, ValType::I32}, {ValType::I32}, {}, std::move(w));
  // Independent expectation: repeated increment.
  int32_t expected = 3;
  for (int i = 0; i < 4; ++i) expected += 1;
  auto r = oracle::interp_wasm(mod, 0, {Value::make_i32(3), Value::make_i32(4)});
  REQUIRE(r.trap == oracle::TrapKind::None);
  REQUIRE(r.value.has_value());
  CHECK(r.value->i32 == expected);
}

TEST_CASE("const/mul/set sequence leaves 6 in the local on both engines") {
  CodeWriter w;
  w.i32_const(2).i32_const(3).i32_mul().local_set(0).local_get(0);
  wasm::WasmModule mod = simple_module({}, {ValType::I32}, {ValType::I32}, std::move(w));
  auto r = oracle::interp_wasm(mod, 0, {});
  REQUIRE(r.value.has_value());
  CHECK(r.value->i32 == 6);
  auto report = oracle::differential_check(mod, 0, {{}});
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
}

TEST_CASE("interp: popcnt(13) = 3 by bit enumeration") {
  CodeWriter w;
  w.local_get(0).i32_popcnt();
  wasm::WasmModule mod = simple_module({ValType::I32}, {ValType::I32}, {}, std::move(w));
  int32_t expected = 0;
  for (uint32_t v = 13, bit = 0; bit < 32; ++bit) expected += (v >> bit) & 1;
  CHECK(expected == 3);
  auto r = oracle::interp_wasm(mod, 0, {Value::make_i32(13)});
  REQUIRE(r.value.has_value());
  CHECK(r.value->i32 == expected);
}

TEST_CASE("interp: loop summing 1..5 = 15 (closed form)") {
  // loc0 = counter, loc1 = accumulator
  CodeWriter w;
  w.loop()
      .local_get(0)
      .i32_const(1)
      .i32_add()
      .local_set(0)
      .local_get(1)
      .local_get(0)
      .i32_add()
      .local_set(1)
      .local_get(0)
      .i32_const(5)
      .i32_lt_s()
      .br_if(0)
      .end()
      .local_get(1);
  wasm::WasmModule mod =
      simple_module({}, {ValType::I32}, {ValType::I32, ValType::I32}, std::move(w));
  auto r = oracle::interp_wasm(mod, 0, {});
  REQUIRE(r.value.has_value());
  CHECK(r.value->i32 == 5 * 6 / 2);
}

TEST_CASE("interp: division by zero traps") {
  CodeWriter w;
  w.local_get(0).local_get(1).i32_div_s();
  wasm::WasmModule mod = simple_module({ValType::I32, ValType::I32}, {ValType::I32}, {}, std::move(w));
  auto r = oracle::interp_wasm(mod, 0, {Value::make_i32(9), Value::make_i32(0)});
  CHECK(r.trap == oracle::TrapKind::DivByZero);
}

TEST_CASE("eval: abstracted add matches the interpreter") {
  CodeWriter w;
  w.local_get(0).local_get(1).i32_add();
  wasm::WasmModule mod = simple_module({ValType::I32, ValType::I32}, {ValType::I32}, {}, std::move(w));
  ssr::NameGenerator names;
  ssr::AbstractionContext ctx = ssr::standalone_context(mod, names);
  ssr::JsFragment frag = ssr::abstract_function(ctx, 0);
  std::vector<uint8_t> memory;
  oracle::EvalBindings bindings;
  bindings.memory = &memory;
  auto out = oracle::eval_fragment(frag, {Value::make_i32(3), Value::make_i32(4)}, bindings);
  REQUIRE(out.error.empty());
  REQUIRE(out.result.value.has_value());
  CHECK(out.result.value->i32 == 7);
  CHECK(out.result.trace.calls.empty());
}

TEST_CASE("eval: bound host call is recorded in the trace") {
  ModuleBuilder b;
  uint32_t wt = b.add_type({ValType::I32}, {});
  uint32_t imp = b.import_func("env", "write", wt);
  CodeWriter w;
  w.i32_const(42).call(imp);
  uint32_t func = b.add_func(b.add_type({}, {}), {}, std::move(w));
  b.export_func("main", func);
  wasm::WasmModule mod = wasm::decode_module(b.build());
  ssr::NameGenerator names;
  ssr::AbstractionContext ctx = ssr::standalone_context(mod, names);
  ssr::JsFragment frag = ssr::abstract_function(ctx, func);
  oracle::EvalBindings bindings;
  bindings.host["env.write"] = oracle::HostStub{"env.write", std::nullopt, nullptr};
  std::vector<uint8_t> memory;
  bindings.memory = &memory;
  auto out = oracle::eval_fragment(frag, {}, bindings);
  REQUIRE(out.error.empty());
  REQUIRE(out.result.trace.calls.size() == 1);
  CHECK(out.result.trace.calls[0].callee == "env.write");
  REQUIRE(out.result.trace.calls[0].args.size() == 1);
  CHECK(out.result.trace.calls[0].args[0].i32 == 42);
}

TEST_CASE("eval: throw maps to the unreachable trap") {
  CodeWriter w;
  w.unreachable();
  wasm::WasmModule mod = simple_module({}, {}, {}, std::move(w));
  ssr::NameGenerator names;
  ssr::AbstractionContext ctx = ssr::standalone_context(mod, names);
  ssr::JsFragment frag = ssr::abstract_function(ctx, 0);
  oracle::EvalBindings bindings;
  std::vector<uint8_t> memory;
  bindings.memory = &memory;
  auto out = oracle::eval_fragment(frag, {}, bindings);
  CHECK(out.result.trap == oracle::TrapKind::Unreachable);
}

TEST_CASE("differential: add over 100 random pairs") {
  CodeWriter w;
  w.local_get(0).local_get(1).i32_add();
  wasm::WasmModule mod = simple_module({ValType::I32, ValType::I32}, {ValType::I32}, {}, std::move(w));
  wasm::FuncType sig;
  sig.params = {ValType::I32, ValType::I32};
  auto inputs = testsupport::random_inputs(sig, 100, 7);
  auto report = oracle::differential_check(mod, 0, inputs);
  CHECK(report.runs == 100);
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
}

TEST_CASE("differential: forced division traps agree") {
  CodeWriter w;
  w.local_get(0).local_get(1).i32_div_s();
  wasm::WasmModule mod = simple_module({ValType::I32, ValType::I32}, {ValType::I32}, {}, std::move(w));
  auto report = oracle::differential_check(
      mod, 0, {{Value::make_i32(5), Value::make_i32(0)}, {Value::make_i32(INT32_MIN), Value::make_i32(-1)}});
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
}

TEST_CASE("differential: payload writer traces agree including arguments") {
  wasm::WasmModule mod = wasm::decode_module(testsupport::payload_module().build());
  auto report = oracle::differential_check(mod, mod.import_func_count(), {{}});
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());

  // And the trace itself shows three writes of (0, payload length).
  auto r = oracle::interp_wasm(mod, mod.import_func_count(), {});
  REQUIRE(r.trace.calls.size() == 3);
  CHECK(r.trace.calls[0].callee == "env.document_write");
  CHECK(r.trace.calls[0].args[1].i32 ==
        static_cast<int32_t>(testsupport::payload_string().size()));
}

TEST_CASE("differential: memory load/store fidelity") {
  ModuleBuilder b;
  uint32_t type = b.add_type({ValType::I32, ValType::I32}, {ValType::I32});
  CodeWriter w;
  w.local_get(0).local_get(1).i32_store(2, 0).local_get(0).i32_load(2, 0).i32_const(1).i32_add();
  uint32_t func = b.add_func(type, {}, std::move(w));
  b.add_memory(1);
  b.add_data(16, std::vector<uint8_t>{1, 2, 3, 4});
  b.export_func("main", func);
  wasm::WasmModule mod = wasm::decode_module(b.build());
  auto report = oracle::differential_check(
      mod, 0,
      {{Value::make_i32(0), Value::make_i32(123456)},
       {Value::make_i32(16), Value::make_i32(-1)},
       {Value::make_i32(65533), Value::make_i32(9)},      // partially out of bounds
       {Value::make_i32(-4), Value::make_i32(7)}});       // far out of bounds
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
}

TEST_CASE("differential: indirect calls through the dispatch stub") {
  ModuleBuilder b;
  uint32_t bin = b.add_type({ValType::I32, ValType::I32}, {ValType::I32});
  CodeWriter add;
  add.local_get(0).local_get(1).i32_add();
  uint32_t add_fn = b.add_func(bin, {}, std::move(add));
  CodeWriter mul;
  mul.local_get(0).local_get(1).i32_mul();
  uint32_t mul_fn = b.add_func(bin, {}, std::move(mul));
  CodeWriter outer;  // main(sel, x): table[sel & 1](x, 10)
  outer.local_get(0)
      .local_get(1)
      .i32_const(10)
      .local_get(0)
      .i32_const(1)
      .raw(0x71)  // i32.and
      .call_indirect(bin);
  (void)outer;
  // params of outer: (i32 sel, i32 x) -> i32; rebuild with correct arg order:
  CodeWriter outer2;
  outer2.local_get(1).i32_const(10).local_get(0).i32_const(1).raw(0x71).call_indirect(bin);
  uint32_t outer_fn = b.add_func(bin, {}, std::move(outer2));
  b.add_table(2);
  b.add_element(0, {add_fn, mul_fn});
  b.export_func("main", outer_fn);
  wasm::WasmModule mod = wasm::decode_module(b.build());
  auto report = oracle::differential_check(mod, outer_fn,
                                           {{Value::make_i32(0), Value::make_i32(5)},
                                            {Value::make_i32(1), Value::make_i32(5)},
                                            {Value::make_i32(2), Value::make_i32(-3)},
                                            {Value::make_i32(3), Value::make_i32(-3)}});
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
}

TEST_CASE("differential: br_table lowering") {
  ModuleBuilder b;
  uint32_t type = b.add_type({ValType::I32}, {ValType::I32});
  CodeWriter w;
  w.block()
      .block()
      .block()
      .local_get(0)
      .br_table({0, 1}, 2)
      .end()
      .i32_const(100)
      .ret()
      .end()
      .i32_const(200)
      .ret()
      .end()
      .i32_const(300);
  uint32_t func = b.add_func(type, {}, std::move(w));
  b.export_func("main", func);
  wasm::WasmModule mod = wasm::decode_module(b.build());
  auto report = oracle::differential_check(mod, func,
                                           {{Value::make_i32(0)},
                                            {Value::make_i32(1)},
                                            {Value::make_i32(2)},
                                            {Value::make_i32(77)},
                                            {Value::make_i32(-1)}});
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
}

TEST_CASE("differential: wide i64 constants round-trip through the i64 helper") {
  CodeWriter w;
  w.i64_const(0x7FFFFFFFFFFFFFF1LL).local_get(0).raw(0x7C);  // i64.add
  wasm::WasmModule mod = simple_module({ValType::I64}, {ValType::I64}, {}, std::move(w));
  auto report = oracle::differential_check(
      mod, 0, {{Value::make_i64(1)}, {Value::make_i64(-99999999999LL)}, {Value::make_i64(20)}});
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
}

TEST_CASE("differential: recursion through internal calls") {
  // fact(n) = n <= 1 ? 1 : n * fact(n - 1)
  ModuleBuilder b;
  uint32_t type = b.add_type({ValType::I32}, {ValType::I32});
  CodeWriter w;
  w.local_get(0)
      .i32_const(1)
      .raw(0x4C)  // i32.le_s
      .if_(ValType::I32)
      .i32_const(1)
      .else_()
      .local_get(0)
      .local_get(0)
      .i32_const(1)
      .i32_sub()
      .call(1)  // self (func index 1 after import count 0 => defined index 0... set below)
      .i32_mul()
      .end();
  // Function index 0 is this function itself (no imports).
  CodeWriter fixed;
  fixed.local_get(0)
      .i32_const(1)
      .raw(0x4C)
      .if_(ValType::I32)
      .i32_const(1)
      .else_()
      .local_get(0)
      .local_get(0)
      .i32_const(1)
      .i32_sub()
      .call(0)
      .i32_mul()
      .end();
  uint32_t func = b.add_func(type, {}, std::move(fixed));
  b.export_func("main", func);
  wasm::WasmModule mod = wasm::decode_module(b.build());
  auto report = oracle::differential_check(
      mod, func, {{Value::make_i32(0)}, {Value::make_i32(1)}, {Value::make_i32(6)}});
  for (const auto& m : report.mismatches) MESSAGE(m);
  CHECK(report.clean());
  auto r = oracle::interp_wasm(mod, func, {Value::make_i32(6)});
  REQUIRE(r.value.has_value());
  CHECK(r.value->i32 == 720);
}

TEST_CASE("differential: generated corpus smoke run") {
  for (uint32_t seed = 1; seed <= 10; ++seed) {
    auto gen = testsupport::generate_function(seed);
    wasm::WasmModule mod = wasm::decode_module(gen.module_bytes);
    auto inputs = testsupport::random_inputs(gen.signature, 5, seed * 31 + 1);
    auto report = oracle::differential_check(mod, gen.func_index, inputs);
    CAPTURE(seed);
    for (const auto& m : report.mismatches) MESSAGE(m);
    CHECK(report.clean());
  }
}
