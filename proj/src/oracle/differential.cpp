#include "jwbinder/oracle/differential.hpp"

namespace jwbinder::oracle {

using wasm::ValType;
using wasm::WasmModule;

namespace {

Value stub_result(ValType type, size_t ordinal) {
  // Deterministic and ordinal-dependent so call results are observable.
  int64_t seed = static_cast<int64_t>(ordinal) * 2654435761LL + 97;
  switch (type) {
    case ValType::I32: return Value::make_i32(static_cast<int32_t>(seed));
    case ValType::I64: return Value::make_i64(seed);
    case ValType::F32: return Value::make_f32(static_cast<float>(seed % 1000));
    case ValType::F64: return Value::make_f64(static_cast<double>(seed % 100000));
  }
  return Value::make_i32(0);
}

HostStub make_stub(const std::string& label, std::optional<ValType> result_type) {
  HostStub stub;
  stub.label = label;
  stub.result_type = result_type;
  stub.behavior = [result_type](size_t ordinal, const std::vector<Value>&) {
    return stub_result(result_type.value_or(ValType::I32), ordinal);
  };
  return stub;
}

std::string describe(const RunResult& r) {
  std::string out = "trap=" + std::string(trap_name(r.trap));
  out += " value=" + (r.value ? r.value->to_string() : std::string("none"));
  out += " calls=" + std::to_string(r.trace.calls.size());
  for (const HostCall& c : r.trace.calls) {
    out += " [" + c.callee;
    for (const Value& a : c.args) out += " " + a.to_string();
    out += "]";
  }
  return out;
}

}  // namespace

DifferentialReport differential_check(const WasmModule& module, uint32_t func_index,
                                      const std::vector<std::vector<Value>>& inputs) {
  DifferentialReport report;

  ssr::NameGenerator names;
  ssr::AbstractionContext ctx = ssr::standalone_context(module, names);
  ssr::JsFragment frag;
  try {
    frag = ssr::abstract_function(ctx, func_index);
  } catch (const ssr::AbstractionError& e) {
    report.mismatches.push_back(std::string("abstraction failed: ") + e.what());
    return report;
  }

  // Host maps for the two sides share labels; stub results depend only on
  // the per-run call ordinal.
  std::map<uint32_t, HostStub> interp_host;
  std::map<std::string, HostStub> eval_host;
  uint32_t import_index = 0;
  for (const wasm::Import& imp : module.imports) {
    if (imp.kind != wasm::ExternalKind::Func) continue;
    const wasm::FuncType& sig = module.types[imp.type_index];
    std::optional<ValType> rt =
        sig.results.empty() ? std::nullopt : std::make_optional(sig.results[0]);
    std::string label = imp.module + "." + imp.field;
    interp_host[import_index] = make_stub(label, rt);
    eval_host[label] = make_stub(label, rt);
    ++import_index;
  }

  for (size_t i = 0; i < inputs.size(); ++i) {
    ++report.runs;
    RunResult expected = interp_wasm(module, func_index, inputs[i], interp_host);

    std::vector<uint8_t> memory = initial_memory(module);
    EvalBindings bindings;
    bindings.host = eval_host;
    bindings.memory = &memory;
    EvalOutcome actual = eval_fragment(frag, inputs[i], bindings);

    auto flag = [&](const std::string& why) {
      report.mismatches.push_back("input " + std::to_string(i) + ": " + why +
                                  "\n  interp: " + describe(expected) +
                                  "\n  eval:   " + describe(actual.result));
    };

    if (!actual.error.empty()) {
      flag("evaluator error: " + actual.error);
      continue;
    }
    if (expected.trap != actual.result.trap) {
      flag("trap mismatch");
      continue;
    }
    if (expected.trap == TrapKind::None) {
      bool expected_has = expected.value.has_value();
      bool actual_has = actual.result.value.has_value();
      if (expected_has != actual_has) {
        // A fragment may compute a result expression the interpreter
        // discards only when the function is void; anything else is a bug.
        if (expected_has || !actual_has) {
          flag("result presence mismatch");
          continue;
        }
      } else if (expected_has && !expected.value->exact_equals(*actual.result.value)) {
        flag("result value mismatch");
        continue;
      }
    }
    if (!(expected.trace == actual.result.trace)) flag("host trace mismatch");
  }
  return report;
}

}  // namespace jwbinder::oracle
