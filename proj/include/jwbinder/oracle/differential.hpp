#pragma once

#include "jwbinder/oracle/eval.hpp"
#include "jwbinder/oracle/interp.hpp"

namespace jwbinder::oracle {

struct DifferentialReport {
  size_t runs = 0;
  std::vector<std::string> mismatches;  // one line per disagreement

  bool clean() const { return mismatches.empty(); }
};

// Abstracts `func_index` with standalone import bindings, then runs the
// interpreter and the fragment evaluator side by side on every input vector,
// comparing result, host-call trace and trap status exactly. Host stubs
// return deterministic values derived from the call ordinal so import
// results feed back into both executions identically.
DifferentialReport differential_check(const wasm::WasmModule& module, uint32_t func_index,
                                      const std::vector<std::vector<Value>>& inputs);

}  // namespace jwbinder::oracle
