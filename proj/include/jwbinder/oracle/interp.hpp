#pragma once

#include <map>

#include "jwbinder/oracle/values.hpp"
#include "jwbinder/wasm/module.hpp"

namespace jwbinder::oracle {

struct InterpOptions {
  uint64_t fuel = 50'000'000;
  size_t max_call_depth = 256;
  uint32_t max_pages = 64;
};

// Linear memory initialized from the module's data segments (constant
// offsets only), sized from the memory section.
std::vector<uint8_t> initial_memory(const wasm::WasmModule& module);

// Reference stack-machine interpreter over the supported opcode subset.
// `host` maps module-wide function indices of imports to stubs; missing
// entries get a default zero-returning stub labeled "module.field".
RunResult interp_wasm(const wasm::WasmModule& module, uint32_t func_index,
                      const std::vector<Value>& args,
                      const std::map<uint32_t, HostStub>& host = {},
                      const InterpOptions& options = {});

}  // namespace jwbinder::oracle
