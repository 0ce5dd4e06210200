#pragma once

#include <map>

#include "jwbinder/oracle/values.hpp"
#include "jwbinder/ssr/abstraction.hpp"

namespace jwbinder::oracle {

struct EvalBindings {
  std::map<std::string, HostStub> host;    // printed callee text -> stub
  std::vector<uint8_t>* memory = nullptr;  // bound linear-memory image
  uint32_t max_pages = 64;
};

// Evaluates an abstraction fragment with exact operator semantics taken from
// its type tags. Supports exactly the emitted statement forms (const/let,
// assignments, labeled for(;;), if/else, break/continue, calls, indexed
// memory access, return, throw). Host calls are matched by printing the
// callee expression against the binding labels and are recorded in the
// trace. RunResult.trap mirrors the interpreter's trap kinds; an internal
// evaluator error (a form outside the supported grammar) is reported
// separately so tests fail loudly instead of silently passing.
struct EvalOutcome {
  RunResult result;
  std::string error;  // nonempty on evaluator-internal failure
};

EvalOutcome eval_fragment(const ssr::JsFragment& frag, const std::vector<Value>& args,
                          EvalBindings& bindings, uint64_t fuel = 50'000'000);

}  // namespace jwbinder::oracle
