#pragma once

#include <map>

#include "jwbinder/interop/interop.hpp"
#include "jwbinder/ssr/abstraction.hpp"

namespace jwbinder::recon {

enum class Mode : uint8_t { Code, Data, All };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& name);  // throws std::invalid_argument

enum class SpliceKind : uint8_t {
  InvocationReplacement,
  InstantiationInsertion,
  HelperPrelude,
};

struct Splice {
  js::NodeId position;  // node in the output tree the splice anchored to
  SpliceKind kind;
};

// The integrated program: a private copy of the analyzed tree with
// abstractions spliced at the interoperation positions.
struct Ipdg {
  js::Ast ast;
  std::vector<Splice> splices;
};

// Splices fragments into a copy of `program`:
//  - Code and All: each export invocation is replaced by its fragment, with
//    actual arguments bound to the fragment parameters through fresh const
//    declarations; invocations in expression position are hoisted before the
//    enclosing statement and the call is substituted by the fragment's
//    result expression.
//  - Data and All: each instantiation site gains its module's data fragment
//    immediately before the enclosing statement.
//  - One helper prelude at the top when any spliced fragment uses helpers.
// `code_fragments` is keyed by export-invocation index, `data_fragments` by
// site index; missing entries (unresolved binaries, failed abstractions)
// leave the program untouched at that position.
Ipdg integrate(const js::Ast& program, const interop::InteropMap& interops,
               const std::map<size_t, ssr::JsFragment>& code_fragments,
               const std::map<size_t, ssr::JsFragment>& data_fragments, Mode mode);

// Prints the integrated program (parse-valid, deterministic).
std::string reconstruct(const Ipdg& ipdg);

}  // namespace jwbinder::recon
