#pragma once

// Shared fixture corpus: a multilingual sample shaped like the classic
// payload-writer malware (JS instantiates a module whose exported function
// loops over an imported document.write with payload bytes in the data
// section), plus helpers for benign arithmetic samples.

#include <string>
#include <vector>

#include "support/module_builder.hpp"

namespace testsupport {

// The hidden payload string. Clearly synthetic, but shaped like the real
// thing so conjunction signatures have something to match.
const std::string& payload_string();

// Module: import env.document_write(i32,i32), memory 1, data [payload] at 0,
// export foo = loop calling document_write(0, len) three times.
ModuleBuilder payload_module();

// JS unit that hides the payload module behind a typed-array literal,
// compiles it with new WebAssembly.Module, instantiates it and calls foo.
std::string payload_program_js();

// Same behavior in pure JS (what reconstruction should expose).
std::string pure_js_malware();

// A small arithmetic module with exported add/mulshift functions and no
// suspicious strings; `variant` perturbs constants so samples differ.
ModuleBuilder benign_module(int variant);

// JS unit instantiating `bytes` from a typed-array literal and invoking
// `export_name` through instance.exports.
std::string instantiate_program_js(const std::vector<uint8_t>& bytes,
                                   const std::string& export_name, int args = 0);

// Renders bytes as a JS typed-array literal expression.
std::string byte_array_literal(const std::vector<uint8_t>& bytes);

}  // namespace testsupport
