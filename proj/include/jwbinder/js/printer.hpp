#pragma once

#include <string>

#include "jwbinder/js/ast.hpp"

namespace jwbinder::js {

// Deterministic code generation: two-space indent, one statement per line,
// semicolons always, double-quoted strings, numbers in shortest round-trip
// decimal form. Identical ASTs produce byte-identical text.
std::string print(const Ast& ast);

// Prints a single expression subtree (used for interop labels and reports).
std::string print_expression(const Ast& ast, NodeId expr);

std::string format_number(double value);

}  // namespace jwbinder::js
