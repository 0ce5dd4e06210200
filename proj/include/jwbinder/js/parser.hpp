#pragma once

#include <string_view>

#include "jwbinder/js/ast.hpp"
#include "jwbinder/js/lexer.hpp"

namespace jwbinder::js {

// Parses a program in the supported ECMAScript subset. Throws SyntaxError for
// anything outside the subset (modules, classes, generators, async/await,
// regex literals, switch, for-in/of, ...).
//
// Bodies of if/else/for/while are normalized to BlockStatement so that
// printing is unambiguous; parse(print(parse(s))) is structurally equal to
// parse(s) because both sides normalize. `return` is accepted at top level
// (reconstruction splices function-shaped statement sequences into statement
// positions).
Ast parse(std::string_view source);

}  // namespace jwbinder::js
