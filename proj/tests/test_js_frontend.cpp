#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "jwbinder/js/parser.hpp"
#include "jwbinder/js/printer.hpp"

using namespace jwbinder::js;

namespace {

NodeId find_first(const Ast& ast, NodeKind kind) {
  NodeId found = kNoNode;
  ast.for_each_node([&](NodeId id, const Node& n) {
    if (found == kNoNode && n.kind == kind) found = id;
  });
  return found;
}

bool round_trips(const std::string& source) {
  Ast a = parse(source);
  std::string printed = print(a);
  Ast b = parse(printed);
  return structurally_equal(a, b);
}

}  // namespace

TEST_CASE("minimal declaration") {
  Ast ast = parse("var a = 1;");
  const Node& program = ast.node(ast.root());
  REQUIRE(program.kind == NodeKind::Program);
  REQUIRE(program.children.size() == 1);
  const Node& decl = ast.node(program.children[0]);
  CHECK(decl.kind == NodeKind::VariableDeclaration);
  const Node& declarator = ast.node(decl.children[0]);
  CHECK(ast.node(declarator.children[0]).text == "a");
  CHECK(ast.node(declarator.children[1]).kind == NodeKind::NumberLiteral);
  CHECK(ast.node(declarator.children[1]).num == 1.0);
}

TEST_CASE("instantiation chain parses with WebAssembly.Module construction") {
  const char* source =
      "var importObject = { env: { document_write: document.write } };\n"
      "var wasmCode = new Uint8Array([0, 97, 115, 109]);\n"
      "var wasmModule = new WebAssembly.Module(wasmCode);\n"
      "WebAssembly.instantiate(wasmModule, importObject).then(function (wasmInstance) {\n"
      "  wasmInstance.foo();\n"
      "});\n";
  Ast ast = parse(source);
  NodeId new_expr = find_first(ast, NodeKind::NewExpression);
  REQUIRE(new_expr != kNoNode);
  // First NewExpression in the arena is Uint8Array; look for one whose callee
  // is MemberExpression(WebAssembly, Module).
  bool found = false;
  ast.for_each_node([&](NodeId, const Node& n) {
    if (n.kind != NodeKind::NewExpression) return;
    const Node& callee = ast.node(n.children[0]);
    if (callee.kind != NodeKind::MemberExpression) return;
    if (ast.node(callee.children[0]).text == "WebAssembly" &&
        ast.node(callee.children[1]).text == "Module") {
      found = true;
    }
  });
  CHECK(found);
  CHECK(round_trips(source));
}

TEST_CASE("malformed input reports position") {
  try {
    parse("var = ;");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() == 1);
    CHECK(e.col() == 5);
    CHECK(e.expected() == "identifier");
  }
}

TEST_CASE("unsupported constructs are rejected") {
  CHECK_THROWS_AS(parse("class A {}"), SyntaxError);
  CHECK_THROWS_AS(parse("import x from \"y\";"), SyntaxError);
  CHECK_THROWS_AS(parse("async function f() {}"), SyntaxError);
  CHECK_THROWS_AS(parse("for (var k in o) {}"), SyntaxError);
  CHECK_THROWS_AS(parse("switch (x) { default: }"), SyntaxError);
  CHECK_THROWS_AS(parse("var r = /ab+/;"), SyntaxError);
}

TEST_CASE("assignment statement prints canonically") {
  Ast ast;
  NodeId program = ast.make(NodeKind::Program);
  ast.set_root(program);
  NodeId assign = ast.make(NodeKind::AssignStatement);
  ast.node(assign).text = "=";
  NodeId v = ast.make(NodeKind::Identifier);
  ast.node(v).text = "v";
  NodeId e = ast.make(NodeKind::Identifier);
  ast.node(e).text = "e";
  ast.attach(assign, v);
  ast.attach(assign, e);
  ast.attach(program, assign);
  CHECK(print(ast) == "v = e;\n");
}

TEST_CASE("labeled loop with break prints canonically") {
  Ast ast = parse("L0: for (;;) { break L0; }");
  CHECK(print(ast) == "L0: for (;;) {\n  break L0;\n}\n");
}

TEST_CASE("parse-print-parse is idempotent") {
  const char* samples[] = {
      "if (a) { b(); }",
      "var a = 1;",
      "let x = a ? b : c;",
      "const s = \"hi\\n\";",
      "a.b.c(1, 2)[d] = e + f * -g;",
      "function f(a, b) { return a + b; }",
      "var f = function (x) { return x; };",
      "var g = (a, b) => a * b;",
      "var h = (x) => { return x; };",
      "for (var i = 0; i < 10; i++) { s += i; }",
      "while (x > 0) { x--; }",
      "try { f(); } catch (e) { g(e); } finally { h(); }",
      "var o = { a: 1, \"b c\": 2, 3: d, env: { write: g } };",
      "var arr = [1, \"two\", [3]];",
      "x = y = z;",
      "if (a) { b(); } else if (c) { d(); } else { e(); }",
      "L: while (a) { if (b) { continue L; } break; }",
      "var t = `a${b}c${d + 1}`;",
      "new WebAssembly.Instance(m, io).exports.run();",
      "fetch(\"m.wasm\").then((r) => r.arrayBuffer()).then((b) => WebAssembly.instantiate(b, {}));",
      "var n = typeof x == \"undefined\" ? 0 : -x;",
      "(function () { done(); })();",
      "a = b - (c - d);",
      "q = (a + b) * c << 2;",
      "u = -(-v);",
      "var big = 1e21, tiny = 1e-7, pi = 3.14159;",
      "document[\"wri\" + \"te\"](payload);",
      "var empty = {};",
      "if (!(a && b) || ~c) { d(); }",
      "",
  };
  for (const char* s : samples) {
    CAPTURE(s);
    CHECK(round_trips(s));
  }
}

TEST_CASE("printing is deterministic") {
  const char* source = "var a = 1;\nfunction f(x) { return x * 2; }\nf(a);";
  Ast one = parse(source);
  Ast two = parse(source);
  CHECK(print(one) == print(two));
  CHECK(print(one) == print(parse(print(one))));
}

TEST_CASE("span invariants hold") {
  const char* source = "var a = 1; if (a) { f(a + 2); }";
  Ast ast = parse(source);
  // Pre-order traversal visits nondecreasing start offsets; child spans are
  // contained in the parent span.
  std::vector<NodeId> stack = {ast.root()};
  uint32_t last_begin = 0;
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    const Node& n = ast.node(id);
    CHECK(n.span.begin >= last_begin);
    last_begin = n.span.begin;
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
      if (*it == kNoNode) continue;
      const Node& child = ast.node(*it);
      CHECK(child.span.begin >= n.span.begin);
      CHECK(child.span.end <= n.span.end);
      CHECK(child.parent == id);
      stack.push_back(*it);
    }
  }
}

TEST_CASE("identifiers keep their lexemes") {
  Ast ast = parse("var wasmInstance = obj.$prop_1;");
  bool saw = false;
  ast.for_each_node([&](NodeId, const Node& n) {
    if (n.kind == NodeKind::Identifier && n.text == "$prop_1") saw = true;
  });
  CHECK(saw);
}

TEST_CASE("number formatting is shortest round-trip") {
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(624485.0) == "624485");
  CHECK(format_number(-0.0) == "0");
}

TEST_CASE("empty program prints empty") {
  CHECK(print(parse("")) == "");
}

TEST_CASE("top-level return is accepted") {
  CHECK(round_trips("return x + 1;"));
}

TEST_CASE("garbage input raises SyntaxError, never crashes") {
  std::mt19937 rng(1234);
  const char alphabet[] = "abz019 \t\n(){}[];,.+-*/%<>=!&|^~?:\"'`$_\\";
  for (int round = 0; round < 500; ++round) {
    std::string source;
    size_t length = rng() % 60;
    for (size_t i = 0; i < length; ++i) {
      source += alphabet[rng() % (sizeof alphabet - 1)];
    }
    try {
      Ast ast = parse(source);
      // Accepted inputs must round-trip like any other program.
      CHECK(structurally_equal(ast, parse(print(ast))));
    } catch (const SyntaxError&) {
      // Expected for most of the garbage.
    }
  }
}

TEST_CASE("strings with raw bytes survive a print-parse cycle") {
  Ast ast;
  NodeId program = ast.make(NodeKind::Program);
  ast.set_root(program);
  NodeId stmt = ast.make(NodeKind::ExpressionStatement);
  NodeId lit = ast.make(NodeKind::StringLiteral);
  std::string value;
  for (int i = 0; i < 256; ++i) value += static_cast<char>(i);
  ast.node(lit).text = value;
  ast.attach(stmt, lit);
  ast.attach(program, stmt);
  std::string printed = print(ast);
  Ast back = parse(printed);
  NodeId lit2 = find_first(back, NodeKind::StringLiteral);
  REQUIRE(lit2 != kNoNode);
  CHECK(back.node(lit2).text == value);
}
