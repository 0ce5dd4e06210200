#include <filesystem>
#include <memory>
#include <fstream>

#include "doctest.h"
#include "jwbinder/interop/interop.hpp"
#include "jwbinder/js/parser.hpp"
#include "jwbinder/js/printer.hpp"
#include "jwbinder/pdg/pdg.hpp"
#include "jwbinder/wasm/decoder.hpp"
#include "support/fixtures.hpp"

using namespace jwbinder;
using js::NodeKind;

namespace {

struct Analyzed {
  std::unique_ptr<js::Ast> ast_storage;  // Pdg keeps a pointer into this
  pdg::Pdg graph;
  interop::InteropMap map;
  const js::Ast& ast = *ast_storage;
};

Analyzed analyze(const std::string& source) {
  auto ast = std::make_unique<js::Ast>(js::parse(source));
  pdg::Pdg graph = pdg::build_pdg(*ast);
  interop::InteropMap map = interop::find_interops(graph);
  return {std::move(ast), std::move(graph), std::move(map)};
}

}  // namespace

TEST_CASE("payload fixture: one site, one invocation, document.write binding") {
  Analyzed a = analyze(testsupport::payload_program_js());
  REQUIRE(a.map.instantiation_sites.size() == 1);
  const interop::Site& site = a.map.instantiation_sites[0];
  CHECK(site.api_name == "WebAssembly.instantiate");
  CHECK(site.folded_chain.size() == 1);  // the Module construction

  REQUIRE(a.map.export_invocations.size() == 1);
  CHECK(a.map.export_invocations[0].export_name == "foo");
  CHECK(a.map.export_invocations[0].site_index == 0);

  auto it = a.map.import_bindings.find({"env", "document_write"});
  REQUIRE(it != a.map.import_bindings.end());
  CHECK(js::print_expression(a.ast, it->second) == "document.write");
}

TEST_CASE("pure JS program yields an empty map") {
  Analyzed a = analyze(testsupport::pure_js_malware());
  CHECK(a.map.empty());
  CHECK(a.map.export_invocations.empty());
}

TEST_CASE("promise-parameter flow attributes the invocation to the site") {
  Analyzed a = analyze(
      "WebAssembly.instantiate(buf, imp).then((r) => r.instance.exports.run());\n");
  REQUIRE(a.map.instantiation_sites.size() == 1);
  REQUIRE(a.map.export_invocations.size() == 1);
  CHECK(a.map.export_invocations[0].export_name == "run");
  CHECK(a.map.export_invocations[0].site_index == 0);
}

TEST_CASE("exports object held in a variable still resolves") {
  Analyzed a = analyze(
      "var inst = new WebAssembly.Instance(mod, {});\n"
      "var e = inst.exports;\n"
      "e.work(1, 2);\n");
  REQUIRE(a.map.export_invocations.size() == 1);
  CHECK(a.map.export_invocations[0].export_name == "work");
}

TEST_CASE("instantiateStreaming(fetch(url)) resolves against the asset dir") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "jwb_interop_assets";
  fs::create_directories(dir);
  std::vector<uint8_t> module_bytes = testsupport::payload_module().build();
  {
    std::ofstream out(dir / "mod.wasm", std::ios::binary);
    out.write(reinterpret_cast<const char*>(module_bytes.data()),
              static_cast<std::streamsize>(module_bytes.size()));
  }
  Analyzed a = analyze(
      "WebAssembly.instantiateStreaming(fetch(\"https://x.test/mod.wasm\"), {})"
      ".then((r) => r.instance.exports.foo());\n");
  REQUIRE(a.map.instantiation_sites.size() == 1);

  interop::BinaryOrigin with_asset =
      interop::recover_binary(a.graph, a.map.instantiation_sites[0], dir.string());
  CHECK(with_asset.kind == interop::OriginKind::AssetFile);
  CHECK(with_asset.bytes == module_bytes);

  interop::BinaryOrigin without_asset =
      interop::recover_binary(a.graph, a.map.instantiation_sites[0], "");
  CHECK(without_asset.kind == interop::OriginKind::Unresolved);
  CHECK(without_asset.reason == interop::UnresolvedReason::NetworkOnly);
}

TEST_CASE("inline typed-array literal recovers the exact bytes") {
  Analyzed a = analyze(
      "var b = new Uint8Array([0, 97, 115, 109, 1, 0, 0, 0]);\n"
      "WebAssembly.instantiate(b, {});\n");
  REQUIRE(a.map.instantiation_sites.size() == 1);
  interop::BinaryOrigin origin =
      interop::recover_binary(a.graph, a.map.instantiation_sites[0], "");
  CHECK(origin.kind == interop::OriginKind::InlineTypedArray);
  CHECK(origin.bytes == std::vector<uint8_t>{0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00});
  CHECK(origin.provenance.size() >= 2);
}

TEST_CASE("atob of a base64 literal recovers the header bytes") {
  // Frozen expectation: "AGFzbQEAAAA=" is the 8-byte module header.
  Analyzed a = analyze(
      "var s = atob(\"AGFzbQEAAAA=\");\n"
      "var arr = new Uint8Array(s.length);\n"
      "for (var i = 0; i < s.length; i++) { arr[i] = s.charCodeAt(i); }\n"
      "WebAssembly.instantiate(arr, {});\n");
  REQUIRE(a.map.instantiation_sites.size() == 1);
  interop::BinaryOrigin origin =
      interop::recover_binary(a.graph, a.map.instantiation_sites[0], "");
  CHECK(origin.kind == interop::OriginKind::Base64String);
  CHECK(origin.bytes == std::vector<uint8_t>{0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00});
}

TEST_CASE("hex string fills recover through the loop") {
  Analyzed a = analyze(
      "var hex = \"0061736d01000000\";\n"
      "var arr = new Uint8Array(hex.length / 2);\n"
      "for (var i = 0; i < arr.length; i++) {\n"
      "  arr[i] = parseInt(hex.substr(i * 2, 2), 16);\n"
      "}\n"
      "new WebAssembly.Module(arr);\n");
  REQUIRE(a.map.instantiation_sites.size() == 1);
  interop::BinaryOrigin origin =
      interop::recover_binary(a.graph, a.map.instantiation_sites[0], "");
  CHECK(origin.kind == interop::OriginKind::HexString);
  CHECK(origin.bytes == std::vector<uint8_t>{0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00});
}

TEST_CASE("runtime-built buffers stay unresolved") {
  Analyzed a = analyze(
      "var buf = makeBuffer();\n"
      "WebAssembly.instantiate(buf, {});\n");
  REQUIRE(a.map.instantiation_sites.size() == 1);
  interop::BinaryOrigin origin =
      interop::recover_binary(a.graph, a.map.instantiation_sites[0], "");
  CHECK(origin.kind == interop::OriginKind::Unresolved);
  CHECK(origin.reason == interop::UnresolvedReason::DynamicConstruction);
}

TEST_CASE("find_interops is stable under reformatting") {
  std::string source = testsupport::payload_program_js();
  Analyzed original = analyze(source);
  Analyzed reprinted = analyze(js::print(original.ast));
  CHECK(original.map.instantiation_sites.size() == reprinted.map.instantiation_sites.size());
  CHECK(original.map.export_invocations.size() == reprinted.map.export_invocations.size());
  CHECK(original.map.export_invocations[0].export_name ==
        reprinted.map.export_invocations[0].export_name);
  CHECK(original.map.import_bindings.size() == reprinted.map.import_bindings.size());
}

TEST_CASE("invocation export names exist in the recovered module") {
  Analyzed a = analyze(testsupport::payload_program_js());
  interop::BinaryOrigin origin =
      interop::recover_binary(a.graph, a.map.instantiation_sites[0], "");
  REQUIRE(origin.resolved());
  wasm::WasmModule mod = wasm::decode_module(origin.bytes);
  for (const interop::Invocation& inv : a.map.export_invocations) {
    bool found = false;
    for (const wasm::Export& ex : mod.exports) {
      if (ex.name == inv.export_name) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("memory construction feeding the import object folds into the site") {
  Analyzed a = analyze(
      "var mem = new WebAssembly.Memory({ initial: 1 });\n"
      "WebAssembly.instantiate(code, { env: { memory: mem } });\n");
  REQUIRE(a.map.instantiation_sites.size() == 1);
  CHECK(a.map.instantiation_sites[0].api_name == "WebAssembly.instantiate");
}

TEST_CASE("key-API table round-trips through a file") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "jwb_key_apis.txt";
  {
    std::ofstream out(path);
    out << "# extra APIs\nWebAssembly.instantiate\ncustomLoader.boot\n";
  }
  interop::KeyApiTable table = interop::KeyApiTable::from_file(path.string());
  CHECK(table.contains("WebAssembly.instantiate"));
  CHECK(table.contains("customLoader.boot"));
  CHECK(!table.contains("WebAssembly.compile"));
}
