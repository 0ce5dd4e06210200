// Acceptance suite: every criterion runs as its own test case (and ctest
// entry) and prints one pass/fail line through the harness below.

#include <chrono>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "jwbinder/harness/metrics.hpp"
#include "jwbinder/harness/pipeline.hpp"
#include "jwbinder/harness/signatures.hpp"
#include "jwbinder/js/parser.hpp"
#include "jwbinder/js/printer.hpp"
#include "jwbinder/oracle/differential.hpp"
#include "jwbinder/pdg/pdg.hpp"
#include "jwbinder/recon/integrate.hpp"
#include "jwbinder/wasm/decoder.hpp"
#include "support/fixture_gen.hpp"
#include "support/fixtures.hpp"
#include "support/module_builder.hpp"

using namespace jwbinder;
using oracle::Value;
using testsupport::CodeWriter;
using testsupport::ModuleBuilder;
using wasm::ValType;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

harness::SignatureSet demo_signatures() {
  std::string payload = testsupport::payload_string();
  return harness::SignatureSet::from_json(
      "[{\"id\": \"doc-write-payload\", \"strings\": [\"document.write\", \"" + payload +
      "\"]},"
      "{\"id\": \"payload-only\", \"strings\": [\"" + payload + "\"]},"
      "{\"id\": \"write-in-loop\", \"strings\": [\"for (;;) {\", \"document.write(\"]}]");
}

bool rule_matched(const harness::ScanVerdict& verdict, const std::string& id) {
  for (const std::string& rule : verdict.matched_rules) {
    if (rule == id) return true;
  }
  return false;
}

std::vector<std::string> benign_corpus(const fs::path& dir) {
  std::vector<std::string> files;
  for (int i = 0; i < 50; ++i) {
    ModuleBuilder module = testsupport::benign_module(i);
    std::string name = i % 2 == 0 ? "add" : "mulshift";
    std::string source = testsupport::instantiate_program_js(module.build(), name, 2);
    fs::path file = dir / ("benign" + std::to_string(i) + ".js");
    spit(file, source);
    files.push_back(file.string());
  }
  return files;
}

}  // namespace

TEST_CASE("criterion 1: motivating-example uplift under stub signatures") {
  auto start = Clock::now();
  TempDir in("jwb_acc1_in");
  TempDir out("jwb_acc1_out");
  spit(in.path / "sample.js", testsupport::payload_program_js());

  harness::RunConfig config;
  config.out_dir = out.path.string();
  harness::FileReport report = harness::run_pipeline((in.path / "sample.js").string(), config);
  REQUIRE(report.status == "ok");
  REQUIRE(report.abstraction_failures.empty());
  REQUIRE(report.outputs.size() == 3);

  harness::SignatureSet signatures = demo_signatures();
  std::string original = testsupport::payload_program_js();
  std::string all_js = slurp(out.path / "sample.all.js");
  std::string data_js = slurp(out.path / "sample.data.js");
  std::string code_js = slurp(out.path / "sample.code.js");

  // The conjunction rule misses the original but hits the reconstruction.
  CHECK(!rule_matched(harness::scan_signatures(original, signatures), "doc-write-payload"));
  CHECK(rule_matched(harness::scan_signatures(all_js, signatures), "doc-write-payload"));
  // Data abstraction alone exposes the payload string.
  CHECK(rule_matched(harness::scan_signatures(data_js, signatures), "payload-only"));
  CHECK(!rule_matched(harness::scan_signatures(original, signatures), "payload-only"));
  // Code abstraction alone exposes the write-in-loop shape.
  CHECK(rule_matched(harness::scan_signatures(code_js, signatures), "write-in-loop"));
  CHECK(!rule_matched(harness::scan_signatures(original, signatures), "write-in-loop"));

  CHECK(seconds_since(start) < 2.0);
}

TEST_CASE("criterion 2: differential fidelity over generated functions") {
  auto start = Clock::now();
  size_t functions = 0;
  size_t total_runs = 0;
  std::vector<std::string> mismatches;
  for (uint32_t seed = 1; seed <= 100; ++seed) {
    testsupport::GeneratedFunction gen = testsupport::generate_function(seed);
    wasm::WasmModule module = wasm::decode_module(gen.module_bytes);
    auto inputs = testsupport::random_inputs(gen.signature, 20, seed * 977 + 13);
    oracle::DifferentialReport report =
        oracle::differential_check(module, gen.func_index, inputs);
    ++functions;
    total_runs += report.runs;
    for (const std::string& m : report.mismatches) {
      mismatches.push_back("seed " + std::to_string(seed) + ": " + m);
    }
  }
  CHECK(functions >= 100);
  CHECK(total_runs >= 2000);
  for (const std::string& m : mismatches) MESSAGE(m);
  CHECK(mismatches.empty());
  CHECK(seconds_since(start) < 60.0);
}

TEST_CASE("criterion 3: host-call trace fidelity on imported-function fixtures") {
  struct Fixture {
    std::string name;
    std::vector<uint8_t> bytes;
    uint32_t func;
    std::vector<std::vector<Value>> inputs;
  };
  std::vector<Fixture> fixtures;

  // 1: the payload-writer shape (loop over an imported document_write).
  {
    ModuleBuilder b = testsupport::payload_module();
    fixtures.push_back({"payload-writer", b.build(), 1, {{}}});
  }
  // 2: import result used in arithmetic.
  {
    ModuleBuilder b;
    uint32_t t_i = b.add_type({}, {ValType::I32});
    uint32_t imp = b.import_func("env", "read", t_i);
    CodeWriter w;
    w.call(imp).local_get(0).i32_add();
    uint32_t f = b.add_func(b.add_type({ValType::I32}, {ValType::I32}), {}, std::move(w));
    b.export_func("main", f);
    fixtures.push_back({"result-arith", b.build(), f, {{Value::make_i32(5)}, {Value::make_i32(-5)}}});
  }
  // 3: two imports interleaved.
  {
    ModuleBuilder b;
    uint32_t tv = b.add_type({ValType::I32}, {});
    uint32_t ia = b.import_func("env", "alpha", tv);
    uint32_t ib = b.import_func("env", "beta", tv);
    CodeWriter w;
    w.i32_const(1).call(ia).i32_const(2).call(ib).i32_const(3).call(ia);
    uint32_t f = b.add_func(b.add_type({}, {}), {}, std::move(w));
    b.export_func("main", f);
    fixtures.push_back({"interleaved", b.build(), f, {{}}});
  }
  // 4: import called in both arms of a conditional.
  {
    ModuleBuilder b;
    uint32_t tv = b.add_type({ValType::I32}, {});
    uint32_t imp = b.import_func("host", "log", tv);
    CodeWriter w;
    w.local_get(0).if_().i32_const(100).call(imp).else_().i32_const(200).call(imp).end();
    uint32_t f = b.add_func(b.add_type({ValType::I32}, {}), {}, std::move(w));
    b.export_func("main", f);
    fixtures.push_back({"branching", b.build(), f, {{Value::make_i32(0)}, {Value::make_i32(1)}}});
  }
  // 5: loop passing the counter to the import.
  {
    ModuleBuilder b;
    uint32_t tv = b.add_type({ValType::I32}, {});
    uint32_t imp = b.import_func("env", "tick", tv);
    CodeWriter w;
    w.loop()
        .local_get(0)
        .call(imp)
        .local_get(0)
        .i32_const(1)
        .i32_add()
        .local_set(0)
        .local_get(0)
        .local_get(1)
        .i32_lt_s()
        .br_if(0)
        .end();
    uint32_t f = b.add_func(b.add_type({ValType::I32, ValType::I32}, {}), {}, std::move(w));
    b.export_func("main", f);
    fixtures.push_back({"loop-args", b.build(), f,
                        {{Value::make_i32(0), Value::make_i32(4)},
                         {Value::make_i32(2), Value::make_i32(3)}}});
  }
  // 6: indirect call dispatching to an import.
  {
    ModuleBuilder b;
    uint32_t tv = b.add_type({ValType::I32}, {});
    uint32_t imp = b.import_func("env", "emit", tv);
    CodeWriter w;
    w.i32_const(9).local_get(0).call_indirect(tv);
    uint32_t f = b.add_func(b.add_type({ValType::I32}, {}), {}, std::move(w));
    b.add_table(1);
    b.add_element(0, {imp});
    b.export_func("main", f);
    fixtures.push_back({"indirect-import", b.build(), f, {{Value::make_i32(0)}}});
  }
  // 7: mixed argument types.
  {
    ModuleBuilder b;
    uint32_t tm = b.add_type({ValType::I32, ValType::I64, ValType::F64}, {});
    uint32_t imp = b.import_func("env", "mixed", tm);
    CodeWriter w;
    w.local_get(0).i64_const(1099511627776LL).f64_const(2.5).call(imp);
    uint32_t f = b.add_func(b.add_type({ValType::I32}, {}), {}, std::move(w));
    b.export_func("main", f);
    fixtures.push_back({"mixed-args", b.build(), f, {{Value::make_i32(7)}}});
  }
  // 8: repeated void calls.
  {
    ModuleBuilder b;
    uint32_t tv = b.add_type({}, {});
    uint32_t imp = b.import_func("env", "ping", tv);
    CodeWriter w;
    w.call(imp).call(imp).call(imp).call(imp);
    uint32_t f = b.add_func(tv, {}, std::move(w));
    b.export_func("main", f);
    fixtures.push_back({"repeated", b.build(), f, {{}}});
  }
  // 9: internal helper function calls the import.
  {
    ModuleBuilder b;
    uint32_t tv = b.add_type({ValType::I32}, {});
    uint32_t imp = b.import_func("env", "sink", tv);
    CodeWriter inner;
    inner.local_get(0).i32_const(2).i32_mul().call(imp);
    uint32_t helper = b.add_func(tv, {}, std::move(inner));
    CodeWriter outer;
    outer.local_get(0).call(helper).local_get(0).i32_const(1).i32_add().call(helper);
    uint32_t f = b.add_func(tv, {}, std::move(outer));
    b.export_func("main", f);
    fixtures.push_back({"via-internal", b.build(), f, {{Value::make_i32(10)}}});
  }
  // 10: one import's result feeds another import.
  {
    ModuleBuilder b;
    uint32_t t_i = b.add_type({}, {ValType::I32});
    uint32_t tv = b.add_type({ValType::I32}, {});
    uint32_t source = b.import_func("env", "source", t_i);
    uint32_t sink = b.import_func("env", "sink", tv);
    CodeWriter w;
    w.call(source).call(sink).call(source).call(sink);
    uint32_t f = b.add_func(b.add_type({}, {}), {}, std::move(w));
    b.export_func("main", f);
    fixtures.push_back({"chained", b.build(), f, {{}}});
  }

  REQUIRE(fixtures.size() == 10);
  for (const Fixture& fixture : fixtures) {
    CAPTURE(fixture.name);
    wasm::WasmModule module = wasm::decode_module(fixture.bytes);
    oracle::DifferentialReport report =
        oracle::differential_check(module, fixture.func, fixture.inputs);
    for (const std::string& m : report.mismatches) {
      std::string detail = fixture.name + ": " + m;
      MESSAGE(detail);
    }
    CHECK(report.clean());
    // The point of the criterion is the traces; make sure there are some.
    oracle::RunResult probe = oracle::interp_wasm(module, fixture.func, fixture.inputs[0]);
    CHECK(!probe.trace.calls.empty());
  }
}

TEST_CASE("criterion 4: benign corpus reconstructs clean with zero matches") {
  TempDir in("jwb_acc4_in");
  TempDir out("jwb_acc4_out");
  std::vector<std::string> files = benign_corpus(in.path);
  REQUIRE(files.size() == 50);

  harness::RunConfig config;
  config.out_dir = out.path.string();
  harness::SignatureSet signatures = demo_signatures();

  size_t outputs_checked = 0;
  for (const std::string& file : files) {
    harness::FileReport report = harness::run_pipeline(file, config);
    CAPTURE(file);
    CHECK(report.status == "ok");
    CHECK(report.abstraction_failures.empty());
    REQUIRE(report.outputs.size() == 3);
    for (const std::string& output : report.outputs) {
      std::string text = slurp(output);
      CHECK_NOTHROW(js::parse(text));                            // (a) re-parses
      CHECK(!harness::scan_signatures(text, signatures).detected);  // (b) zero matches
      ++outputs_checked;
    }
  }
  CHECK(outputs_checked == 150);
}

TEST_CASE("criterion 5: metric math reproduces the aggregate table") {
  harness::DetectionMatrix matrix;
  auto engine = [](size_t i) { return "e" + std::to_string(i); };
  auto sample = [](size_t i) { return "s" + std::to_string(i); };
  for (size_t e = 0; e < 59; ++e) matrix.set("baseline", sample(0), engine(e), false);
  auto fill = [&](const std::string& variant, size_t i, size_t count) {
    for (size_t e = 0; e < count; ++e) matrix.set(variant, sample(i), engine(e), true);
  };
  for (size_t i = 0; i < 1000; ++i) {
    fill("baseline", i, i < 509 ? 1 : (i < 509 + 337 ? 7 : 8));
    fill("data", i, i < 138 ? 1 : (i < 138 + 458 ? 9 : 10));
    fill("code", i, 1);
  }
  auto metrics = harness::compute_metrics(matrix, 2);
  CHECK(metrics["baseline"].sdr == 49.1);
  CHECK(metrics["baseline"].ade == 4.1);
  CHECK(metrics["combined"].sdr == 86.2);
  CHECK(metrics["combined"].ade == 8.3);

  harness::DetectionMatrix two;
  two.set("baseline", "a", "e0", true);
  two.set("baseline", "a", "e1", true);
  two.set("baseline", "b", "e0", true);
  two.set("baseline", "b", "e1", true);
  auto trivial = harness::compute_metrics(two, 2);
  CHECK(trivial["baseline"].sdr == 100.0);
  CHECK(trivial["baseline"].ade == 2.0);

  harness::DetectionMatrix zero;
  zero.set("baseline", "a", "e0", false);
  auto none = harness::compute_metrics(zero, 2);
  CHECK(none["baseline"].sdr == 0.0);
  CHECK(none["baseline"].ade == 0.0);
}

TEST_CASE("criterion 6: decoder conformance against the reference assembler") {
  // LEB128 examples, exact.
  {
    std::array<uint8_t, 3> classic = {0xE5, 0x8E, 0x26};
    auto [value, next] = wasm::decode_uleb32(classic, 0);
    CHECK(value == 624485u);
    CHECK(next == 3);
    std::array<uint8_t, 1> zero = {0x00};
    CHECK(wasm::decode_uleb32(zero, 0).first == 0u);
    std::array<uint8_t, 6> overlong = {0x80, 0x80, 0x80, 0x80, 0x80, 0x80};
    CHECK_THROWS_AS(wasm::decode_uleb32(overlong, 0), wasm::DecodeError);
  }

  // Builder-described corpus round-trips the declarations.
  std::vector<std::pair<std::string, ModuleBuilder>> corpus;
  corpus.emplace_back("payload", testsupport::payload_module());
  for (int i = 0; i < 10; ++i) {
    corpus.emplace_back("benign" + std::to_string(i), testsupport::benign_module(i));
  }
  {
    ModuleBuilder b;
    uint32_t t = b.add_type({ValType::I32}, {ValType::I32});
    CodeWriter w;
    w.local_get(0);
    uint32_t f = b.add_func(t, {}, std::move(w));
    b.add_table(4);
    b.add_element(1, {f, f});
    b.add_global(ValType::I32, true, [] {
      CodeWriter g;
      g.i32_const(41);
      return g;
    }());
    b.export_func("id", f);
    corpus.emplace_back("table-globals", std::move(b));
  }
  {
    ModuleBuilder b;
    b.add_memory(2, 4);
    b.add_data(0, std::string("head"));
    b.add_data(100, std::vector<uint8_t>{0, 1, 2, 3, 250});
    CodeWriter off;
    off.global_get(0);
    b.add_global(ValType::I32, false, [] {
      CodeWriter g;
      g.i32_const(7);
      return g;
    }());
    b.add_data_dynamic(std::move(off), {9, 9});
    corpus.emplace_back("data-shapes", std::move(b));
  }
  {
    corpus.emplace_back("empty", ModuleBuilder{});
  }

  for (auto& [name, builder] : corpus) {
    CAPTURE(name);
    wasm::WasmModule mod = wasm::decode_module(builder.build());
    CHECK(mod.types.size() == builder.type_count());
    CHECK(mod.imports.size() == builder.import_count());
    CHECK(mod.functions.size() == builder.func_count());
    CHECK(mod.globals.size() == builder.global_count());
    CHECK(mod.elements.size() == builder.element_count());
    CHECK(mod.memories.size() == builder.memory_count());
    REQUIRE(mod.exports.size() == builder.exports().size());
    for (size_t i = 0; i < mod.exports.size(); ++i) {
      CHECK(mod.exports[i].name == builder.exports()[i].name);
      CHECK(mod.exports[i].index == builder.exports()[i].index);
    }
    auto declared = builder.data_segments();
    REQUIRE(mod.data_segments.size() == declared.size());
    for (size_t i = 0; i < declared.size(); ++i) {
      CHECK(mod.data_segments[i].bytes == declared[i].bytes);
      if (declared[i].offset) {
        CHECK(mod.data_segments[i].const_offset == declared[i].offset);
      } else {
        CHECK(!mod.data_segments[i].const_offset.has_value());
      }
    }
    for (const wasm::Function& fn : mod.functions) CHECK(fn.body_ok);
  }

  // Generator output decodes cleanly too.
  for (uint32_t seed = 1; seed <= 30; ++seed) {
    CAPTURE(seed);
    testsupport::GeneratedFunction gen = testsupport::generate_function(seed);
    wasm::WasmModule mod = wasm::decode_module(gen.module_bytes);
    REQUIRE(mod.exports.size() == 1);
    CHECK(mod.exports[0].name == "main");
    CHECK(mod.functions.size() == 1);
    CHECK(mod.functions[0].body_ok);
  }
}

TEST_CASE("criterion 7: throughput on a large synthetic multilingual sample") {
  TempDir in("jwb_acc7_in");
  TempDir out("jwb_acc7_out");

  // A module of at least 50 KB: many small functions plus data segments.
  ModuleBuilder module;
  uint32_t bin = module.add_type({ValType::I32, ValType::I32}, {ValType::I32});
  uint32_t first = 0;
  for (int f = 0; f < 520; ++f) {
    CodeWriter w;
    w.local_get(0).local_get(1).i32_add();
    for (int k = 0; k < 20; ++k) {
      w.i32_const(f * 31 + k).i32_add();
    }
    uint32_t idx = module.add_func(bin, {}, std::move(w));
    if (f == 0) first = idx;
  }
  module.add_memory(1);
  for (int d = 0; d < 40; ++d) {
    module.add_data(static_cast<uint32_t>(d) * 300, std::string(200, 'a' + (d % 26)));
  }
  module.export_func("work", first);
  std::vector<uint8_t> bytes = module.build();
  REQUIRE(bytes.size() >= 50 * 1024);

  // A 300 KB JavaScript unit around it.
  std::string source;
  source += "var code = new Uint8Array(" + testsupport::byte_array_literal(bytes) + ");\n";
  source += "var inst = new WebAssembly.Instance(new WebAssembly.Module(code), {});\n";
  source += "var total = inst.exports.work(1, 2);\n";
  for (size_t i = 0; source.size() < 300 * 1024; ++i) {
    source += "var pad" + std::to_string(i) + " = " + std::to_string(i) +
              " * 3 + pad_seed;\n";
  }
  source += "console.log(total);\n";
  REQUIRE(source.size() >= 300 * 1024);
  spit(in.path / "large.js", source);

  harness::RunConfig config;
  config.out_dir = out.path.string();
  auto start = Clock::now();
  harness::FileReport report = harness::run_pipeline((in.path / "large.js").string(), config);
  double elapsed = seconds_since(start);
  CHECK(report.status == "ok");
  CHECK(report.interop_sites == 1);
  CHECK(report.outputs.size() == 3);
  CHECK(report.data_flow_seconds >= 0.0);
  CHECK(report.ssr_seconds > 0.0);
  std::string timing_note = "pipeline took " + std::to_string(elapsed) + "s (data-flow " +
                            std::to_string(report.data_flow_seconds) + "s, ssr " +
                            std::to_string(report.ssr_seconds) + "s)";
  MESSAGE(timing_note);
  CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 8: idempotence and no-interop identity") {
  // Parse-print idempotence across the fixture corpus.
  std::vector<std::string> corpus = {
      testsupport::payload_program_js(),
      testsupport::pure_js_malware(),
      "WebAssembly.instantiateStreaming(fetch(\"https://cdn.test/app.wasm\"), {})"
      ".then((r) => r.instance.exports.run());\n",
  };
  for (int i = 0; i < 50; ++i) {
    ModuleBuilder module = testsupport::benign_module(i);
    corpus.push_back(testsupport::instantiate_program_js(
        module.build(), i % 2 == 0 ? "add" : "mulshift", 2));
  }
  {
    TempDir in("jwb_acc8_in");
    TempDir out("jwb_acc8_out");
    spit(in.path / "sample.js", testsupport::payload_program_js());
    harness::RunConfig config;
    config.out_dir = out.path.string();
    harness::FileReport report =
        harness::run_pipeline((in.path / "sample.js").string(), config);
    REQUIRE(report.status == "ok");
    for (const std::string& output : report.outputs) corpus.push_back(slurp(output));
  }
  for (size_t i = 0; i < corpus.size(); ++i) {
    CAPTURE(i);
    js::Ast first = js::parse(corpus[i]);
    std::string printed = js::print(first);
    js::Ast second = js::parse(printed);
    CHECK(js::structurally_equal(first, second));
    CHECK(js::print(second) == printed);
  }

  // No-interop identity: reconstruction of a pure program equals printing it.
  for (const std::string& source :
       {std::string(testsupport::pure_js_malware()),
        std::string("var a = 1;\nfunction f(x) { return x + a; }\nf(2);\n")}) {
    js::Ast ast = js::parse(source);
    pdg::Pdg graph = pdg::build_pdg(ast);
    interop::InteropMap map = interop::find_interops(graph);
    REQUIRE(map.empty());
    recon::Ipdg ipdg = recon::integrate(ast, map, {}, {}, recon::Mode::All);
    CHECK(recon::reconstruct(ipdg) == js::print(ast));
    js::Ast reparsed = js::parse(recon::reconstruct(ipdg));
    CHECK(js::structurally_equal(ast, reparsed));
  }
}
