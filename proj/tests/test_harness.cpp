#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "jwbinder/harness/metrics.hpp"
#include "jwbinder/harness/pipeline.hpp"
#include "jwbinder/harness/scanner_client.hpp"
#include "jwbinder/harness/signatures.hpp"
#include "support/fixtures.hpp"

using namespace jwbinder;
namespace fs = std::filesystem;

namespace {

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

// A detection matrix consistent with the published aggregate numbers:
// baseline 49.1% SDR / 4.1 ADE, combined 86.2% / 8.3 over 1000 samples.
harness::DetectionMatrix aggregate_matrix() {
  harness::DetectionMatrix matrix;
  auto engine = [](size_t i) { return "e" + std::to_string(i); };
  auto sample = [](size_t i) { return "s" + std::to_string(i); };
  // Register all engines so rows are rectangular.
  for (size_t e = 0; e < 59; ++e) matrix.set("baseline", sample(0), engine(e), false);

  auto fill = [&](const std::string& variant, size_t i, size_t count) {
    for (size_t e = 0; e < count; ++e) matrix.set(variant, sample(i), engine(e), true);
  };
  for (size_t i = 0; i < 1000; ++i) {
    // Baseline: 509 samples with 1 engine, 337 with 7, 154 with 8.
    size_t baseline_count = i < 509 ? 1 : (i < 509 + 337 ? 7 : 8);
    fill("baseline", i, baseline_count);
    // Combined target: 138 samples with 1 engine, 458 with 9, 404 with 10,
    // realized as data = full set, code = one engine (OR equals data).
    size_t combined_count = i < 138 ? 1 : (i < 138 + 458 ? 9 : 10);
    fill("data", i, combined_count);
    fill("code", i, 1);
    matrix.set("all", sample(i), engine(0), combined_count > 0);
  }
  return matrix;
}

}  // namespace

TEST_CASE("stub signatures: conjunction matching on fixture outputs") {
  TempDir in("jwb_h_sig_in");
  TempDir out("jwb_h_sig_out");
  spit(in.path / "sample.js", testsupport::payload_program_js());
  harness::RunConfig config;
  config.out_dir = out.path.string();
  harness::FileReport report = harness::run_pipeline((in.path / "sample.js").string(), config);
  REQUIRE(report.status == "ok");

  harness::SignatureSet signatures = demo_signatures();
  std::string original = slurp(in.path / "sample.js");
  std::string all = slurp(out.path / "sample.all.js");

  auto original_verdict = harness::scan_signatures(original, signatures);
  bool original_hits_payload_rule = false;
  for (const std::string& rule : original_verdict.matched_rules) {
    if (rule == "doc-write-payload") original_hits_payload_rule = true;
  }
  CHECK(!original_hits_payload_rule);

  auto all_verdict = harness::scan_signatures(all, signatures);
  CHECK(all_verdict.detected);
  CHECK(all_verdict.matched_rules.size() == 3);

  harness::SignatureSet empty;
  CHECK(!harness::scan_signatures(all, empty).detected);
}

TEST_CASE("metrics: trivial matrices") {
  harness::DetectionMatrix two;
  two.set("baseline", "a", "e0", true);
  two.set("baseline", "a", "e1", true);
  two.set("baseline", "b", "e0", true);
  two.set("baseline", "b", "e1", true);
  auto m = harness::compute_metrics(two, 2);
  CHECK(m["baseline"].sdr == 100.0);
  CHECK(m["baseline"].ade == 2.0);

  harness::DetectionMatrix zero;
  zero.set("baseline", "a", "e0", false);
  auto z = harness::compute_metrics(zero, 2);
  CHECK(z["baseline"].sdr == 0.0);
  CHECK(z["baseline"].ade == 0.0);

  harness::DetectionMatrix empty;
  CHECK_THROWS_AS(harness::compute_metrics(empty, 2), std::invalid_argument);
}

TEST_CASE("metrics: aggregate-consistent matrix reproduces the published numbers") {
  auto metrics = harness::compute_metrics(aggregate_matrix(), 2);
  CHECK(metrics["baseline"].sdr == 49.1);
  CHECK(metrics["baseline"].ade == 4.1);
  CHECK(metrics["combined"].sdr == 86.2);
  CHECK(metrics["combined"].ade == 8.3);
}

TEST_CASE("metrics: order-invariant under sample permutation") {
  harness::DetectionMatrix forward, backward;
  for (int i = 0; i < 10; ++i) {
    for (int e = 0; e < 3; ++e) {
      bool hit = (i + e) % 3 == 0;
      forward.set("baseline", "s" + std::to_string(i), "e" + std::to_string(e), hit);
      backward.set("baseline", "s" + std::to_string(9 - i), "e" + std::to_string(e),
                   (9 - i + e) % 3 == 0);
    }
  }
  auto a = harness::compute_metrics(forward, 2);
  auto b = harness::compute_metrics(backward, 2);
  CHECK(a["baseline"].sdr == b["baseline"].sdr);
  CHECK(a["baseline"].ade == b["baseline"].ade);
}

TEST_CASE("pipeline: empty file is valid with zero sites") {
  TempDir in("jwb_h_empty_in");
  TempDir out("jwb_h_empty_out");
  spit(in.path / "empty.js", "");
  harness::RunConfig config;
  config.out_dir = out.path.string();
  harness::FileReport report = harness::run_pipeline((in.path / "empty.js").string(), config);
  CHECK(report.status == "ok");
  CHECK(report.interop_sites == 0);
  REQUIRE(report.outputs.size() == 3);
  for (const std::string& o : report.outputs) CHECK(slurp(o).empty());
}

TEST_CASE("pipeline: network-only binary is flagged and code output skips the unit") {
  TempDir in("jwb_h_net_in");
  TempDir out("jwb_h_net_out");
  spit(in.path / "net.js",
       "WebAssembly.instantiateStreaming(fetch(\"https://cdn.test/app.wasm\"), {})"
       ".then((r) => r.instance.exports.run());\n");
  harness::RunConfig config;
  config.out_dir = out.path.string();
  harness::FileReport report = harness::run_pipeline((in.path / "net.js").string(), config);
  CHECK(report.status == "ok");
  REQUIRE(report.binaries.size() == 1);
  CHECK(report.binaries[0].kind == "unresolved");
  CHECK(report.binaries[0].reason == "network-only");
  std::string code = slurp(out.path / "net.code.js");
  CHECK(code.find("exports.run()") != std::string::npos);  // left untouched
}

TEST_CASE("pipeline: invocation of a missing export is reported, not fatal") {
  TempDir in("jwb_h_miss_in");
  TempDir out("jwb_h_miss_out");
  testsupport::ModuleBuilder module = testsupport::benign_module(0);
  std::string source =
      "var code = new Uint8Array(" + testsupport::byte_array_literal(module.build()) + ");\n" +
      "var inst = new WebAssembly.Instance(new WebAssembly.Module(code), {});\n" +
      "inst.exports.missing(1);\n";
  spit(in.path / "m.js", source);
  harness::RunConfig config;
  config.out_dir = out.path.string();
  harness::FileReport report = harness::run_pipeline((in.path / "m.js").string(), config);
  CHECK(report.status == "ok");
  REQUIRE(report.abstraction_failures.size() == 1);
  CHECK(report.abstraction_failures[0].find("missing") != std::string::npos);
  // The invocation stays verbatim in the output.
  CHECK(slurp(out.path / "m.all.js").find("inst.exports.missing(1);") != std::string::npos);
}

TEST_CASE("pipeline: assets-dir resolves streamed modules end to end") {
  TempDir in("jwb_h_assets_in");
  TempDir out("jwb_h_assets_out");
  TempDir assets("jwb_h_assets_dir");
  std::vector<uint8_t> bytes = testsupport::payload_module().build();
  {
    std::ofstream wasm(assets.path / "app.wasm", std::ios::binary);
    wasm.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
  }
  spit(in.path / "streamed.js",
       "var io = { env: { document_write: document.write } };\n"
       "WebAssembly.instantiateStreaming(fetch(\"https://cdn.test/app.wasm\"), io)"
       ".then((r) => r.instance.exports.foo());\n");
  harness::RunConfig config;
  config.out_dir = out.path.string();
  config.assets_dir = assets.path.string();
  harness::FileReport report =
      harness::run_pipeline((in.path / "streamed.js").string(), config);
  CHECK(report.status == "ok");
  REQUIRE(report.binaries.size() == 1);
  CHECK(report.binaries[0].kind == "asset-file");
  CHECK(report.binaries[0].decoded);
  std::string all = slurp(out.path / "streamed.all.js");
  CHECK(all.find(testsupport::payload_string()) != std::string::npos);
  CHECK(all.find("document.write(") != std::string::npos);
}

TEST_CASE("pipeline: unparseable files are recorded, not fatal") {
  TempDir in("jwb_h_bad_in");
  TempDir out("jwb_h_bad_out");
  spit(in.path / "bad.js", "class A {}");
  harness::RunConfig config;
  config.out_dir = out.path.string();
  harness::FileReport report = harness::run_pipeline((in.path / "bad.js").string(), config);
  CHECK(report.status == "unparseable");
  CHECK(report.error.find("SyntaxError") != std::string::npos);
}

TEST_CASE("pipeline: exceeded deadline aborts with a timeout record") {
  TempDir in("jwb_h_to_in");
  TempDir out("jwb_h_to_out");
  spit(in.path / "slow.js", testsupport::payload_program_js());
  harness::RunConfig config;
  config.out_dir = out.path.string();
  config.timeout_seconds = 0;  // already expired at the first stage boundary
  harness::FileReport report = harness::run_pipeline((in.path / "slow.js").string(), config);
  CHECK(report.status == "timeout");
}

TEST_CASE("corpus reports are deterministic apart from timings") {
  TempDir in("jwb_h_det_in");
  TempDir out("jwb_h_det_out");
  spit(in.path / "a.js", testsupport::payload_program_js());
  spit(in.path / "b.js", testsupport::pure_js_malware());
  harness::RunConfig config;
  config.out_dir = out.path.string();
  config.parallelism = 1;

  auto run_once = [&] {
    std::ostringstream sink;
    harness::ReportWriter writer(sink);
    harness::run_corpus(harness::collect_js_files(in.path.string()), config, writer);
    std::string text = sink.str();
    // Strip the timing fields before comparing.
    std::string cleaned;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      size_t at = line.find("\"timings\"");
      cleaned += at == std::string::npos ? line : line.substr(0, at);
      cleaned += "\n";
    }
    return cleaned;
  };
  CHECK(run_once() == run_once());
}

TEST_CASE("corpus runner counts failures and runs in parallel") {
  TempDir in("jwb_h_par_in");
  TempDir out("jwb_h_par_out");
  for (int i = 0; i < 6; ++i) {
    spit(in.path / ("f" + std::to_string(i) + ".js"), testsupport::payload_program_js());
  }
  spit(in.path / "broken.js", "import x from \"y\";");
  harness::RunConfig config;
  config.out_dir = out.path.string();
  config.parallelism = 4;
  std::ostringstream sink;
  harness::ReportWriter writer(sink);
  size_t failures =
      harness::run_corpus(harness::collect_js_files(in.path.string()), config, writer);
  CHECK(failures == 1);
  // One header plus seven entries.
  size_t lines = 0;
  std::istringstream stream(sink.str());
  std::string line;
  while (std::getline(stream, line)) ++lines;
  CHECK(lines == 8);
}

TEST_CASE("external scanner: submit/poll, caching, auth errors") {
  httplib::Server server;
  std::atomic<int> submits{0};
  std::atomic<int> polls{0};
  server.Post("/scan", [&](const httplib::Request& req, httplib::Response& res) {
    if (req.get_header_value("X-Api-Key") != "sekrit") {
      res.status = 401;
      return;
    }
    ++submits;
    res.set_content("{\"id\": \"job1\"}", "application/json");
  });
  server.Get("/result/job1", [&](const httplib::Request&, httplib::Response& res) {
    if (polls++ == 0) {
      res.set_content("{\"status\": \"pending\"}", "application/json");
    } else {
      res.set_content(
          "{\"status\": \"done\", \"engines\": {\"alpha\": true, \"beta\": false, \"gamma\": true}}",
          "application/json");
    }
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  TempDir cache("jwb_h_scan_cache");
  TempDir files("jwb_h_scan_files");
  spit(files.path / "x.js", "scanned content");

  harness::ScannerConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port);
  config.cache_dir = cache.path.string();
  config.allow_network = true;
  config.poll_interval_ms = 10;
  config.api_key_env = "JWB_TEST_API_KEY";
  setenv("JWB_TEST_API_KEY", "sekrit", 1);

  auto first = harness::scan_external((files.path / "x.js").string(), config);
  REQUIRE(first.ok());
  CHECK(!first.from_cache);
  CHECK(first.engines.at("alpha"));
  CHECK(!first.engines.at("beta"));
  CHECK(first.engines.size() == 3);
  CHECK(submits.load() == 1);

  auto second = harness::scan_external((files.path / "x.js").string(), config);
  REQUIRE(second.ok());
  CHECK(second.from_cache);
  CHECK(submits.load() == 1);  // served from the cache, zero network calls

  setenv("JWB_TEST_API_KEY", "wrong", 1);
  spit(files.path / "y.js", "other content");
  auto denied = harness::scan_external((files.path / "y.js").string(), config);
  CHECK(denied.error == "auth");

  config.allow_network = false;
  spit(files.path / "z.js", "third content");
  auto offline = harness::scan_external((files.path / "z.js").string(), config);
  CHECK(!offline.ok());

  server.stop();
  listener.join();
}

TEST_CASE("external engines flow into the detection matrix (3-of-5 positive)") {
  httplib::Server server;
  server.Post("/scan", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"id\": \"j\"}", "application/json");
  });
  server.Get("/result/j", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(
        "{\"status\": \"done\", \"engines\": {\"e1\": true, \"e2\": false, "
        "\"e3\": true, \"e4\": false, \"e5\": true}}",
        "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  TempDir files("jwb_h_ade_files");
  spit(files.path / "s.js", "sample body");
  harness::ScannerConfig config;
  config.endpoint = "http://127.0.0.1:" + std::to_string(port);
  config.allow_network = true;
  config.poll_interval_ms = 5;
  auto result = harness::scan_external((files.path / "s.js").string(), config);
  server.stop();
  listener.join();
  REQUIRE(result.ok());

  harness::DetectionMatrix matrix;
  for (const auto& [engine, hit] : result.engines) {
    matrix.set("baseline", "s", engine, hit);
  }
  auto metrics = harness::compute_metrics(matrix, 2);
  CHECK(metrics["baseline"].ade == 3.0);
  CHECK(metrics["baseline"].sdr == 100.0);
}

TEST_CASE("sha256 matches the reference vector") {
  CHECK(harness::sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(harness::sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
