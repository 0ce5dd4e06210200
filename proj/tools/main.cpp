#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "jwbinder/harness/metrics.hpp"
#include "jwbinder/harness/pipeline.hpp"
#include "jwbinder/harness/scanner_client.hpp"
#include "jwbinder/harness/signatures.hpp"
#include "jwbinder/oracle/interp.hpp"
#include "jwbinder/wasm/decoder.hpp"

namespace fs = std::filesystem;
using namespace jwbinder;

namespace {

// Output files are grouped back into samples by their variant suffix.
std::pair<std::string, std::string> classify_variant(const std::string& path) {
  std::string name = fs::path(path).filename().string();
  if (name.size() > 3 && name.substr(name.size() - 3) == ".js") {
    name = name.substr(0, name.size() - 3);
  }
  for (const char* variant : {"code", "data", "all"}) {
    std::string suffix = std::string(".") + variant;
    if (name.size() > suffix.size() &&
        name.substr(name.size() - suffix.size()) == suffix) {
      return {name.substr(0, name.size() - suffix.size()), variant};
    }
  }
  return {name, "baseline"};
}

int run_analyze(const std::string& input, harness::RunConfig& config,
                const std::string& report_path) {
  if (!fs::exists(input)) {
    std::cerr << "input does not exist: " << input << "\n";
    return 2;
  }
  std::vector<std::string> files = harness::collect_js_files(input);
  if (files.empty()) {
    std::cerr << "no .js inputs under " << input << "\n";
    return 2;
  }
  fs::create_directories(config.out_dir);
  std::ofstream report_file;
  std::ostream* out = &std::cout;
  if (!report_path.empty()) {
    report_file.open(report_path);
    if (!report_file) {
      std::cerr << "cannot write report to " << report_path << "\n";
      return 2;
    }
    out = &report_file;
  }
  harness::ReportWriter writer(*out);
  size_t failures = harness::run_corpus(files, config, writer);
  return failures == 0 ? 0 : 1;
}

int run_scan(const std::string& input, const std::string& signatures_path,
             const std::string& out_path, harness::ScannerConfig& scanner,
             bool use_external) {
  harness::SignatureSet signatures;
  try {
    signatures = harness::SignatureSet::from_file(signatures_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    out_file.open(out_path);
    out = &out_file;
  }
  nlohmann::ordered_json header;
  header["schema"] = "jwbinder-scan/1";
  *out << header.dump() << "\n";

  bool any_error = false;
  for (const std::string& path : harness::collect_js_files(input)) {
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    harness::ScanVerdict verdict = harness::scan_signatures(text, signatures);

    auto [sample, variant] = classify_variant(path);
    nlohmann::ordered_json record;
    record["file"] = path;
    record["sample"] = sample;
    record["variant"] = variant;
    nlohmann::ordered_json engines;
    for (const harness::SignatureRule& rule : signatures.rules) {
      bool hit = std::find(verdict.matched_rules.begin(), verdict.matched_rules.end(),
                           rule.id) != verdict.matched_rules.end();
      engines[rule.id] = hit;
    }
    if (use_external) {
      harness::ExternalScanResult external = harness::scan_external(path, scanner);
      if (!external.ok()) {
        record["scan_error"] = external.error;
        any_error = true;
      } else {
        for (const auto& [engine, hit] : external.engines) engines[engine] = hit;
      }
    }
    record["engines"] = std::move(engines);
    record["matched"] = verdict.matched_rules;
    *out << record.dump() << "\n";
  }
  return any_error ? 1 : 0;
}

int run_metrics(const std::string& report_path, int threshold) {
  std::ifstream in(report_path);
  if (!in) {
    std::cerr << "cannot read " << report_path << "\n";
    return 2;
  }
  harness::DetectionMatrix matrix;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("engines")) continue;
    std::string sample = record.value("sample", "");
    std::string variant = record.value("variant", "baseline");
    for (auto it = record["engines"].begin(); it != record["engines"].end(); ++it) {
      matrix.set(variant, sample, it.key(), it.value().get<bool>());
    }
  }
  try {
    auto metrics = harness::compute_metrics(matrix, threshold);
    nlohmann::ordered_json out;
    out["threshold"] = threshold;
    for (const auto& [variant, m] : metrics) {
      out[variant] = {{"sdr_percent", m.sdr}, {"ade", m.ade}};
    }
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run_oracle(const std::string& module_path, uint32_t func, std::vector<std::string> args) {
  std::ifstream in(module_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << module_path << "\n";
    return 2;
  }
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  try {
    wasm::WasmModule module = wasm::decode_module(bytes);
    const wasm::FuncType& sig = module.func_type(func);
    if (args.size() != sig.params.size()) {
      std::cerr << "function expects " << sig.params.size() << " argument(s)\n";
      return 2;
    }
    std::vector<oracle::Value> values;
    for (size_t i = 0; i < args.size(); ++i) {
      switch (sig.params[i]) {
        case wasm::ValType::I32:
          values.push_back(oracle::Value::make_i32(static_cast<int32_t>(std::stoll(args[i]))));
          break;
        case wasm::ValType::I64:
          values.push_back(oracle::Value::make_i64(std::stoll(args[i])));
          break;
        case wasm::ValType::F32:
          values.push_back(oracle::Value::make_f32(std::stof(args[i])));
          break;
        case wasm::ValType::F64:
          values.push_back(oracle::Value::make_f64(std::stod(args[i])));
          break;
      }
    }
    oracle::RunResult r = oracle::interp_wasm(module, func, values);
    nlohmann::ordered_json out;
    out["trap"] = oracle::trap_name(r.trap);
    out["value"] = r.value ? r.value->to_string() : "none";
    nlohmann::ordered_json calls = nlohmann::ordered_json::array();
    for (const oracle::HostCall& c : r.trace.calls) {
      nlohmann::ordered_json call;
      call["callee"] = c.callee;
      nlohmann::ordered_json call_args = nlohmann::ordered_json::array();
      for (const oracle::Value& v : c.args) call_args.push_back(v.to_string());
      call["args"] = std::move(call_args);
      calls.push_back(std::move(call));
    }
    out["trace"] = std::move(calls);
    std::cout << out.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jwbinder: reconstructs JavaScript-WebAssembly programs into pure JavaScript"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "run the reconstruction pipeline");
  std::string analyze_input;
  std::string analyze_mode = "all";
  std::string report_path;
  harness::RunConfig config;
  analyze->add_option("input", analyze_input, "a .js file or a directory")->required();
  analyze->add_option("--mode", analyze_mode, "code|data|all (all also writes code and data)")
      ->check(CLI::IsMember({"code", "data", "all"}));
  analyze->add_option("--out-dir", config.out_dir, "output directory")->required();
  analyze->add_option("--assets-dir", config.assets_dir, "directory with sibling .wasm assets");
  analyze->add_option("--timeout", config.timeout_seconds, "per-file timeout in seconds")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--parallelism", config.parallelism, "concurrent pipelines")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--key-apis", config.key_apis_path, "key-API table file");
  analyze->add_option("--report", report_path, "report JSONL path (default stdout)");
  analyze->add_flag("--dump-pdg", config.dump_pdg, "write <stem>.pdg.txt edge dumps");

  // scan
  auto* scan = app.add_subcommand("scan", "scan outputs with the stub signature engine");
  std::string scan_input, signatures_path, scan_out;
  harness::ScannerConfig scanner;
  bool allow_network = false;
  scan->add_option("dir", scan_input, "directory of .js files")->required();
  scan->add_option("--signatures", signatures_path, "signature rules JSON")->required();
  scan->add_option("--out", scan_out, "scan report JSONL path (default stdout)");
  scan->add_option("--endpoint", scanner.endpoint, "external scanner base URL");
  scan->add_option("--submit-path", scanner.submit_path, "submit path");
  scan->add_option("--poll-path", scanner.poll_path, "poll path ({id} placeholder)");
  scan->add_option("--api-key-env", scanner.api_key_env, "env var holding the API key");
  scan->add_option("--cache-dir", scanner.cache_dir, "response cache directory");
  scan->add_option("--poll-interval-ms", scanner.poll_interval_ms, "poll interval");
  scan->add_flag("--allow-network", allow_network, "permit network calls");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "compute SDR/ADE from a scan report");
  std::string metrics_input;
  int threshold = 2;
  metrics->add_option("report", metrics_input, "scan report JSONL")->required();
  metrics->add_option("--threshold", threshold, "detecting engines needed per sample")
      ->check(CLI::PositiveNumber);

  // oracle (debugging aid)
  auto* oracle_cmd =
      app.add_subcommand("oracle", "interpret a function of a module (debug)");
  std::string oracle_module;
  uint32_t oracle_func = 0;
  std::vector<std::string> oracle_args;
  oracle_cmd->add_option("module", oracle_module, "a .wasm file")->required();
  oracle_cmd->add_option("--func", oracle_func, "function index")->required();
  oracle_cmd->add_option("--args", oracle_args, "arguments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a configuration error
  }

  try {
    if (*analyze) {
      config.mode = recon::parse_mode(analyze_mode);
      return run_analyze(analyze_input, config, report_path);
    }
    if (*scan) {
      scanner.allow_network = allow_network;
      return run_scan(scan_input, signatures_path, scan_out, scanner,
                      !scanner.endpoint.empty());
    }
    if (*metrics) return run_metrics(metrics_input, threshold);
    if (*oracle_cmd) return run_oracle(oracle_module, oracle_func, oracle_args);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 2;
}
