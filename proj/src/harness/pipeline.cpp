#include "jwbinder/harness/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <thread>

#include "jwbinder/interop/interop.hpp"
#include "jwbinder/js/parser.hpp"
#include "jwbinder/js/printer.hpp"
#include "jwbinder/pdg/pdg.hpp"
#include "jwbinder/wasm/decoder.hpp"

namespace jwbinder::harness {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct TimeoutError {};

struct Deadline {
  Clock::time_point limit;
  explicit Deadline(int seconds) : limit(Clock::now() + std::chrono::seconds(seconds)) {}
  void check() const {
    if (Clock::now() > limit) throw TimeoutError{};
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string stem_of(const std::string& path) {
  fs::path p(path);
  std::string name = p.filename().string();
  if (name.size() > 3 && name.substr(name.size() - 3) == ".js") {
    return name.substr(0, name.size() - 3);
  }
  return name;
}

// Per-site decoded unit.
struct SiteUnit {
  std::optional<wasm::WasmModule> module;
};

ssr::AbstractionContext site_context(const wasm::WasmModule& module, const js::Ast& ast,
                                     const interop::Site& site, ssr::NameGenerator& names) {
  ssr::AbstractionContext ctx;
  ctx.module = &module;
  ctx.names = &names;
  uint32_t import_index = 0;
  for (const wasm::Import& imp : module.imports) {
    if (imp.kind != wasm::ExternalKind::Func) continue;
    ctx.func_imports.resize(import_index + 1);
    for (const interop::ImportBinding& b : site.bindings) {
      if (b.module_name == imp.module && b.field_name == imp.field) {
        ssr::BoundImport bound;
        bound.src_ast = &ast;
        bound.expr = b.expr;
        bound.label = js::print_expression(ast, b.expr);
        ctx.func_imports[import_index] = bound;
        break;
      }
    }
    ++import_index;
  }
  return ctx;
}

std::optional<uint32_t> exported_func_index(const wasm::WasmModule& module,
                                            const std::string& name) {
  for (const wasm::Export& ex : module.exports) {
    if (ex.kind == wasm::ExternalKind::Func && ex.name == name) return ex.index;
  }
  return std::nullopt;
}

}  // namespace

FileReport run_pipeline(const std::string& path, const RunConfig& config) {
  FileReport report;
  report.path = path;
  Deadline deadline(config.timeout_seconds);

  std::string source;
  try {
    source = read_file(path);
  } catch (const std::exception& e) {
    report.status = "error";
    report.error = e.what();
    return report;
  }

  std::optional<js::Ast> ast;
  try {
    ast.emplace(js::parse(source));
  } catch (const js::SyntaxError& e) {
    report.status = "unparseable";
    report.error = e.what();
    return report;
  }

  try {
    auto phase1_start = Clock::now();
    pdg::Pdg graph = pdg::build_pdg(*ast);
    deadline.check();

    interop::KeyApiTable apis = config.key_apis_path.empty()
                                    ? interop::KeyApiTable::defaults()
                                    : interop::KeyApiTable::from_file(config.key_apis_path);
    interop::InteropMap map = interop::find_interops(graph, apis);
    report.interop_sites = map.instantiation_sites.size();
    report.invocations = map.export_invocations.size();
    deadline.check();

    std::vector<SiteUnit> units(map.instantiation_sites.size());
    for (size_t s = 0; s < map.instantiation_sites.size(); ++s) {
      const interop::Site& site = map.instantiation_sites[s];
      interop::BinaryOrigin origin = interop::recover_binary(graph, site, config.assets_dir);
      BinaryRecord record;
      record.api = site.api_name;
      record.kind = interop::origin_kind_name(origin.kind);
      record.byte_count = origin.bytes.size();
      if (!origin.resolved()) {
        record.reason = interop::unresolved_reason_name(origin.reason);
      } else {
        record.note = origin.note;
        try {
          units[s].module = wasm::decode_module(origin.bytes);
          record.decoded = true;
          for (const std::string& d : units[s].module->diagnostics) {
            report.abstraction_failures.push_back("site " + std::to_string(s) + ": " + d);
          }
        } catch (const wasm::DecodeError& e) {
          record.note = std::string("decode failed: ") + e.what();
        }
      }
      map.binaries[s] = std::move(origin);
      report.binaries.push_back(std::move(record));
      deadline.check();
    }
    report.data_flow_seconds =
        std::chrono::duration<double>(Clock::now() - phase1_start).count();

    auto phase2_start = Clock::now();
    ssr::NameGenerator names(graph.identifier_names());

    std::map<size_t, ssr::JsFragment> data_fragments;
    std::vector<std::optional<ssr::AbstractionContext>> contexts(units.size());
    for (size_t s = 0; s < units.size(); ++s) {
      if (!units[s].module) continue;
      names.set_site_prefix(s == 0 ? "" : "w" + std::to_string(s) + "_");
      data_fragments[s] = ssr::abstract_data(*units[s].module, names);
      contexts[s] = site_context(*units[s].module, *ast, map.instantiation_sites[s], names);
      deadline.check();
    }

    std::map<size_t, ssr::JsFragment> code_fragments;
    for (size_t i = 0; i < map.export_invocations.size(); ++i) {
      const interop::Invocation& inv = map.export_invocations[i];
      size_t s = inv.site_index;
      if (!units[s].module) continue;  // unresolved unit, reported above
      names.set_site_prefix(s == 0 ? "" : "w" + std::to_string(s) + "_");
      auto func = exported_func_index(*units[s].module, inv.export_name);
      if (!func) {
        report.abstraction_failures.push_back("export " + inv.export_name +
                                              " not present in the recovered module");
        continue;
      }
      try {
        code_fragments[i] = ssr::abstract_function(*contexts[s], *func);
      } catch (const ssr::AbstractionError& e) {
        report.abstraction_failures.push_back(inv.export_name + ": " + e.what());
      }
      deadline.check();
    }

    std::vector<recon::Mode> variants;
    if (config.mode == recon::Mode::All) {
      variants = {recon::Mode::Code, recon::Mode::Data, recon::Mode::All};
    } else {
      variants = {config.mode};
    }
    fs::create_directories(config.out_dir);
    for (recon::Mode variant : variants) {
      recon::Ipdg ipdg = recon::integrate(*ast, map, code_fragments, data_fragments, variant);
      std::string text = recon::reconstruct(ipdg);
      std::string out_path =
          (fs::path(config.out_dir) / (stem_of(path) + "." + recon::mode_name(variant) + ".js"))
              .string();
      write_file(out_path, text);
      report.outputs.push_back(out_path);
      deadline.check();
    }

    if (config.dump_pdg) {
      std::string out_path =
          (fs::path(config.out_dir) / (stem_of(path) + ".pdg.txt")).string();
      write_file(out_path, graph.dump());
      report.outputs.push_back(out_path);
    }
    report.ssr_seconds = std::chrono::duration<double>(Clock::now() - phase2_start).count();
  } catch (const TimeoutError&) {
    report.status = "timeout";
    report.error = "analysis exceeded " + std::to_string(config.timeout_seconds) + "s";
  } catch (const std::exception& e) {
    report.status = "error";
    report.error = e.what();
  }
  return report;
}

std::vector<std::string> collect_js_files(const std::string& path) {
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".js") {
        files.push_back(entry.path().string());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  return files;
}

size_t run_corpus(const std::vector<std::string>& files, const RunConfig& config,
                  ReportWriter& writer) {
  std::atomic<size_t> next{0};
  std::atomic<size_t> failures{0};
  size_t workers = std::max(1, config.parallelism);
  workers = std::min(workers, files.size() == 0 ? size_t{1} : files.size());

  auto work = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      FileReport report = run_pipeline(files[i], config);
      if (!report.success()) failures.fetch_add(1);
      writer.write(report);
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return failures.load();
}

}  // namespace jwbinder::harness
