#pragma once

#include <string>
#include <vector>

#include "jwbinder/harness/report.hpp"
#include "jwbinder/recon/integrate.hpp"

namespace jwbinder::harness {

struct RunConfig {
  recon::Mode mode = recon::Mode::All;
  std::string out_dir;
  std::string assets_dir;
  int timeout_seconds = 300;
  int parallelism = 1;
  std::string key_apis_path;  // empty: built-in table
  bool dump_pdg = false;
};

// The whole two-phase run for one file: parse, dependency graph, interop
// identification, binary recovery and decode (phase 1), then abstraction,
// integration and regeneration for each requested variant (phase 2).
// Mode::All writes <stem>.code.js, <stem>.data.js and <stem>.all.js; single
// modes write just their variant. Failures degrade per module contracts and
// are recorded, never thrown.
FileReport run_pipeline(const std::string& path, const RunConfig& config);

// Expands a file or directory argument into the .js corpus (sorted).
std::vector<std::string> collect_js_files(const std::string& path);

// Runs the corpus with up to config.parallelism workers; report entries are
// appended in completion order. Returns the number of files that did not
// complete cleanly.
size_t run_corpus(const std::vector<std::string>& files, const RunConfig& config,
                  ReportWriter& writer);

}  // namespace jwbinder::harness
