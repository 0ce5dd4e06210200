#pragma once

#include <map>
#include <string>

namespace jwbinder::harness {

// Generic REST scanner: POST the file to submit_path, poll poll_path (the
// {id} placeholder is replaced by the submit response id) until the status
// is terminal, collect per-engine boolean verdicts. Responses are cached on
// disk keyed by the file content hash, so repeated scans make no network
// calls.
struct ScannerConfig {
  std::string endpoint;  // scheme://host:port
  std::string submit_path = "/scan";
  std::string poll_path = "/result/{id}";
  std::string api_key_env;  // name of the env var carrying the key
  int poll_interval_ms = 500;
  int max_polls = 120;
  std::string cache_dir;
  bool allow_network = false;
};

struct ExternalScanResult {
  std::map<std::string, bool> engines;
  std::string error;  // empty on success ("auth", "network: ...", ...)
  bool from_cache = false;

  bool ok() const { return error.empty(); }
};

ExternalScanResult scan_external(const std::string& file_path, const ScannerConfig& config);

// SHA-256 hex digest (cache key).
std::string sha256_hex(const std::string& bytes);

}  // namespace jwbinder::harness
