#pragma once

#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace jwbinder::harness {

struct BinaryRecord {
  std::string api;
  std::string kind;        // inline-typed-array, base64-string, ...
  std::string reason;      // unresolved reason, empty otherwise
  std::string note;        // decode flags
  size_t byte_count = 0;
  bool decoded = false;
};

struct FileReport {
  std::string path;
  std::string status = "ok";  // ok | unparseable | timeout | error
  std::string error;
  size_t interop_sites = 0;
  size_t invocations = 0;
  std::vector<BinaryRecord> binaries;
  std::vector<std::string> abstraction_failures;
  std::vector<std::string> outputs;
  double data_flow_seconds = 0;
  double ssr_seconds = 0;

  nlohmann::ordered_json to_json() const;
  bool success() const { return status == "ok" && abstraction_failures.empty(); }
};

// JSON Lines: a schema header record followed by one object per input file,
// appended in completion order under a lock.
class ReportWriter {
 public:
  explicit ReportWriter(std::ostream& out);
  void write(const FileReport& report);

 private:
  std::ostream& out_;
  std::mutex mutex_;
};

inline constexpr const char* kReportSchema = "jwbinder-report/1";

}  // namespace jwbinder::harness
