#include "jwbinder/harness/report.hpp"

namespace jwbinder::harness {

nlohmann::ordered_json FileReport::to_json() const {
  nlohmann::ordered_json j;
  j["path"] = path;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  j["interop_sites"] = interop_sites;
  j["invocations"] = invocations;
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (const BinaryRecord& b : binaries) {
    nlohmann::ordered_json rec;
    rec["api"] = b.api;
    rec["kind"] = b.kind;
    if (!b.reason.empty()) rec["reason"] = b.reason;
    if (!b.note.empty()) rec["note"] = b.note;
    rec["bytes"] = b.byte_count;
    rec["decoded"] = b.decoded;
    bins.push_back(std::move(rec));
  }
  j["binaries"] = std::move(bins);
  j["abstraction_failures"] = abstraction_failures;
  j["outputs"] = outputs;
  j["timings"] = {{"data_flow_seconds", data_flow_seconds}, {"ssr_seconds", ssr_seconds}};
  return j;
}

ReportWriter::ReportWriter(std::ostream& out) : out_(out) {
  nlohmann::ordered_json header;
  header["schema"] = kReportSchema;
  out_ << header.dump() << "\n";
}

void ReportWriter::write(const FileReport& report) {
  std::lock_guard<std::mutex> lock(mutex_);
  out_ << report.to_json().dump() << "\n";
  out_.flush();
}

}  // namespace jwbinder::harness
