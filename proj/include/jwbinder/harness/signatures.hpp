#pragma once

#include <string>
#include <vector>

namespace jwbinder::harness {

// A rule matches iff every literal string occurs in the scanned text.
struct SignatureRule {
  std::string id;
  std::vector<std::string> strings;
};

struct SignatureSet {
  std::vector<SignatureRule> rules;

  // JSON: [{"id": "...", "strings": ["...", ...]}, ...]
  static SignatureSet from_json(const std::string& json_text);
  static SignatureSet from_file(const std::string& path);
};

struct ScanVerdict {
  bool detected = false;
  std::vector<std::string> matched_rules;
};

ScanVerdict scan_signatures(const std::string& text, const SignatureSet& signatures);

}  // namespace jwbinder::harness
