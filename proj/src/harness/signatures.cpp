#include "jwbinder/harness/signatures.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace jwbinder::harness {

SignatureSet SignatureSet::from_json(const std::string& json_text) {
  nlohmann::json doc = nlohmann::json::parse(json_text);
  if (!doc.is_array()) throw std::runtime_error("signature file must be a JSON list");
  SignatureSet set;
  for (const auto& entry : doc) {
    SignatureRule rule;
    rule.id = entry.at("id").get<std::string>();
    for (const auto& s : entry.at("strings")) rule.strings.push_back(s.get<std::string>());
    set.rules.push_back(std::move(rule));
  }
  return set;
}

SignatureSet SignatureSet::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open signatures file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return from_json(text);
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed signatures file " + path + ": " + e.what());
  }
}

ScanVerdict scan_signatures(const std::string& text, const SignatureSet& signatures) {
  ScanVerdict verdict;
  for (const SignatureRule& rule : signatures.rules) {
    bool all = true;
    for (const std::string& needle : rule.strings) {
      if (text.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all && !rule.strings.empty()) {
      verdict.detected = true;
      verdict.matched_rules.push_back(rule.id);
    }
  }
  return verdict;
}

}  // namespace jwbinder::harness
