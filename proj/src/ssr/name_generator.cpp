#include "jwbinder/ssr/name_generator.hpp"

namespace jwbinder::ssr {

std::string NameGenerator::claim_variant(const std::string& base) {
  if (!taken(base)) {
    used_.insert(base);
    return base;
  }
  for (uint32_t salt = 1;; ++salt) {
    std::string candidate = base + "_" + std::to_string(salt);
    if (!taken(candidate)) {
      used_.insert(candidate);
      return candidate;
    }
  }
}

std::string NameGenerator::fresh(const std::string& prefix) {
  uint32_t& counter = counters_[site_prefix_ + prefix];
  for (;;) {
    std::string candidate = site_prefix_ + prefix + "_" + std::to_string(counter++);
    if (!taken(candidate)) {
      used_.insert(candidate);
      return candidate;
    }
  }
}

std::string NameGenerator::indexed(const std::string& prefix, uint32_t index) {
  return claim_variant(site_prefix_ + prefix + std::to_string(index));
}

std::string NameGenerator::fixed(const std::string& name) {
  auto it = fixed_memo_.find(name);
  if (it != fixed_memo_.end()) return it->second;
  std::string actual = claim_variant(name);
  fixed_memo_.emplace(name, actual);
  return actual;
}

std::string NameGenerator::derived(const std::string& base, const std::string& suffix) {
  return claim_variant(base + suffix);
}

}  // namespace jwbinder::ssr
