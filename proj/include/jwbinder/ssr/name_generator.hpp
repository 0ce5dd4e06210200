#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>

namespace jwbinder::ssr {

// Produces identifiers for abstraction output. Generated names never collide
// with identifiers from the analyzed program (the forbidden set) nor with
// each other; counters are deterministic so golden tests stay stable. One
// generator serves a whole reconstruction; the site prefix namespaces the
// output of each instantiation site.
class NameGenerator {
 public:
  explicit NameGenerator(std::unordered_set<std::string> forbidden = {},
                         std::string site_prefix = "")
      : forbidden_(std::move(forbidden)), site_prefix_(std::move(site_prefix)) {}

  void set_site_prefix(std::string prefix) { site_prefix_ = std::move(prefix); }
  const std::string& site_prefix() const { return site_prefix_; }

  // Counter-based: fresh("C") -> C_0, C_1, ... (per site prefix).
  std::string fresh(const std::string& prefix);

  // Index-based: indexed("loc", 2) -> loc2, uniquified with _1, _2 suffixes
  // when taken (a later request for the same slot gets a new name).
  std::string indexed(const std::string& prefix, uint32_t index);

  // Stable name for helpers: first request decides (popcnt, or popcnt_1 when
  // the program already uses popcnt); later requests return the same name.
  std::string fixed(const std::string& name);

  // base + suffix, uniquified.
  std::string derived(const std::string& base, const std::string& suffix);

  bool is_generated(const std::string& name) const { return used_.count(name) > 0; }

 private:
  bool taken(const std::string& name) const {
    return forbidden_.count(name) > 0 || used_.count(name) > 0;
  }
  std::string claim_variant(const std::string& base);

  std::unordered_set<std::string> forbidden_;
  std::unordered_set<std::string> used_;
  std::map<std::string, uint32_t> counters_;
  std::map<std::string, std::string> fixed_memo_;
  std::string site_prefix_;
};

}  // namespace jwbinder::ssr
