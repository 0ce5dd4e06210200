#pragma once

#include <map>
#include <set>
#include <string>

namespace jwbinder::harness {

// samples x engines boolean verdicts, one layer per variant. Variant keys
// follow the output naming: baseline, code, data, all (plus the derived
// "combined").
class DetectionMatrix {
 public:
  void set(const std::string& variant, const std::string& sample, const std::string& engine,
           bool detected);
  bool get(const std::string& variant, const std::string& sample,
           const std::string& engine) const;

  const std::set<std::string>& samples() const { return samples_; }
  const std::set<std::string>& engines() const { return engines_; }
  std::set<std::string> variants() const;
  bool empty() const { return samples_.empty(); }

 private:
  std::set<std::string> samples_;
  std::set<std::string> engines_;
  // variant -> sample -> set of detecting engines
  std::map<std::string, std::map<std::string, std::set<std::string>>> detections_;
};

struct VariantMetrics {
  double sdr = 0;  // percentage of samples detected by >= threshold engines
  double ade = 0;  // mean number of detecting engines per sample
};

// Computes SDR and ADE per variant. When both "code" and "data" layers are
// present, a "combined" layer is derived by OR-ing their per-engine verdicts.
// Throws std::invalid_argument on an empty matrix.
std::map<std::string, VariantMetrics> compute_metrics(const DetectionMatrix& matrix,
                                                      int threshold = 2);

}  // namespace jwbinder::harness
