#include "jwbinder/harness/metrics.hpp"

#include <stdexcept>

namespace jwbinder::harness {

void DetectionMatrix::set(const std::string& variant, const std::string& sample,
                          const std::string& engine, bool detected) {
  samples_.insert(sample);
  engines_.insert(engine);
  auto& per_sample = detections_[variant][sample];
  if (detected) {
    per_sample.insert(engine);
  } else {
    per_sample.erase(engine);
  }
}

bool DetectionMatrix::get(const std::string& variant, const std::string& sample,
                          const std::string& engine) const {
  auto v = detections_.find(variant);
  if (v == detections_.end()) return false;
  auto s = v->second.find(sample);
  if (s == v->second.end()) return false;
  return s->second.count(engine) > 0;
}

std::set<std::string> DetectionMatrix::variants() const {
  std::set<std::string> out;
  for (const auto& [variant, _] : detections_) out.insert(variant);
  return out;
}

std::map<std::string, VariantMetrics> compute_metrics(const DetectionMatrix& matrix,
                                                      int threshold) {
  if (matrix.empty()) throw std::invalid_argument("empty detection matrix");

  std::set<std::string> variants = matrix.variants();
  bool derive_combined = variants.count("code") && variants.count("data");

  std::map<std::string, VariantMetrics> out;
  auto evaluate = [&](const std::string& name, auto&& detected_by) {
    size_t over_threshold = 0;
    size_t total_detections = 0;
    for (const std::string& sample : matrix.samples()) {
      size_t count = 0;
      for (const std::string& engine : matrix.engines()) {
        if (detected_by(sample, engine)) ++count;
      }
      if (count >= static_cast<size_t>(threshold)) ++over_threshold;
      total_detections += count;
    }
    size_t n = matrix.samples().size();
    VariantMetrics m;
    m.sdr = 100.0 * static_cast<double>(over_threshold) / static_cast<double>(n);
    m.ade = static_cast<double>(total_detections) / static_cast<double>(n);
    out[name] = m;
  };

  for (const std::string& variant : variants) {
    evaluate(variant, [&](const std::string& s, const std::string& e) {
      return matrix.get(variant, s, e);
    });
  }
  if (derive_combined) {
    evaluate("combined", [&](const std::string& s, const std::string& e) {
      return matrix.get("code", s, e) || matrix.get("data", s, e);
    });
  }
  return out;
}

}  // namespace jwbinder::harness
