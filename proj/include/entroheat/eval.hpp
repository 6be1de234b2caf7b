#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entroheat/entropy.hpp"
#include "entroheat/hotspot.hpp"

namespace entroheat {

/// Token indices (1-based, into the emitted token stream) that one annotator
/// marked as wrong.
struct AnnotationSet {
  std::string document_id;
  std::set<std::size_t> flagged;
  std::string annotator_id;

  bool operator==(const AnnotationSet&) const = default;
};

struct OverlapResult {
  std::size_t inside = 0;
  std::size_t outside = 0;
  std::optional<double> recall;  // empty when nothing was flagged
  double budget_fraction = 0.0;

  bool empty() const noexcept { return !recall.has_value(); }
};

struct PlantedSpan {
  std::size_t start = 1;  // 1-based
  std::size_t length = 1;
  double spike_bits = 1.0;
};

struct SyntheticSpec {
  std::string document_id = "synthetic";
  std::size_t n = 500;
  double baseline_mean = 0.3;
  double baseline_noise_sd = 0.1;
  std::vector<PlantedSpan> spans;
  std::uint64_t seed = 0;
};

struct SyntheticDocument {
  EntropySeries series;
  AnnotationSet truth;  // every token of every planted span
};

/// Throws StructuralError when the sets name different documents or the
/// list is empty.
AnnotationSet union_annotations(std::span<const AnnotationSet> sets);

/// Throws StructuralError when a flagged index is 0 or beyond report.n.
OverlapResult overlap(const HotspotReport& report, const AnnotationSet& annotations);

/// Throws ValidationError on spans outside [1,n], overlapping spans or a
/// non-positive spike.
void validate(const SyntheticSpec& spec);

/// Baseline max(0, N(mean, sd)) plus spike_bits on planted tokens. The
/// generator is mt19937_64 with Box-Muller, so a seed always reproduces the
/// same series.
SyntheticDocument generate_synthetic(const SyntheticSpec& spec);

/// Spec with `count` non-overlapping spans of `length` tokens at positions
/// drawn from the seed.
SyntheticSpec random_span_spec(std::size_t n, double baseline_mean, double baseline_noise_sd,
                               std::size_t count, std::size_t length, double spike_bits,
                               std::uint64_t seed);

nlohmann::ordered_json to_json(const AnnotationSet& annotations);
AnnotationSet annotation_set_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const OverlapResult& result);
nlohmann::ordered_json to_json(const SyntheticSpec& spec);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

}  // namespace entroheat
