#include "entroheat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "entroheat/error.hpp"

namespace entroheat {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

/// Uniform in the open interval (0, 1) from the top 53 bits.
double open_unit(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng) {
  const double u1 = open_unit(rng);
  const double u2 = open_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(0, std::string(what) + ": missing \"" + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(0, std::string(what) + ": bad type for \"" + key + "\"");
  }
}

}  // namespace

AnnotationSet union_annotations(std::span<const AnnotationSet> sets) {
  if (sets.empty()) throw StructuralError("no annotation sets to combine");
  AnnotationSet out;
  out.document_id = sets.front().document_id;
  out.annotator_id = "union";
  for (const auto& s : sets) {
    if (s.document_id != out.document_id) {
      throw StructuralError("annotation sets refer to different documents: \"" + out.document_id +
                            "\" and \"" + s.document_id + "\"");
    }
    out.flagged.insert(s.flagged.begin(), s.flagged.end());
  }
  return out;
}

OverlapResult overlap(const HotspotReport& report, const AnnotationSet& annotations) {
  std::vector<char> covered(report.n + 1, 0);
  for (const auto& h : report.hotspots) {
    for (std::size_t t = h.start; t <= h.end && t <= report.n; ++t) covered[t] = 1;
  }
  OverlapResult result;
  for (std::size_t idx : annotations.flagged) {
    if (idx == 0 || idx > report.n) {
      throw StructuralError("flagged token " + std::to_string(idx) + " outside [1, " +
                            std::to_string(report.n) + "]");
    }
    if (covered[idx]) {
      ++result.inside;
    } else {
      ++result.outside;
    }
  }
  const std::size_t total = result.inside + result.outside;
  if (total > 0) result.recall = static_cast<double>(result.inside) / static_cast<double>(total);
  const auto covered_count = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 1));
  result.budget_fraction =
      report.n == 0 ? 0.0 : static_cast<double>(covered_count) / static_cast<double>(report.n);
  return result;
}

void validate(const SyntheticSpec& spec) {
  if (spec.n == 0) throw ValidationError("synthetic spec: n must be positive");
  if (!std::isfinite(spec.baseline_mean)) throw ValidationError("synthetic spec: bad baseline mean");
  if (!(spec.baseline_noise_sd >= 0.0) || !std::isfinite(spec.baseline_noise_sd)) {
    throw ValidationError("synthetic spec: noise sd must be a finite non-negative number");
  }
  std::vector<PlantedSpan> spans = spec.spans;
  std::sort(spans.begin(), spans.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& s = spans[i];
    if (s.start < 1 || s.length < 1 || s.start + s.length - 1 > spec.n) {
      throw ValidationError("synthetic spec: span at " + std::to_string(s.start) + " of length " +
                            std::to_string(s.length) + " lies outside [1, " +
                            std::to_string(spec.n) + "]");
    }
    if (!(s.spike_bits > 0.0)) throw ValidationError("synthetic spec: spike must be positive");
    if (i > 0 && s.start <= spans[i - 1].start + spans[i - 1].length - 1) {
      throw ValidationError("synthetic spec: spans at " + std::to_string(spans[i - 1].start) +
                            " and " + std::to_string(s.start) + " overlap");
    }
  }
}

SyntheticDocument generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  SyntheticDocument doc;
  doc.series.values.resize(spec.n);
  doc.series.tail_masses.assign(spec.n, 0.0);
  std::mt19937_64 rng(spec.seed);
  for (auto& v : doc.series.values) {
    const double noise = spec.baseline_noise_sd > 0.0 ? spec.baseline_noise_sd * standard_normal(rng) : 0.0;
    v = std::max(0.0, spec.baseline_mean + noise);
  }
  doc.truth.document_id = spec.document_id;
  doc.truth.annotator_id = "planted";
  for (const auto& s : spec.spans) {
    for (std::size_t t = s.start; t < s.start + s.length; ++t) {
      doc.series.values[t - 1] += s.spike_bits;
      doc.truth.flagged.insert(t);
    }
  }
  return doc;
}

SyntheticSpec random_span_spec(std::size_t n, double baseline_mean, double baseline_noise_sd,
                               std::size_t count, std::size_t length, double spike_bits,
                               std::uint64_t seed) {
  if (length == 0 || count * length > n) {
    throw DomainError("cannot place " + std::to_string(count) + " spans of length " +
                      std::to_string(length) + " in " + std::to_string(n) + " tokens");
  }
  SyntheticSpec spec;
  spec.n = n;
  spec.baseline_mean = baseline_mean;
  spec.baseline_noise_sd = baseline_noise_sd;
  spec.seed = seed;
  spec.document_id = "synthetic-" + std::to_string(seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t positions = n - length + 1;
  for (int attempt = 0; spec.spans.size() < count; ++attempt) {
    if (attempt > 100000) throw DomainError("could not place non-overlapping spans");
    const std::size_t start = 1 + static_cast<std::size_t>(rng() % positions);
    const bool clash = std::any_of(spec.spans.begin(), spec.spans.end(), [&](const auto& s) {
      return start < s.start + s.length && s.start < start + length;
    });
    if (!clash) spec.spans.push_back({start, length, spike_bits});
  }
  std::sort(spec.spans.begin(), spec.spans.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  return spec;
}

ordered_json to_json(const AnnotationSet& annotations) {
  ordered_json j;
  j["doc"] = annotations.document_id;
  j["annotator"] = annotations.annotator_id;
  j["flagged"] = std::vector<std::size_t>(annotations.flagged.begin(), annotations.flagged.end());
  return j;
}

AnnotationSet annotation_set_from_json(const json& j) {
  AnnotationSet out;
  out.document_id = field<std::string>(j, "doc", "annotation");
  out.annotator_id = j.contains("annotator") ? field<std::string>(j, "annotator", "annotation") : "";
  for (long long idx : field<std::vector<long long>>(j, "flagged", "annotation")) {
    if (idx < 1) throw ValidationError("annotation: token index " + std::to_string(idx) + " < 1");
    out.flagged.insert(static_cast<std::size_t>(idx));
  }
  return out;
}

ordered_json to_json(const OverlapResult& result) {
  ordered_json j;
  j["inside"] = result.inside;
  j["outside"] = result.outside;
  j["recall"] = result.recall ? json(*result.recall) : json(nullptr);
  j["empty"] = result.empty();
  j["budget_fraction"] = result.budget_fraction;
  return j;
}

ordered_json to_json(const SyntheticSpec& spec) {
  ordered_json j;
  j["doc"] = spec.document_id;
  j["n"] = spec.n;
  j["baseline_mean"] = spec.baseline_mean;
  j["baseline_noise_sd"] = spec.baseline_noise_sd;
  ordered_json spans = ordered_json::array();
  for (const auto& s : spec.spans) {
    ordered_json e;
    e["start"] = s.start;
    e["length"] = s.length;
    e["spike_bits"] = s.spike_bits;
    spans.push_back(std::move(e));
  }
  j["spans"] = std::move(spans);
  j["seed"] = spec.seed;
  return j;
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  SyntheticSpec spec;
  if (j.contains("doc")) spec.document_id = field<std::string>(j, "doc", "synthetic spec");
  spec.n = field<std::size_t>(j, "n", "synthetic spec");
  spec.baseline_mean = field<double>(j, "baseline_mean", "synthetic spec");
  spec.baseline_noise_sd = field<double>(j, "baseline_noise_sd", "synthetic spec");
  spec.seed = j.contains("seed") ? field<std::uint64_t>(j, "seed", "synthetic spec") : 0;
  if (j.contains("spans")) {
    if (!j.at("spans").is_array()) throw ParseError(0, "synthetic spec: \"spans\" must be an array");
    for (const auto& s : j.at("spans")) {
      spec.spans.push_back({field<std::size_t>(s, "start", "synthetic span"),
                            field<std::size_t>(s, "length", "synthetic span"),
                            field<double>(s, "spike_bits", "synthetic span")});
    }
  }
  validate(spec);
  return spec;
}

}  // namespace entroheat
