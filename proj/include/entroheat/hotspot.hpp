#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entroheat/windowing.hpp"

namespace entroheat {

/// A flagged token span [start, end], 1-based and inclusive. Rank selection
/// yields spans of exactly W tokens; percentile selection merges runs and can
/// yield longer ones.
struct Hotspot {
  std::size_t start = 0;
  std::size_t end = 0;
  double score = 0.0;  // mean window entropy, bits

  std::size_t length() const noexcept { return end - start + 1; }
  bool contains(std::size_t token) const noexcept { return token >= start && token <= end; }
  bool operator==(const Hotspot&) const = default;
};

enum class SelectionKind { kRank, kPercentile };

struct SelectionStrategy {
  SelectionKind kind = SelectionKind::kRank;
  std::size_t m = 3;     // rank
  double alpha = 90.0;   // percentile

  bool operator==(const SelectionStrategy&) const = default;
};

struct HotspotReport {
  std::vector<Hotspot> hotspots;  // descending score, ties by ascending start
  SelectionStrategy strategy;
  std::size_t window_length = 0;
  std::size_t n = 0;
  bool suppress_overlap = false;
  std::vector<double> shading;  // one value in [0,1] per token
  double budget_fraction = 0.0;  // tokens inside any hotspot / n

  bool operator==(const HotspotReport&) const = default;
};

/// Up to M windows with the largest means, taken from a max-heap. With
/// suppress_overlap every window overlapping an already chosen one is
/// discarded before the next pick. Ties go to the smaller start.
/// Throws DomainError when M <= 0 or the series is empty.
HotspotReport select_top_m(const WindowSeries& windows, std::ptrdiff_t m,
                           bool suppress_overlap);

/// Flags every window whose mean is >= the nearest-rank alpha-th percentile
/// and merges overlapping or touching flagged windows into maximal spans,
/// each scored by the largest mean it contains.
/// Throws DomainError unless 0 < alpha < 100.
HotspotReport select_percentile(const WindowSeries& windows, double alpha);

/// Nearest-rank percentile: the ceil(alpha/100 * N)-th smallest value.
double nearest_rank_percentile(std::span<const double> values, double alpha);

/// Per-token shade: the largest mean among windows covering the token,
/// min-max normalized over the document (all zeros when max == min).
std::vector<double> shading(const WindowSeries& windows, std::size_t n);

/// Number of distinct tokens covered by the union of the spans.
std::size_t covered_token_count(std::span<const Hotspot> hotspots);

nlohmann::ordered_json to_json(const HotspotReport& report);
/// Throws ParseError on missing or mistyped fields.
HotspotReport hotspot_report_from_json(const nlohmann::json& j);

std::string strategy_name(SelectionKind kind);

}  // namespace entroheat
