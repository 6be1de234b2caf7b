#include "entroheat/hotspot.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <string>

#include "entroheat/error.hpp"

namespace entroheat {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

void sort_hotspots(std::vector<Hotspot>& hotspots) {
  std::sort(hotspots.begin(), hotspots.end(), [](const Hotspot& a, const Hotspot& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.start < b.start;
  });
}

void finish_report(const WindowSeries& windows, HotspotReport& report) {
  report.window_length = windows.window_length;
  report.n = windows.series_length();
  report.shading = shading(windows, report.n);
  report.budget_fraction =
      static_cast<double>(covered_token_count(report.hotspots)) / static_cast<double>(report.n);
}

template <typename T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(0, std::string("hotspot report: missing \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(0, std::string("hotspot report: bad type for \"") + key + "\"");
  }
}

}  // namespace

std::string strategy_name(SelectionKind kind) {
  return kind == SelectionKind::kRank ? "rank" : "percentile";
}

HotspotReport select_top_m(const WindowSeries& windows, std::ptrdiff_t m,
                           bool suppress_overlap) {
  if (m <= 0) throw DomainError("M must be positive, got " + std::to_string(m));
  if (windows.empty()) throw DomainError("cannot select hotspots from an empty window series");

  const auto& means = windows.means;
  const auto worse = [&](std::size_t a, std::size_t b) {
    if (means[a] != means[b]) return means[a] < means[b];
    return a > b;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> heap(worse);
  for (std::size_t i = 0; i < means.size(); ++i) heap.push(i);

  const std::size_t w = windows.window_length;
  const auto wanted = static_cast<std::size_t>(m);
  std::vector<char> blocked(suppress_overlap ? means.size() : 0, 0);

  HotspotReport report;
  report.strategy = {SelectionKind::kRank, wanted, 0.0};
  report.suppress_overlap = suppress_overlap;
  while (report.hotspots.size() < wanted && !heap.empty()) {
    const std::size_t i = heap.top();
    heap.pop();
    if (suppress_overlap) {
      if (blocked[i]) continue;
      const std::size_t lo = i >= w - 1 ? i - (w - 1) : 0;
      const std::size_t hi = std::min(means.size() - 1, i + (w - 1));
      std::fill(blocked.begin() + lo, blocked.begin() + hi + 1, 1);
    }
    report.hotspots.push_back({i + 1, i + w, means[i]});
  }
  finish_report(windows, report);
  return report;
}

double nearest_rank_percentile(std::span<const double> values, double alpha) {
  if (!(alpha > 0.0 && alpha < 100.0)) {
    throw DomainError("alpha must lie in (0, 100), got " + std::to_string(alpha));
  }
  if (values.empty()) throw DomainError("percentile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double exact = alpha * static_cast<double>(sorted.size()) / 100.0;
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

HotspotReport select_percentile(const WindowSeries& windows, double alpha) {
  if (!(alpha > 0.0 && alpha < 100.0)) {
    throw DomainError("alpha must lie in (0, 100), got " + std::to_string(alpha));
  }
  if (windows.empty()) throw DomainError("cannot select hotspots from an empty window series");
  const double cutoff = nearest_rank_percentile(windows.means, alpha);
  const std::size_t w = windows.window_length;

  HotspotReport report;
  report.strategy = {SelectionKind::kPercentile, 0, alpha};
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows.means[i] < cutoff) continue;
    const std::size_t start = i + 1;
    const std::size_t end = i + w;
    if (!report.hotspots.empty() && start <= report.hotspots.back().end + 1) {
      auto& run = report.hotspots.back();
      run.end = end;
      run.score = std::max(run.score, windows.means[i]);
    } else {
      report.hotspots.push_back({start, end, windows.means[i]});
    }
  }
  sort_hotspots(report.hotspots);
  finish_report(windows, report);
  return report;
}

std::vector<double> shading(const WindowSeries& windows, std::size_t n) {
  if (windows.empty()) return std::vector<double>(n, 0.0);
  if (n != windows.series_length()) {
    throw StructuralError("shading: window series covers " +
                          std::to_string(windows.series_length()) + " tokens, not " +
                          std::to_string(n));
  }
  const std::size_t w = windows.window_length;
  const std::size_t starts = windows.size();
  const auto& means = windows.means;

  // Token t is covered by starts [t-W+1, t] clipped to [0, starts-1]; both
  // ends move right with t, so a monotone deque gives the running max.
  std::vector<double> raw(n);
  std::deque<std::size_t> candidates;
  std::size_t next_start = 0;
  for (std::size_t t = 0; t < n; ++t) {
    while (next_start < starts && next_start <= t) {
      while (!candidates.empty() && means[candidates.back()] <= means[next_start]) {
        candidates.pop_back();
      }
      candidates.push_back(next_start++);
    }
    while (candidates.front() + w <= t) candidates.pop_front();
    raw[t] = means[candidates.front()];
  }

  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return std::vector<double>(n, 0.0);
  for (double& v : raw) v = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  return raw;
}

std::size_t covered_token_count(std::span<const Hotspot> hotspots) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  spans.reserve(hotspots.size());
  for (const auto& h : hotspots) spans.emplace_back(h.start, h.end);
  std::sort(spans.begin(), spans.end());
  std::size_t covered = 0;
  std::size_t reach = 0;  // last token counted so far
  for (const auto& [s, e] : spans) {
    if (e <= reach) continue;
    covered += e - std::max(s, reach + 1) + 1;
    reach = e;
  }
  return covered;
}

ordered_json to_json(const HotspotReport& report) {
  ordered_json j;
  j["strategy"] = strategy_name(report.strategy.kind);
  if (report.strategy.kind == SelectionKind::kRank) {
    j["M"] = report.strategy.m;
    j["suppress_overlap"] = report.suppress_overlap;
  } else {
    j["alpha"] = report.strategy.alpha;
  }
  j["W"] = report.window_length;
  j["n"] = report.n;
  ordered_json spots = ordered_json::array();
  for (const auto& h : report.hotspots) {
    ordered_json s;
    s["start"] = h.start;
    s["end"] = h.end;
    s["score"] = h.score;
    spots.push_back(std::move(s));
  }
  j["hotspots"] = std::move(spots);
  j["shading"] = report.shading;
  j["budget_fraction"] = report.budget_fraction;
  return j;
}

HotspotReport hotspot_report_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "hotspot report must be a JSON object");
  HotspotReport report;
  const auto strategy = required<std::string>(j, "strategy");
  if (strategy == "rank") {
    report.strategy.kind = SelectionKind::kRank;
    report.strategy.m = required<std::size_t>(j, "M");
    report.strategy.alpha = 0.0;
    report.suppress_overlap = required<bool>(j, "suppress_overlap");
  } else if (strategy == "percentile") {
    report.strategy.kind = SelectionKind::kPercentile;
    report.strategy.m = 0;
    report.strategy.alpha = required<double>(j, "alpha");
  } else {
    throw ParseError(0, "hotspot report: unknown strategy \"" + strategy + "\"");
  }
  report.window_length = required<std::size_t>(j, "W");
  report.n = required<std::size_t>(j, "n");
  if (!j.contains("hotspots") || !j.at("hotspots").is_array()) {
    throw ParseError(0, "hotspot report: \"hotspots\" must be an array");
  }
  for (const auto& s : j.at("hotspots")) {
    Hotspot h{required<std::size_t>(s, "start"), required<std::size_t>(s, "end"),
              required<double>(s, "score")};
    if (h.start < 1 || h.end < h.start || h.end > report.n) {
      throw StructuralError("hotspot report: span [" + std::to_string(h.start) + ", " +
                            std::to_string(h.end) + "] outside [1, n]");
    }
    report.hotspots.push_back(h);
  }
  report.shading = required<std::vector<double>>(j, "shading");
  if (report.shading.size() != report.n) {
    throw StructuralError("hotspot report: shading has " + std::to_string(report.shading.size()) +
                          " entries for n = " + std::to_string(report.n));
  }
  report.budget_fraction = required<double>(j, "budget_fraction");
  return report;
}

}  // namespace entroheat
