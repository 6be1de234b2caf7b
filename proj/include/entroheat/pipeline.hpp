#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "entroheat/entropy.hpp"
#include "entroheat/eval.hpp"
#include "entroheat/hotspot.hpp"
#include "entroheat/token_stream.hpp"
#include "entroheat/windowing.hpp"

namespace entroheat {

struct AnalysisOptions {
  std::ptrdiff_t window = 10;
  std::ptrdiff_t m = 3;
  SelectionKind strategy = SelectionKind::kRank;
  double alpha = 90.0;
  bool suppress_overlap = true;
  bool exclude_special = false;
};

/// Everything the analyze stage produces for one document.
struct Analysis {
  std::string document_id;
  EntropySeries entropy;
  WindowSeries windows;
  HotspotReport report;
  std::optional<AnnotationSet> truth;  // carried through from synthetic input
};

Analysis analyze(const EntropySeries& entropy, const AnalysisOptions& options);
Analysis analyze(const Transcript& transcript, const AnalysisOptions& options);

nlohmann::ordered_json to_json(const EntropySeries& series);
EntropySeries entropy_series_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const Analysis& analysis);
Analysis analysis_from_json(const nlohmann::json& j);

}  // namespace entroheat
