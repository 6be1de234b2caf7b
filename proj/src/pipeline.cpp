#include "entroheat/pipeline.hpp"

#include <cmath>
#include <string>

#include "entroheat/error.hpp"

namespace entroheat {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

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

Analysis analyze(const EntropySeries& entropy, const AnalysisOptions& options) {
  Analysis out;
  out.entropy = entropy;
  out.windows = window_means(entropy, options.window);
  out.report = options.strategy == SelectionKind::kRank
                   ? select_top_m(out.windows, options.m, options.suppress_overlap)
                   : select_percentile(out.windows, options.alpha);
  return out;
}

Analysis analyze(const Transcript& transcript, const AnalysisOptions& options) {
  Analysis out = analyze(entropy_series(transcript, options.exclude_special), options);
  if (auto it = transcript.source_meta.find("image"); it != transcript.source_meta.end()) {
    out.document_id = it->second;
  }
  return out;
}

ordered_json to_json(const EntropySeries& series) {
  ordered_json j;
  j["values"] = series.values;
  j["tail_mass"] = series.tail_masses;
  j["excluded_special"] = series.excluded_special;
  if (series.excluded_special) {
    std::vector<std::size_t> excluded;
    for (std::size_t i = 0; i < series.excluded.size(); ++i) {
      if (series.excluded[i]) excluded.push_back(i + 1);
    }
    j["excluded"] = excluded;
  }
  return j;
}

EntropySeries entropy_series_from_json(const json& j) {
  EntropySeries series;
  series.values = field<std::vector<double>>(j, "values", "entropy series");
  if (series.values.empty()) throw StructuralError("entropy series is empty");
  for (double v : series.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("entropy values must be finite and >= 0");
  }
  if (j.contains("tail_mass")) {
    series.tail_masses = field<std::vector<double>>(j, "tail_mass", "entropy series");
    if (series.tail_masses.size() != series.values.size()) {
      throw StructuralError("entropy series: tail_mass and values differ in length");
    }
  } else {
    series.tail_masses.assign(series.values.size(), 0.0);
  }
  series.excluded_special = j.contains("excluded_special") &&
                            field<bool>(j, "excluded_special", "entropy series");
  if (series.excluded_special) {
    series.excluded.assign(series.values.size(), 0);
    if (j.contains("excluded")) {
      for (std::size_t idx : field<std::vector<std::size_t>>(j, "excluded", "entropy series")) {
        if (idx < 1 || idx > series.values.size()) {
          throw StructuralError("entropy series: excluded index out of range");
        }
        series.excluded[idx - 1] = 1;
      }
    }
  }
  return series;
}

ordered_json to_json(const Analysis& analysis) {
  ordered_json j;
  j["doc"] = analysis.document_id;
  j["n"] = analysis.entropy.size();
  j["entropy"] = to_json(analysis.entropy);
  ordered_json windows;
  windows["W"] = analysis.windows.window_length;
  windows["sums"] = analysis.windows.sums;
  windows["means"] = analysis.windows.means;
  j["windows"] = std::move(windows);
  j["report"] = to_json(analysis.report);
  if (analysis.truth) j["truth"] = to_json(*analysis.truth);
  return j;
}

Analysis analysis_from_json(const json& j) {
  if (!j.is_object()) throw ParseError(0, "analysis must be a JSON object");
  Analysis a;
  if (j.contains("doc")) a.document_id = field<std::string>(j, "doc", "analysis");
  a.entropy = entropy_series_from_json(field<json>(j, "entropy", "analysis"));
  const json windows = field<json>(j, "windows", "analysis");
  a.windows.window_length = field<std::size_t>(windows, "W", "analysis windows");
  a.windows.sums = field<std::vector<double>>(windows, "sums", "analysis windows");
  a.windows.means = field<std::vector<double>>(windows, "means", "analysis windows");
  a.report = hotspot_report_from_json(field<json>(j, "report", "analysis"));
  if (a.report.n != a.entropy.size() || a.windows.series_length() != a.entropy.size()) {
    throw StructuralError("analysis: entropy, windows and report disagree on n");
  }
  if (j.contains("truth")) a.truth = annotation_set_from_json(j.at("truth"));
  return a;
}

}  // namespace entroheat
