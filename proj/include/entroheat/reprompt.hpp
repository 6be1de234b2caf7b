#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entroheat/hotspot.hpp"
#include "entroheat/ocr_client.hpp"
#include "entroheat/token_stream.hpp"

namespace entroheat {

struct RepromptResult {
  Hotspot hotspot;
  std::string original_snippet;  // tokens [start - C, end + C], clipped
  std::string proposed_snippet;  // replacement for tokens [start, end]
  bool accepted = false;
  std::string rationale_text;

  bool operator==(const RepromptResult&) const = default;
};

struct RepromptOptions {
  std::size_t context_radius = 20;
  bool include_image = true;
  bool auto_accept = false;
  std::string system_prompt;  // empty: default_prompts().reprompt_system
  std::string user_prompt;    // empty: default_prompts().reprompt_user
};

struct RepromptOutcome {
  std::vector<RepromptResult> results;
  std::optional<Transcript> patched;  // only with auto_accept
};

/// Concatenated text of tokens [start - radius, end + radius] clipped to
/// [1, n].
std::string extract_snippet(const Transcript& transcript, const Hotspot& hotspot,
                            std::size_t radius);

/// Text of the tokens inside the hotspot.
std::string span_text(const Transcript& transcript, const Hotspot& hotspot);

nlohmann::ordered_json build_reprompt_body(const Transcript& transcript, const Hotspot& hotspot,
                                           const RequestConfig& cfg,
                                           const RepromptOptions& options,
                                           const ImageInput* image);

/// Reads the model reply. A reply that is not the expected JSON object gives
/// an unaccepted result whose rationale explains what was wrong.
RepromptResult parse_reprompt_reply(const std::string& raw_response, const Hotspot& hotspot,
                                    std::string original_snippet, std::string span);

/// One request per hotspot, in report order. The input transcript is never
/// modified; with auto_accept a patched copy is returned alongside.
/// Throws StructuralError when the report was not computed for this
/// transcript.
RepromptOutcome reprompt_hotspots(const Transcript& transcript, const HotspotReport& report,
                                  const RequestConfig& cfg, ChatClient& client,
                                  const RepromptOptions& options,
                                  const ImageInput* image = nullptr);

/// Replaces each accepted hotspot span by one token holding the proposed
/// text. Accepted spans overlapping an earlier-applied one are skipped.
Transcript apply_corrections(const Transcript& transcript,
                             const std::vector<RepromptResult>& results);

nlohmann::ordered_json to_json(const RepromptResult& result);

}  // namespace entroheat
