#include "entroheat/reprompt.hpp"

#include <algorithm>
#include <string>

#include "entroheat/codec.hpp"
#include "entroheat/error.hpp"

namespace entroheat {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

struct ParsedReply {
  RepromptResult result;
  bool well_formed = false;
};

std::string joined_range(const Transcript& t, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i <= last; ++i) out += t.tokens[i - 1].chosen_text;
  return out;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
  return text;
}

/// Drops a surrounding ``` fence (with optional language tag), if any.
std::string strip_fence(std::string text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || text.compare(first, 3, "```") != 0) return text;
  const auto body = text.find('\n', first);
  const auto close = text.rfind("```");
  if (body == std::string::npos || close == std::string::npos || close <= body) return text;
  return text.substr(body + 1, close - body - 1);
}

std::string truncated(const std::string& s, std::size_t limit = 200) {
  return s.size() > limit ? s.substr(0, limit) + "..." : s;
}

ParsedReply parse_reply(const std::string& raw_response, const Hotspot& hotspot,
                        std::string original_snippet, std::string span) {
  ParsedReply parsed;
  parsed.result.hotspot = hotspot;
  parsed.result.original_snippet = std::move(original_snippet);
  parsed.result.proposed_snippet = span;
  parsed.result.accepted = false;

  const json envelope = json::parse(raw_response, nullptr, false);
  if (envelope.is_discarded() || !envelope.is_object()) {
    throw TransportError(0, "endpoint response is not a JSON object");
  }
  std::string content;
  try {
    content = envelope.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw TransportError(0, "endpoint response has no message content");
  }

  const json reply = json::parse(strip_fence(content), nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) {
    parsed.result.rationale_text = "malformed model reply (not a JSON object): " + truncated(content);
    return parsed;
  }
  if (!reply.contains("corrected") || !reply.at("corrected").is_string()) {
    parsed.result.rationale_text =
        "malformed model reply (missing string field \"corrected\"): " + truncated(content);
    return parsed;
  }
  parsed.result.proposed_snippet = reply.at("corrected").get<std::string>();
  if (reply.contains("rationale") && reply.at("rationale").is_string()) {
    parsed.result.rationale_text = reply.at("rationale").get<std::string>();
  }
  parsed.well_formed = true;
  return parsed;
}

}  // namespace

std::string extract_snippet(const Transcript& transcript, const Hotspot& hotspot,
                            std::size_t radius) {
  const std::size_t n = transcript.size();
  if (hotspot.start < 1 || hotspot.end < hotspot.start || hotspot.end > n) {
    throw StructuralError("hotspot [" + std::to_string(hotspot.start) + ", " +
                          std::to_string(hotspot.end) + "] lies outside the transcript");
  }
  const std::size_t first = hotspot.start > radius ? hotspot.start - radius : 1;
  const std::size_t last = std::min(n, hotspot.end + radius);
  return joined_range(transcript, first, last);
}

std::string span_text(const Transcript& transcript, const Hotspot& hotspot) {
  return extract_snippet(transcript, hotspot, 0);
}

ordered_json build_reprompt_body(const Transcript& transcript, const Hotspot& hotspot,
                                 const RequestConfig& cfg, const RepromptOptions& options,
                                 const ImageInput* image) {
  const std::size_t n = transcript.size();
  const std::string span = span_text(transcript, hotspot);
  const std::size_t first = hotspot.start > options.context_radius ? hotspot.start - options.context_radius : 1;
  const std::size_t last = std::min(n, hotspot.end + options.context_radius);
  std::string marked;
  if (first < hotspot.start) marked += joined_range(transcript, first, hotspot.start - 1);
  marked += "<<<" + span + ">>>";
  if (hotspot.end < last) marked += joined_range(transcript, hotspot.end + 1, last);

  const PromptSet defaults = default_prompts();
  const std::string system = options.system_prompt.empty() ? defaults.reprompt_system : options.system_prompt;
  std::string user = options.user_prompt.empty() ? defaults.reprompt_user : options.user_prompt;
  user = replace_all(replace_all(std::move(user), "{snippet}", marked), "{span}", span);

  ordered_json body;
  body["model"] = cfg.model_id;
  ordered_json sys;
  sys["role"] = "system";
  sys["content"] = system;
  ordered_json text_part;
  text_part["type"] = "text";
  text_part["text"] = user;
  ordered_json parts = ordered_json::array({text_part});
  if (options.include_image && image != nullptr && !image->bytes.empty()) {
    ordered_json image_part;
    image_part["type"] = "image_url";
    image_part["image_url"]["url"] =
        "data:" + image->mime_type + ";base64," + base64_encode(image->bytes);
    parts.push_back(std::move(image_part));
  }
  ordered_json usr;
  usr["role"] = "user";
  usr["content"] = std::move(parts);
  body["messages"] = ordered_json::array({sys, usr});
  body["max_tokens"] = cfg.max_tokens;
  body["temperature"] = 0;
  body["response_format"]["type"] = "json_object";
  return body;
}

RepromptResult parse_reprompt_reply(const std::string& raw_response, const Hotspot& hotspot,
                                    std::string original_snippet, std::string span) {
  return parse_reply(raw_response, hotspot, std::move(original_snippet), std::move(span)).result;
}

RepromptOutcome reprompt_hotspots(const Transcript& transcript, const HotspotReport& report,
                                  const RequestConfig& cfg, ChatClient& client,
                                  const RepromptOptions& options, const ImageInput* image) {
  if (report.n != transcript.size()) {
    throw StructuralError("hotspot report covers " + std::to_string(report.n) +
                          " tokens but the transcript has " + std::to_string(transcript.size()));
  }
  RepromptOutcome outcome;
  for (const auto& hotspot : report.hotspots) {
    const ordered_json body = build_reprompt_body(transcript, hotspot, cfg, options, image);
    const std::string raw = client.complete(body, cfg);
    ParsedReply parsed = parse_reply(raw, hotspot,
                                     extract_snippet(transcript, hotspot, options.context_radius),
                                     span_text(transcript, hotspot));
    parsed.result.accepted = options.auto_accept && parsed.well_formed;
    outcome.results.push_back(std::move(parsed.result));
  }
  if (options.auto_accept) outcome.patched = apply_corrections(transcript, outcome.results);
  return outcome;
}

Transcript apply_corrections(const Transcript& transcript,
                             const std::vector<RepromptResult>& results) {
  std::vector<const RepromptResult*> accepted;
  for (const auto& r : results) {
    if (r.accepted) accepted.push_back(&r);
  }
  // Results arrive in score order; the better-scored span wins an overlap.
  std::vector<const RepromptResult*> applied;
  for (const auto* r : accepted) {
    const bool clashes = std::any_of(applied.begin(), applied.end(), [&](const auto* other) {
      return r->hotspot.start <= other->hotspot.end && other->hotspot.start <= r->hotspot.end;
    });
    if (!clashes) applied.push_back(r);
  }
  std::sort(applied.begin(), applied.end(),
            [](const auto* a, const auto* b) { return a->hotspot.start < b->hotspot.start; });

  Transcript patched;
  patched.source_meta = transcript.source_meta;
  std::string spans;
  std::size_t next = 1;
  auto copy_until = [&](std::size_t stop) {
    for (; next < stop; ++next) patched.tokens.push_back(transcript.tokens[next - 1]);
  };
  for (const auto* r : applied) {
    copy_until(r->hotspot.start);
    TokenRecord replacement;
    replacement.chosen_text = r->proposed_snippet;
    replacement.alternatives = {{r->proposed_snippet, 0.0}};
    patched.tokens.push_back(std::move(replacement));
    next = r->hotspot.end + 1;
    if (!spans.empty()) spans += ",";
    spans += std::to_string(r->hotspot.start) + "-" + std::to_string(r->hotspot.end);
  }
  copy_until(transcript.size() + 1);
  for (std::size_t i = 0; i < patched.tokens.size(); ++i) patched.tokens[i].index = i + 1;
  patched.text = joined_token_text(patched);
  if (!spans.empty()) patched.source_meta["patched_spans"] = spans;
  return patched;
}

ordered_json to_json(const RepromptResult& result) {
  ordered_json j;
  j["start"] = result.hotspot.start;
  j["end"] = result.hotspot.end;
  j["score"] = result.hotspot.score;
  j["original_snippet"] = result.original_snippet;
  j["proposed_snippet"] = result.proposed_snippet;
  j["accepted"] = result.accepted;
  j["rationale"] = result.rationale_text;
  return j;
}

}  // namespace entroheat
