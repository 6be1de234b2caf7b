#include <doctest.h>

#include <deque>

#include "entroheat/error.hpp"
#include "entroheat/pipeline.hpp"
#include "entroheat/reprompt.hpp"
#include "test_support.hpp"

using namespace entroheat;
using namespace entroheat::testing;

namespace {

Transcript words(std::initializer_list<const char*> texts) {
  Transcript t;
  for (const char* s : texts) {
    TokenRecord r;
    r.index = t.tokens.size() + 1;
    r.chosen_text = s;
    r.alternatives = {{s, -0.1}};
    t.tokens.push_back(r);
  }
  t.text = joined_token_text(t);
  return t;
}

std::string reply(const std::string& content) {
  nlohmann::json j;
  j["choices"][0]["message"]["content"] = content;
  return j.dump();
}

struct PageCase {
  Transcript transcript;
  Analysis analysis;
  ImageInput image;
  RequestConfig cfg = RequestConfig::with_default_prompts();
};

PageCase page_case() {
  ChatClient client(ArchiveStore(fixture("replay")), ClientMode::kReplay);
  PageCase c;
  c.image = load_image(fixture("page.png"));
  c.transcript = transcribe(c.image, c.cfg, client);
  c.analysis = analyze(c.transcript, AnalysisOptions{});
  return c;
}

/// Answers every request with the same reply and counts them.
class EchoTransport : public Transport {
 public:
  explicit EchoTransport(std::string raw) : raw_(std::move(raw)) {}
  HttpResponse post(const HttpRequest&) override {
    ++calls;
    return {200, raw_};
  }
  int calls = 0;

 private:
  std::string raw_;
};

}  // namespace

TEST_CASE("snippet extraction clips at both ends") {
  const Transcript t = words({"a", "b", "c", "d", "e", "f", "g"});
  CHECK(span_text(t, {3, 4, 0}) == "cd");
  CHECK(extract_snippet(t, {3, 4, 0}, 0) == "cd");
  CHECK(extract_snippet(t, {3, 4, 0}, 1) == "bcde");
  CHECK(extract_snippet(t, {1, 2, 0}, 3) == "abcde");
  CHECK(extract_snippet(t, {6, 7, 0}, 3) == "cdefg");
  CHECK(extract_snippet(t, {4, 4, 0}, 100) == "abcdefg");
  CHECK_THROWS_AS(extract_snippet(t, {6, 8, 0}, 0), StructuralError);
  CHECK_THROWS_AS(extract_snippet(t, {0, 1, 0}, 0), StructuralError);
}

TEST_CASE("reprompt body marks the span inside its context") {
  const Transcript t = words({"x", "=", "1", "+", "2"});
  RepromptOptions options;
  options.context_radius = 1;
  options.user_prompt = "fix {span} in {snippet}";
  const auto body = build_reprompt_body(t, {3, 3, 0}, RequestConfig::with_default_prompts(), options, nullptr);
  CHECK(body["messages"][1]["content"][0]["text"] == "fix 1 in =<<<1>>>+");
  CHECK(body["messages"][1]["content"].size() == 1);
  CHECK(body["response_format"]["type"] == "json_object");
  CHECK(body["temperature"] == 0);
}

TEST_CASE("no hotspots means no requests") {
  const Transcript t = words({"a", "b"});
  HotspotReport report;
  report.n = 2;
  auto transport = std::make_shared<EchoTransport>(reply("{}"));
  TempDir dir;
  ChatClient client(ArchiveStore(dir.path()), ClientMode::kLive, transport, {},
                    [](const std::string&) { return std::optional<std::string>("k"); });
  const auto out = reprompt_hotspots(t, report, RequestConfig::with_default_prompts(), client, {});
  CHECK(out.results.empty());
  CHECK_FALSE(out.patched.has_value());
  CHECK(transport->calls == 0);
}

TEST_CASE("report and transcript must agree") {
  const Transcript t = words({"a", "b"});
  HotspotReport report;
  report.n = 3;
  ChatClient client(ArchiveStore(fixture("replay")), ClientMode::kReplay);
  CHECK_THROWS_AS(reprompt_hotspots(t, report, RequestConfig::with_default_prompts(), client, {}),
                  StructuralError);
}

TEST_CASE("replayed corrections on the page fixture") {
  const PageCase c = page_case();
  REQUIRE(c.analysis.report.hotspots.size() == 3);
  ChatClient client(ArchiveStore(fixture("replay")), ClientMode::kReplay);

  for (bool with_image : {true, false}) {
    RepromptOptions options;
    options.include_image = with_image;
    const auto out = reprompt_hotspots(c.transcript, c.analysis.report, c.cfg, client, options, &c.image);
    REQUIRE(out.results.size() == 3);
    const auto& hs = c.analysis.report.hotspots;

    CHECK(out.results[0].hotspot == hs[0]);
    CHECK(out.results[0].proposed_snippet == "$\\lambda_n = (n\\pi/L)^2$");
    CHECK(out.results[0].rationale_text == "exponent restored");
    CHECK(out.results[0].original_snippet == extract_snippet(c.transcript, hs[0], 20));
    CHECK_FALSE(out.results[0].accepted);

    // Fenced JSON is still understood.
    CHECK(out.results[1].proposed_snippet == " b_n = \\frac{2}{L}\\int_0^L");
    CHECK(out.results[1].rationale_text == "unchanged");

    // Free text is not a correction: the span is kept as is.
    CHECK_FALSE(out.results[2].accepted);
    CHECK(out.results[2].proposed_snippet == span_text(c.transcript, hs[2]));
    CHECK(out.results[2].rationale_text.find("malformed") != std::string::npos);
    CHECK_FALSE(out.patched.has_value());
  }
}

TEST_CASE("auto-accept patches well-formed corrections only") {
  const PageCase c = page_case();
  const Transcript before = c.transcript;
  ChatClient client(ArchiveStore(fixture("replay")), ClientMode::kReplay);
  RepromptOptions options;
  options.auto_accept = true;
  const auto out = reprompt_hotspots(c.transcript, c.analysis.report, c.cfg, client, options, &c.image);
  REQUIRE(out.patched.has_value());
  CHECK(out.results[0].accepted);
  CHECK(out.results[1].accepted);
  CHECK_FALSE(out.results[2].accepted);
  CHECK(c.transcript == before);

  const auto& hs = c.analysis.report.hotspots;
  const Transcript& p = *out.patched;
  CHECK(p.size() == before.size() - hs[0].length() - hs[1].length() + 2);
  CHECK(p.text.find("$\\lambda_n = (n\\pi/L)^2$") != std::string::npos);
  CHECK(p.text == joined_token_text(p));
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p.tokens[i].index == i + 1);
  CHECK(p.source_meta.count("patched_spans") == 1);
}

TEST_CASE("apply_corrections keeps the better-scored span on overlap") {
  const Transcript t = words({"a", "b", "c", "d", "e", "f"});
  std::vector<RepromptResult> results{
      {{2, 3, 9.0}, "", "X", true, ""},
      {{3, 5, 8.0}, "", "Y", true, ""},
      {{6, 6, 7.0}, "", "Z", false, ""},
  };
  const Transcript p = apply_corrections(t, results);
  CHECK(p.text == "aXdef");
  CHECK(p.source_meta.at("patched_spans") == "2-3");
  CHECK(t.text == "abcdef");

  const Transcript none = apply_corrections(t, {});
  CHECK(none.text == t.text);
  CHECK(none.tokens == t.tokens);
}

TEST_CASE("reply parsing") {
  const Hotspot h{1, 2, 0.5};
  auto r = parse_reprompt_reply(reply(R"({"corrected":"ok"})"), h, "ctx", "span");
  CHECK(r.proposed_snippet == "ok");
  CHECK(r.rationale_text.empty());
  r = parse_reprompt_reply(reply(R"({"corrected": 3})"), h, "ctx", "span");
  CHECK(r.proposed_snippet == "span");
  CHECK(r.rationale_text.find("malformed") != std::string::npos);
  CHECK_THROWS_AS(parse_reprompt_reply("<html>", h, "", ""), TransportError);
  CHECK_THROWS_AS(parse_reprompt_reply(R"({"choices":[]})", h, "", ""), TransportError);
}

TEST_CASE("result JSON") {
  const RepromptResult r{{4, 6, 1.25}, "abc", "abd", false, "why"};
  const auto j = to_json(r);
  CHECK(j.dump() ==
        R"({"start":4,"end":6,"score":1.25,"original_snippet":"abc","proposed_snippet":"abd","accepted":false,"rationale":"why"})");
}
