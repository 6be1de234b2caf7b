// Regenerates the committed test fixtures: canned endpoint responses stored
// as replay archives, plus tiny.jsonl. Run after changing prompts, request
// bodies or the fixture texts:
//   cmake --build build --target make_fixtures && build/tests/make_fixtures tests/fixtures

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entroheat/ocr_client.hpp"
#include "entroheat/pipeline.hpp"
#include "entroheat/reprompt.hpp"

using namespace entroheat;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

const char* const kCapturedAt = "2026-01-15T09:30:00Z";

const char* const kPageText =
    "\\section{Heat flow in a thin rod}\n"
    "Let $u(x,t)$ denote the temperature at position $x$ and time $t$. "
    "Conservation of energy gives\n"
    "\\begin{equation}\n"
    "  \\frac{\\partial u}{\\partial t} = \\kappa \\frac{\\partial^2 u}{\\partial x^2}, "
    "\\qquad 0 < x < L,\n"
    "\\end{equation}\n"
    "with boundary values $u(0,t) = u(L,t) = 0$ and initial profile $u(x,0) = f(x)$. "
    "Separating variables, $u = X(x)T(t)$, yields $X'' + \\lambda X = 0$ and "
    "$T' + \\kappa\\lambda T = 0$. The admissible eigenvalues are "
    "$\\lambda_n = (n\\pi/L)^2$ for $n = 1, 2, \\dots$, so\n"
    "\\[\n"
    "  u(x,t) = \\sum_{n=1}^{\\infty} b_n \\sin\\!\\left(\\frac{n\\pi x}{L}\\right) "
    "e^{-\\kappa \\lambda_n t},\n"
    "\\]\n"
    "where the coefficients follow from orthogonality:\n"
    "\\[\n"
    "  b_n = \\frac{2}{L}\\int_0^L f(x)\\sin\\!\\left(\\frac{n\\pi x}{L}\\right)\\,dx .\n"
    "\\]\n"
    "Table~\\ref{tab:rates} lists the decay rate of the first four modes for a copper rod "
    "of length 50\\,cm; the values were measured at 21\\% relative humidity.\n";

// Substrings of kPageText whose tokens get a flat, uncertain distribution.
const std::vector<std::string> kPageHot = {
    "$\\lambda_n = (n\\pi/L)^2$",
    "b_n = \\frac{2}{L}\\int_0^L",
    "50\\,cm; the values were measured at 21\\%",
};

const char* const kAdaptiveText = "Let $x_1 = 3$ and $y_1 = x_1^2 + 1$.\n";

const char* const kTinyText =
    "Let $\\frac{a}{b}$ be 50% of $c_1$.\n"
    "```\n"
    "x & y # {z} ~ ^\n";

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

/// Rough BPE-like split: an optional leading space plus a run of up to six
/// alphanumerics, a backslash command, or a single other character.
std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::string tok;
    if (text[i] == ' ' && i + 1 < text.size() && word_char(text[i + 1])) tok += text[i++];
    if (text[i] == '\\' && i + 1 < text.size() && std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
      tok += text[i++];
      while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) tok += text[i++];
    } else if (word_char(text[i])) {
      while (i < text.size() && word_char(text[i]) && tok.size() < 6) tok += text[i++];
    } else if (text.compare(i, 3, "```") == 0) {
      tok += "```";
      i += 3;
    } else {
      tok += text[i++];
    }
    out.push_back(tok);
  }
  return out;
}

std::string variant(const std::string& tok, int j) {
  static const char* const swaps = "lI1O0rnmS5xX";
  std::string v = tok;
  const char c = swaps[(j * 5 + static_cast<int>(tok.size())) % 12];
  if (!v.empty() && v.back() != c) {
    v.back() = c;
  } else {
    v += c;
  }
  return v;
}

ordered_json bytes_of(const std::string& s) {
  ordered_json arr = ordered_json::array();
  for (unsigned char c : s) arr.push_back(static_cast<int>(c));
  return arr;
}

/// `listed` is the mass the k alternatives should carry; p0 the chosen one.
ordered_json logprob_entry(const std::string& tok, int k, double p0, double listed,
                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.3, 1.0);
  std::vector<double> rest(k - 1);
  double total = 0;
  for (auto& r : rest) total += (r = u(rng));
  for (auto& r : rest) r = r / total * (listed - p0);
  std::sort(rest.begin(), rest.end(), std::greater<>());
  if (!rest.empty() && rest.front() > p0) rest.front() = p0 * 0.999;

  std::set<std::string> used{tok};
  ordered_json top = ordered_json::array();
  auto add = [&](const std::string& t, double p) {
    ordered_json e;
    e["token"] = t;
    e["logprob"] = std::log(p);
    e["bytes"] = bytes_of(t);
    top.push_back(std::move(e));
  };
  add(tok, p0);
  for (int j = 0; j < k - 1; ++j) {
    std::string v = variant(tok, j);
    while (used.count(v)) v += "'";
    used.insert(v);
    add(v, rest[j]);
  }
  ordered_json entry;
  entry["token"] = tok;
  entry["logprob"] = std::log(p0);
  entry["bytes"] = bytes_of(tok);
  entry["top_logprobs"] = std::move(top);
  return entry;
}

std::string completion(const std::string& text, ordered_json content, const std::string& id) {
  ordered_json msg;
  msg["role"] = "assistant";
  msg["content"] = text;
  ordered_json choice;
  choice["index"] = 0;
  choice["message"] = std::move(msg);
  if (!content.is_null()) choice["logprobs"]["content"] = std::move(content);
  choice["finish_reason"] = "stop";
  ordered_json j;
  j["id"] = id;
  j["object"] = "chat.completion";
  j["created"] = 1768469400;
  j["model"] = "gpt-4o-2024-08-06";
  j["choices"] = ordered_json::array({choice});
  return j.dump();
}

std::vector<bool> hot_mask(const std::string& text, const std::vector<std::string>& tokens,
                           const std::vector<std::string>& hot) {
  std::vector<bool> mask(tokens.size(), false);
  for (const auto& h : hot) {
    const auto at = text.find(h);
    if (at == std::string::npos) throw std::runtime_error("hot substring not found: " + h);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::size_t end = pos + tokens[i].size();
      if (end > at && pos < at + h.size()) mask[i] = true;
      pos = end;
    }
  }
  return mask;
}

void archive(const fs::path& dir, const ordered_json& body, const std::string& response) {
  ArchiveStore(dir).save({ChatClient::request_hash(body), response, kCapturedAt});
}

ImageInput fixture_image(const fs::path& dir, const char* name) {
  ImageInput img = load_image(dir / name);
  img.reference = name;
  return img;
}

std::string page_response(std::uint64_t seed) {
  const auto tokens = tokenize(kPageText);
  const auto hot = hot_mask(kPageText, tokens, kPageHot);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> calm(0.93, 0.995);
  std::uniform_real_distribution<double> shaky(0.3, 0.55);
  ordered_json content = ordered_json::array();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double p0 = hot[i] ? shaky(rng) : calm(rng);
    const double listed = hot[i] ? 0.92 : 1.0 - (1.0 - p0) * 0.05;
    content.push_back(logprob_entry(tokens[i], 5, p0, listed, rng));
  }
  return completion(kPageText, std::move(content), "chatcmpl-fixture-page");
}

std::string adaptive_response(int k) {
  const auto tokens = tokenize(kAdaptiveText);
  std::mt19937_64 rng(100 + k);
  ordered_json content = ordered_json::array();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    // Token 4 ("x" of x_1) has a heavy tail at k=5 that k=10 uncovers.
    const bool heavy = i == 4;
    const double p0 = heavy ? 0.4 : 0.97;
    const double listed = heavy ? (k >= 10 ? 0.95 : 0.7) : 0.995;
    content.push_back(logprob_entry(tokens[i], k, p0, listed, rng));
  }
  return completion(kAdaptiveText, std::move(content), "chatcmpl-fixture-adaptive-k" + std::to_string(k));
}

std::string reply(const std::string& content) {
  return completion(content, nullptr, "chatcmpl-fixture-reprompt");
}

void write_tiny(const fs::path& dir) {
  const auto tokens = tokenize(kTinyText);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> calm(0.9, 0.99);
  Transcript t;
  t.source_meta["model"] = "fixture";
  t.source_meta["k"] = "5";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool shaky = tokens[i].find_first_of("%#~^&") != std::string::npos || tokens[i].find("frac") != std::string::npos;
    const double p0 = shaky ? 0.45 : calm(rng);
    const auto entry = logprob_entry(tokens[i], 5, p0, shaky ? 0.9 : 0.995, rng);
    std::vector<TokenAlternative> alts;
    for (const auto& a : entry["top_logprobs"]) alts.push_back({a["token"], a["logprob"]});
    t.tokens.push_back(make_record(i + 1, tokens[i], std::move(alts)));
  }
  mark_special(t, SpecialTokenRule());
  t.text = joined_token_text(t);
  write_transcript_file(t, (dir / "tiny.jsonl").string());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixtures FIXTURE_DIR\n");
    return 2;
  }
  const fs::path dir = argv[1];
  const fs::path replay = dir / "replay";
  fs::remove_all(replay);

  RequestConfig cfg = RequestConfig::with_default_prompts();

  // scan page.png with the default request.
  const ImageInput page = fixture_image(dir, "page.png");
  const std::string page_raw = page_response(2026);
  archive(replay, build_transcription_body(page, cfg), page_raw);

  // reprompt of the page hotspots under default analysis options, image
  // attached: one clean reply, one fenced, one malformed.
  Transcript t = parse_transcription_response(page_raw);
  const Analysis a = analyze(t, AnalysisOptions{});
  const std::vector<std::string> replies = {
      R"({"corrected": "$\\lambda_n = (n\\pi/L)^2$", "rationale": "exponent restored"})",
      "```json\n{\"corrected\": \" b_n = \\\\frac{2}{L}\\\\int_0^L\", \"rationale\": \"unchanged\"}\n```",
      "The span looks fine to me.",
  };
  for (std::size_t i = 0; i < a.report.hotspots.size() && i < replies.size(); ++i) {
    for (bool with_image : {true, false}) {
      RepromptOptions options;
      options.include_image = with_image;
      archive(replay, build_reprompt_body(t, a.report.hotspots[i], cfg, options, with_image ? &page : nullptr),
              reply(replies[i]));
    }
  }

  // adaptive.png: heavy tail at k=5, resolved at k=10.
  const ImageInput adaptive = fixture_image(dir, "adaptive.png");
  for (int k : {5, 10}) {
    RequestConfig c = cfg;
    c.k = k;
    archive(replay, build_transcription_body(adaptive, c), adaptive_response(k));
  }

  // nologprobs.png: a response without token logprobs.
  const ImageInput nolog = fixture_image(dir, "nologprobs.png");
  archive(replay, build_transcription_body(nolog, cfg), completion("Plain text.", nullptr, "chatcmpl-fixture-nolog"));

  write_tiny(dir);
  std::printf("fixtures written to %s\n", dir.string().c_str());
  return 0;
}
