#include "entroheat/token_stream.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "entroheat/error.hpp"

namespace entroheat {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

bool is_canonical_integer(const std::string& value) {
  if (value.empty() || value.size() > 18) return false;
  if (!std::all_of(value.begin(), value.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return false;
  }
  return value == "0" || value.front() != '0';
}

std::string meta_value_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

TokenRecord record_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "expected a JSON object");
  for (const char* key : {"i", "text", "alts"}) {
    if (!j.contains(key)) throw ParseError(line, std::string("missing key \"") + key + "\"");
  }
  const auto& i = j.at("i");
  if (!i.is_number_integer() || i.get<long long>() < 1) {
    throw ParseError(line, "\"i\" must be a positive integer");
  }
  if (!j.at("text").is_string()) throw ParseError(line, "\"text\" must be a string");
  const auto& alts = j.at("alts");
  if (!alts.is_array()) throw ParseError(line, "\"alts\" must be an array");

  TokenRecord record;
  record.index = i.get<std::size_t>();
  record.chosen_text = j.at("text").get<std::string>();
  record.alternatives.reserve(alts.size());
  for (const auto& alt : alts) {
    if (!alt.is_array() || alt.size() != 2 || !alt[0].is_string() || !alt[1].is_number()) {
      throw ParseError(line, "each alternative must be [<string>, <number>]");
    }
    record.alternatives.push_back({alt[0].get<std::string>(), alt[1].get<double>()});
  }
  if (j.contains("special")) {
    if (!j.at("special").is_boolean()) throw ParseError(line, "\"special\" must be a boolean");
    record.is_special = j.at("special").get<bool>();
  }
  return record;
}

}  // namespace

SpecialTokenRule::SpecialTokenRule() : patterns_{"\n", "```"} {}

SpecialTokenRule::SpecialTokenRule(std::vector<std::string> patterns)
    : patterns_(std::move(patterns)) {
  std::erase_if(patterns_, [](const std::string& p) { return p.empty(); });
  // Longest first so "```" wins over a hypothetical "`".
  std::stable_sort(patterns_.begin(), patterns_.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
}

bool SpecialTokenRule::matches(std::string_view text) const {
  bool saw_pattern = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r') {
      ++pos;
      continue;
    }
    bool advanced = false;
    for (const auto& p : patterns_) {
      if (text.substr(pos, p.size()) == p) {
        pos += p.size();
        saw_pattern = advanced = true;
        break;
      }
    }
    if (!advanced) return false;
  }
  return saw_pattern;
}

TokenRecord make_record(std::size_t index, std::string chosen_text,
                        std::vector<TokenAlternative> alternatives,
                        std::optional<double> chosen_logprob) {
  if (chosen_logprob) {
    const bool present = std::any_of(alternatives.begin(), alternatives.end(),
                                     [&](const auto& a) { return a.text == chosen_text; });
    if (!present) alternatives.push_back({chosen_text, *chosen_logprob});
  }
  std::stable_sort(alternatives.begin(), alternatives.end(),
                   [](const auto& a, const auto& b) { return a.logprob > b.logprob; });
  TokenRecord record;
  record.index = index;
  record.chosen_text = std::move(chosen_text);
  record.alternatives = std::move(alternatives);
  return record;
}

void validate(const TokenRecord& record) {
  const auto where = [&] { return "token " + std::to_string(record.index) + ": "; };
  if (record.alternatives.empty()) throw ValidationError(where() + "no alternatives");
  double mass = 0.0;
  for (std::size_t j = 0; j < record.alternatives.size(); ++j) {
    const double lp = record.alternatives[j].logprob;
    if (!std::isfinite(lp)) throw ValidationError(where() + "logprob is not finite");
    if (lp > 0.0) {
      throw ValidationError(where() + "logprob " + std::to_string(lp) + " is positive");
    }
    if (j > 0 && lp > record.alternatives[j - 1].logprob) {
      throw ValidationError(where() + "alternatives are not sorted by descending logprob");
    }
    mass += std::exp(lp);
  }
  if (mass > 1.0 + kMassTolerance) {
    throw ValidationError(where() + "alternative probabilities sum to " + std::to_string(mass) +
                          " > 1");
  }
}

void validate(const Transcript& transcript) {
  if (transcript.tokens.empty()) throw StructuralError("transcript has no tokens");
  for (std::size_t i = 0; i < transcript.tokens.size(); ++i) {
    const auto& record = transcript.tokens[i];
    if (record.index != i + 1) {
      throw StructuralError("token indices are not contiguous: expected " + std::to_string(i + 1) +
                            ", found " + std::to_string(record.index));
    }
    validate(record);
  }
}

std::string joined_token_text(const Transcript& transcript) {
  std::string out;
  for (const auto& t : transcript.tokens) out += t.chosen_text;
  return out;
}

void mark_special(Transcript& transcript, const SpecialTokenRule& rule) {
  for (auto& t : transcript.tokens) t.is_special = rule.matches(t.chosen_text);
}

Transcript read_transcript(std::istream& in) {
  Transcript transcript;
  bool seen_header = false;
  bool seen_token = false;
  std::optional<std::string> header_text;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("meta")) {
      if (seen_header) throw StructuralError("line " + std::to_string(line_no) + ": second header");
      if (seen_token) {
        throw StructuralError("line " + std::to_string(line_no) + ": header after token records");
      }
      const auto& meta = j.at("meta");
      if (!meta.is_object()) throw ParseError(line_no, "\"meta\" must be an object");
      for (const auto& [key, value] : meta.items()) {
        transcript.source_meta[key] = meta_value_to_string(value);
      }
      if (j.contains("text")) {
        if (!j.at("text").is_string()) throw ParseError(line_no, "\"text\" must be a string");
        header_text = j.at("text").get<std::string>();
      }
      seen_header = true;
      continue;
    }
    auto record = record_from_json(j, line_no);
    if (record.index != transcript.tokens.size() + 1) {
      throw StructuralError("line " + std::to_string(line_no) +
                            ": token indices are not contiguous: expected " +
                            std::to_string(transcript.tokens.size() + 1) + ", found " +
                            std::to_string(record.index));
    }
    try {
      validate(record);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    transcript.tokens.push_back(std::move(record));
    seen_token = true;
  }
  if (in.bad()) throw IoError("failed reading transcript stream");
  if (transcript.tokens.empty()) throw StructuralError("transcript has no tokens");
  transcript.text = header_text ? *header_text : joined_token_text(transcript);
  return transcript;
}

Transcript read_transcript_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transcript " + path);
  return read_transcript(in);
}

void write_transcript(const Transcript& transcript, std::ostream& out) {
  validate(transcript);
  // Bad UTF-8 makes dump() throw; surface it as a validation problem.
  try {
    ordered_json header;
    ordered_json meta = ordered_json::object();
    for (const auto& [key, value] : transcript.source_meta) {
      // The interchange schema types "k" as an integer.
      if (key == "k" && is_canonical_integer(value)) {
        meta[key] = std::stoll(value);
      } else {
        meta[key] = value;
      }
    }
    header["meta"] = std::move(meta);
    if (transcript.text != joined_token_text(transcript)) header["text"] = transcript.text;
    out << header.dump() << '\n';

    for (const auto& t : transcript.tokens) {
      ordered_json line;
      line["i"] = t.index;
      line["text"] = t.chosen_text;
      ordered_json alts = ordered_json::array();
      for (const auto& a : t.alternatives) alts.push_back(ordered_json::array({a.text, a.logprob}));
      line["alts"] = std::move(alts);
      if (t.is_special) line["special"] = true;
      out << line.dump() << '\n';
    }
  } catch (const nlohmann::json::type_error& e) {
    throw ValidationError(std::string("cannot serialize transcript: ") + e.what());
  }
  if (!out) throw IoError("failed writing transcript");
}

void write_transcript_file(const Transcript& transcript, const std::string& path) {
  std::ostringstream buffer;
  write_transcript(transcript, buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << buffer.str();
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace entroheat
