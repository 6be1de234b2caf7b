#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace entroheat {

/// Tolerance on the total probability mass of a record's alternatives.
inline constexpr double kMassTolerance = 1e-6;

struct TokenAlternative {
  std::string text;
  double logprob = 0.0;  // natural log, as the endpoint returns it

  bool operator==(const TokenAlternative&) const = default;
};

/// One decoded position: the emitted token plus its top-k alternatives,
/// sorted by non-increasing logprob. Index is 1-based.
struct TokenRecord {
  std::size_t index = 0;
  std::string chosen_text;
  std::vector<TokenAlternative> alternatives;
  bool is_special = false;

  bool operator==(const TokenRecord&) const = default;
};

struct Transcript {
  std::vector<TokenRecord> tokens;
  std::string text;
  std::map<std::string, std::string> source_meta;

  std::size_t size() const noexcept { return tokens.size(); }
  bool operator==(const Transcript&) const = default;
};

/// Decides which token texts count as special (line breaks, code fences).
/// A text is special when it is non-empty, contains at least one pattern,
/// and nothing but patterns and blanks. With the defaults "\n\n" and "```\n"
/// are special, ".\n" is not.
class SpecialTokenRule {
 public:
  SpecialTokenRule();
  explicit SpecialTokenRule(std::vector<std::string> patterns);

  bool matches(std::string_view token_text) const;
  const std::vector<std::string>& patterns() const noexcept { return patterns_; }

 private:
  std::vector<std::string> patterns_;
};

/// Builds a record from endpoint data. Alternatives are stably sorted by
/// descending logprob. If `chosen_logprob` is given and the chosen text is
/// not among the alternatives, it is inserted as one more alternative.
TokenRecord make_record(std::size_t index, std::string chosen_text,
                        std::vector<TokenAlternative> alternatives,
                        std::optional<double> chosen_logprob = std::nullopt);

/// Throws ValidationError on a record that breaks a data-model invariant.
void validate(const TokenRecord& record);
/// Validates every record plus index contiguity and n >= 1.
void validate(const Transcript& transcript);

/// Concatenation of every chosen token text in order.
std::string joined_token_text(const Transcript& transcript);

/// Sets is_special on every record according to `rule`. Records are kept.
void mark_special(Transcript& transcript, const SpecialTokenRule& rule);

/// Reads the JSONL interchange format: an optional header line carrying
/// "meta", then one token object per line.
Transcript read_transcript(std::istream& in);
Transcript read_transcript_file(const std::string& path);

void write_transcript(const Transcript& transcript, std::ostream& out);
void write_transcript_file(const Transcript& transcript, const std::string& path);

}  // namespace entroheat
