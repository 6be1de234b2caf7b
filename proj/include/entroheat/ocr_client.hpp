#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "entroheat/token_stream.hpp"

namespace entroheat {

inline constexpr int kMaxTopLogprobs = 20;
inline constexpr double kDefaultTailThreshold = 0.1;

/// Prompts shipped in config/prompts.json, compiled into the library.
struct PromptSet {
  std::string transcribe_system;
  std::string transcribe_user;
  std::string reprompt_system;
  std::string reprompt_user;
};

PromptSet default_prompts();
/// Reads a prompts file; keys missing from it keep their default value.
PromptSet load_prompts(const std::filesystem::path& path);

struct RequestConfig {
  std::string model_id = "gpt-4o";
  int k = 5;
  std::string prompt_system;
  std::string prompt_user;
  int max_tokens = 4096;
  std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
  std::string auth_token_env = "OPENAI_API_KEY";

  // Adaptive escalation.
  int k_max = kMaxTopLogprobs;
  int escalation_step = 5;
  int max_escalations = 3;

  /// Defaults with the transcription prompts filled in.
  static RequestConfig with_default_prompts();
};

/// Throws DomainError on k outside [1, k_max], k_max above the endpoint
/// limit, empty prompts or non-positive max_tokens.
void validate(const RequestConfig& cfg);

struct HttpRequest {
  std::string url;
  std::string body;
  std::map<std::string, std::string> headers;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Network seam. The client only talks to the endpoint through this.
class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws TransportError(0, ...) when no response could be obtained.
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// Transport over cpp-httplib; https URLs use OpenSSL.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(300));
  HttpResponse post(const HttpRequest& request) override;

 private:
  std::chrono::seconds timeout_;
};

/// Stored raw endpoint response, keyed by the hash of the request body.
struct ReplayArchive {
  std::string request_hash;
  std::string raw_response;
  std::string captured_at;  // ISO-8601 UTC

  bool operator==(const ReplayArchive&) const = default;
};

/// Directory of `<hash>.replay.json` files.
class ArchiveStore {
 public:
  explicit ArchiveStore(std::filesystem::path directory);

  std::filesystem::path path_for(const std::string& request_hash) const;
  std::optional<ReplayArchive> load(const std::string& request_hash) const;
  /// Writes to a temporary file in the same directory, then renames.
  void save(const ReplayArchive& archive) const;
  const std::filesystem::path& directory() const noexcept { return directory_; }

 private:
  std::filesystem::path directory_;
};

enum class ClientMode {
  kReplay,  // archives only, never touches the network
  kLive,    // send, then archive
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_delay{500};
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_environment();

/// Sends chat-completion bodies, archiving every live response and serving
/// replays from the archive.
class ChatClient {
 public:
  ChatClient(ArchiveStore store, ClientMode mode, std::shared_ptr<Transport> transport = nullptr,
             RetryPolicy retry = {}, EnvLookup env = process_environment());

  /// Returns the raw response body. Replay: IoError when no archive matches.
  /// Live: StartupError without credential, TransportError on failure.
  std::string complete(const nlohmann::ordered_json& body, const RequestConfig& cfg);

  static std::string request_hash(const nlohmann::ordered_json& body);

  ClientMode mode() const noexcept { return mode_; }
  const ArchiveStore& store() const noexcept { return store_; }

 private:
  ArchiveStore store_;
  ClientMode mode_;
  std::shared_ptr<Transport> transport_;
  RetryPolicy retry_;
  EnvLookup env_;
};

struct ImageInput {
  std::string bytes;
  std::string mime_type;
  std::string reference;  // recorded in source_meta["image"]
};

/// Reads an image file. Throws StartupError when it is missing or empty.
ImageInput load_image(const std::filesystem::path& path);
std::string mime_type_for(const std::filesystem::path& path);

nlohmann::ordered_json build_transcription_body(const ImageInput& image,
                                                const RequestConfig& cfg);

/// Parses choices[0].logprobs.content[*]. Throws CapabilityError when the
/// response carries no token logprobs.
Transcript parse_transcription_response(const std::string& raw_response,
                                        const SpecialTokenRule& rule = SpecialTokenRule());

/// One transcription request. source_meta records model, k, image and the
/// request hash.
Transcript transcribe(const ImageInput& image, const RequestConfig& cfg, ChatClient& client,
                      const SpecialTokenRule& rule = SpecialTokenRule());

/// Repeats the whole request with k + escalation_step (capped at k_max)
/// while some token's tail mass exceeds the threshold, at most
/// max_escalations times. If the tail is still too heavy at the end,
/// source_meta["adaptive_warning"] is set.
/// Throws DomainError unless 0 < tail_threshold < 1.
Transcript transcribe_adaptive(const ImageInput& image, const RequestConfig& cfg,
                               ChatClient& client, double tail_threshold,
                               const SpecialTokenRule& rule = SpecialTokenRule());

/// Largest tail mass over all tokens.
double max_tail_mass(const Transcript& transcript);

}  // namespace entroheat
