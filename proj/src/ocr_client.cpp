#include "entroheat/ocr_client.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "entroheat/codec.hpp"
#include "entroheat/entropy.hpp"
#include "entroheat/error.hpp"

namespace entroheat {

namespace detail {
extern const std::string_view kDefaultPromptsJson;
}

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

PromptSet prompts_from_json(const json& j, PromptSet base) {
  if (!j.is_object()) throw ParseError(0, "prompts file must hold a JSON object");
  const auto take = [&](const char* key, std::string& field) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_string()) throw ParseError(0, std::string("prompt \"") + key + "\" must be a string");
    field = j.at(key).get<std::string>();
  };
  take("transcribe_system", base.transcribe_system);
  take("transcribe_user", base.transcribe_user);
  take("reprompt_system", base.reprompt_system);
  take("reprompt_user", base.reprompt_user);
  return base;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError(0, "endpoint URL has no scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

std::string error_detail(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (!j.is_discarded() && j.is_object() && j.contains("error")) {
    const auto& e = j.at("error");
    if (e.is_object() && e.contains("message") && e.at("message").is_string()) {
      return e.at("message").get<std::string>();
    }
  }
  return body.size() > 200 ? body.substr(0, 200) + "..." : body;
}

std::string format_double(double v) { return json(v).dump(); }

}  // namespace

PromptSet default_prompts() {
  return prompts_from_json(json::parse(detail::kDefaultPromptsJson), PromptSet{});
}

PromptSet load_prompts(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prompts file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, "prompts file " + path.string() + ": " + e.what());
  }
  return prompts_from_json(j, default_prompts());
}

RequestConfig RequestConfig::with_default_prompts() {
  RequestConfig cfg;
  const PromptSet prompts = default_prompts();
  cfg.prompt_system = prompts.transcribe_system;
  cfg.prompt_user = prompts.transcribe_user;
  return cfg;
}

void validate(const RequestConfig& cfg) {
  if (cfg.k_max < 1 || cfg.k_max > kMaxTopLogprobs) {
    throw DomainError("k_max must lie in [1, " + std::to_string(kMaxTopLogprobs) + "], got " +
                      std::to_string(cfg.k_max));
  }
  if (cfg.k < 1 || cfg.k > cfg.k_max) {
    throw DomainError("k must lie in [1, " + std::to_string(cfg.k_max) + "], got " +
                      std::to_string(cfg.k));
  }
  if (cfg.model_id.empty()) throw DomainError("model id is empty");
  if (cfg.prompt_system.empty() || cfg.prompt_user.empty()) throw DomainError("prompts must be non-empty");
  if (cfg.max_tokens <= 0) throw DomainError("max_tokens must be positive");
  if (cfg.endpoint_url.empty()) throw DomainError("endpoint URL is empty");
  if (cfg.escalation_step < 1) throw DomainError("escalation step must be positive");
  if (cfg.max_escalations < 0) throw DomainError("max escalations must be non-negative");
}

HttpTransport::HttpTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResponse HttpTransport::post(const HttpRequest& request) {
  const SplitUrl url = split_url(request.url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(std::chrono::seconds(30));
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);
  auto result = client.Post(url.path, headers, request.body, "application/json");
  if (!result) {
    throw TransportError(0, "request to " + url.origin + " failed: " +
                                httplib::to_string(result.error()));
  }
  return {result->status, result->body};
}

ArchiveStore::ArchiveStore(fs::path directory) : directory_(std::move(directory)) {}

fs::path ArchiveStore::path_for(const std::string& request_hash) const {
  return directory_ / (request_hash + ".replay.json");
}

std::optional<ReplayArchive> ArchiveStore::load(const std::string& request_hash) const {
  const fs::path path = path_for(request_hash);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, "replay archive " + path.string() + ": " + e.what());
  }
  ReplayArchive archive;
  try {
    archive.request_hash = j.at("request_hash").get<std::string>();
    archive.raw_response = j.at("raw_response").get<std::string>();
    archive.captured_at = j.value("captured_at", "");
  } catch (const json::exception& e) {
    throw ParseError(0, "replay archive " + path.string() + ": " + e.what());
  }
  if (archive.request_hash != request_hash) {
    throw StructuralError("replay archive " + path.string() + " records hash " +
                          archive.request_hash);
  }
  return archive;
}

void ArchiveStore::save(const ReplayArchive& archive) const {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) throw IoError("cannot create archive directory " + directory_.string() + ": " + ec.message());

  ordered_json j;
  j["request_hash"] = archive.request_hash;
  j["captured_at"] = archive.captured_at;
  j["raw_response"] = archive.raw_response;

  const fs::path target = path_for(archive.request_hash);
  std::random_device rd;
  const fs::path temp = target.string() + ".tmp" + std::to_string(rd());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + temp.string());
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("failed writing " + temp.string());
  }
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp);
    throw IoError("cannot move archive into place at " + target.string() + ": " + ec.message());
  }
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

ChatClient::ChatClient(ArchiveStore store, ClientMode mode, std::shared_ptr<Transport> transport,
                       RetryPolicy retry, EnvLookup env)
    : store_(std::move(store)),
      mode_(mode),
      transport_(std::move(transport)),
      retry_(std::move(retry)),
      env_(std::move(env)) {
  if (!retry_.sleep) retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (retry_.attempts < 1) retry_.attempts = 1;
}

std::string ChatClient::request_hash(const ordered_json& body) { return sha256_hex(body.dump()); }

std::string ChatClient::complete(const ordered_json& body, const RequestConfig& cfg) {
  const std::string payload = body.dump();
  const std::string hash = sha256_hex(payload);

  if (mode_ == ClientMode::kReplay) {
    auto archive = store_.load(hash);
    if (!archive) {
      throw IoError("no replay archive for request " + hash + " in " +
                    store_.directory().string() + " (capture one with live mode)");
    }
    return archive->raw_response;
  }

  const auto credential = env_(cfg.auth_token_env);
  if (!credential || credential->empty()) {
    throw StartupError("credential environment variable " + cfg.auth_token_env + " is not set");
  }
  if (!transport_) throw StartupError("live mode requested without a transport");

  HttpRequest request{cfg.endpoint_url, payload, {{"Authorization", "Bearer " + *credential}}};
  auto delay = retry_.initial_delay;
  for (int attempt = 1;; ++attempt) {
    int status = 0;
    std::string detail;
    try {
      HttpResponse response = transport_->post(request);
      if (response.status >= 200 && response.status < 300) {
        store_.save({hash, response.body, utc_timestamp()});
        return response.body;
      }
      status = response.status;
      detail = error_detail(response.body);
    } catch (const TransportError& e) {
      status = e.status();
      detail = e.what();
    }
    if (!retryable(status) || attempt >= retry_.attempts) {
      throw TransportError(status, detail.empty() ? "endpoint request failed" : detail);
    }
    retry_.sleep(delay);
    delay *= 2;
  }
}

std::string mime_type_for(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "image/png";
}

ImageInput load_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw StartupError("image not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StartupError("cannot open image " + path.string());
  std::ostringstream bytes;
  bytes << in.rdbuf();
  ImageInput image{bytes.str(), mime_type_for(path), path.generic_string()};
  if (image.bytes.empty()) throw StartupError("image is empty: " + path.string());
  return image;
}

ordered_json build_transcription_body(const ImageInput& image, const RequestConfig& cfg) {
  validate(cfg);
  ordered_json body;
  body["model"] = cfg.model_id;
  ordered_json system;
  system["role"] = "system";
  system["content"] = cfg.prompt_system;
  ordered_json text_part;
  text_part["type"] = "text";
  text_part["text"] = cfg.prompt_user;
  ordered_json image_part;
  image_part["type"] = "image_url";
  image_part["image_url"]["url"] = "data:" + image.mime_type + ";base64," + base64_encode(image.bytes);
  ordered_json user;
  user["role"] = "user";
  user["content"] = ordered_json::array({text_part, image_part});
  body["messages"] = ordered_json::array({system, user});
  body["max_tokens"] = cfg.max_tokens;
  body["temperature"] = 0;
  body["logprobs"] = true;
  body["top_logprobs"] = cfg.k;
  return body;
}

Transcript parse_transcription_response(const std::string& raw_response,
                                        const SpecialTokenRule& rule) {
  const json j = json::parse(raw_response, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw TransportError(0, "endpoint response is not a JSON object");
  }
  if (!j.contains("choices") || !j.at("choices").is_array() || j.at("choices").empty()) {
    throw TransportError(0, "endpoint response has no choices");
  }
  const auto& choice = j.at("choices").at(0);
  const json* content = nullptr;
  if (choice.contains("logprobs") && choice.at("logprobs").is_object() &&
      choice.at("logprobs").contains("content") && choice.at("logprobs").at("content").is_array()) {
    content = &choice.at("logprobs").at("content");
  }
  if (content == nullptr || content->empty()) {
    throw CapabilityError(
        "the response carries no token logprobs; this model or request configuration does not "
        "expose them (a chat-completions endpoint with logprobs=true and top_logprobs=k is "
        "required)");
  }

  Transcript transcript;
  try {
    std::size_t index = 0;
    for (const auto& item : *content) {
      std::vector<TokenAlternative> alts;
      if (item.contains("top_logprobs") && item.at("top_logprobs").is_array()) {
        for (const auto& alt : item.at("top_logprobs")) {
          alts.push_back({alt.at("token").get<std::string>(), alt.at("logprob").get<double>()});
        }
      }
      auto record = make_record(++index, item.at("token").get<std::string>(), std::move(alts),
                                item.at("logprob").get<double>());
      transcript.tokens.push_back(std::move(record));
    }
  } catch (const json::exception& e) {
    throw TransportError(0, std::string("malformed logprobs entry: ") + e.what());
  }
  mark_special(transcript, rule);
  validate(transcript);

  const json* message = choice.contains("message") ? &choice.at("message") : nullptr;
  if (message && message->is_object() && message->contains("content") &&
      message->at("content").is_string()) {
    transcript.text = message->at("content").get<std::string>();
  } else {
    transcript.text = joined_token_text(transcript);
  }
  return transcript;
}

Transcript transcribe(const ImageInput& image, const RequestConfig& cfg, ChatClient& client,
                      const SpecialTokenRule& rule) {
  if (image.bytes.empty()) throw StartupError("image is empty: " + image.reference);
  const ordered_json body = build_transcription_body(image, cfg);
  const std::string raw = client.complete(body, cfg);
  Transcript transcript = parse_transcription_response(raw, rule);
  transcript.source_meta["model"] = cfg.model_id;
  transcript.source_meta["image"] = image.reference;
  transcript.source_meta["k"] = std::to_string(cfg.k);
  transcript.source_meta["max_tokens"] = std::to_string(cfg.max_tokens);
  transcript.source_meta["request_hash"] = ChatClient::request_hash(body);
  return transcript;
}

double max_tail_mass(const Transcript& transcript) {
  double worst = 0.0;
  for (const auto& record : transcript.tokens) {
    worst = std::max(worst, truncated_entropy(record).tail_mass);
  }
  return worst;
}

Transcript transcribe_adaptive(const ImageInput& image, const RequestConfig& cfg,
                               ChatClient& client, double tail_threshold,
                               const SpecialTokenRule& rule) {
  if (!(tail_threshold > 0.0 && tail_threshold < 1.0)) {
    throw DomainError("tail threshold must lie in (0, 1), got " + format_double(tail_threshold));
  }
  validate(cfg);
  RequestConfig current = cfg;
  Transcript transcript = transcribe(image, current, client, rule);
  int escalations = 0;
  double tail = max_tail_mass(transcript);
  while (tail > tail_threshold && escalations < cfg.max_escalations && current.k < cfg.k_max) {
    current.k = std::min(current.k + cfg.escalation_step, cfg.k_max);
    transcript = transcribe(image, current, client, rule);
    tail = max_tail_mass(transcript);
    ++escalations;
  }
  transcript.source_meta["adaptive_escalations"] = std::to_string(escalations);
  transcript.source_meta["adaptive_tail_threshold"] = format_double(tail_threshold);
  if (tail > tail_threshold) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "max tail mass %.4f still exceeds %.4f after %d escalation(s) at k=%d", tail,
                  tail_threshold, escalations, current.k);
    transcript.source_meta["adaptive_warning"] = buf;
  }
  return transcript;
}

}  // namespace entroheat
