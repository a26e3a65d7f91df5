#include "llcoach/chat.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <sstream>

#include "llcoach/error.hpp"
#include "llcoach/text.hpp"

namespace llcoach {

namespace {

std::atomic<bool> g_network_forbidden{false};

std::string rtrim(std::string_view s) {
  std::size_t end = s.size();
  while (end > 0 && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return std::string(s.substr(0, end));
}

constexpr std::string_view kFingerprintHeader = "FINGERPRINT:";
constexpr std::string_view kResponseHeader = "RESPONSE:";

std::string base64(std::string_view data) {
  static constexpr char kTable[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < data.size()) {
    const unsigned n = (static_cast<unsigned char>(data[i]) << 16) |
                       (static_cast<unsigned char>(data[i + 1]) << 8) |
                       static_cast<unsigned char>(data[i + 2]);
    out += kTable[(n >> 18) & 63];
    out += kTable[(n >> 12) & 63];
    out += kTable[(n >> 6) & 63];
    out += kTable[n & 63];
    i += 3;
  }
  if (i < data.size()) {
    unsigned n = static_cast<unsigned char>(data[i]) << 16;
    if (i + 1 < data.size()) n |= static_cast<unsigned char>(data[i + 1]) << 8;
    out += kTable[(n >> 18) & 63];
    out += kTable[(n >> 12) & 63];
    out += i + 1 < data.size() ? kTable[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string image_mime(std::string_view path) {
  const std::string lower = text::to_lower(path);
  if (lower.ends_with(".jpg") || lower.ends_with(".jpeg")) return "image/jpeg";
  if (lower.ends_with(".webp")) return "image/webp";
  return "image/png";
}

}  // namespace

std::string ChatRequest::canonical() const {
  // Length-prefixed sections so no field content can imitate a boundary.
  std::ostringstream out;
  out << "system " << system_text.size() << "\n" << system_text << "\n";
  out << "user " << user_text.size() << "\n" << user_text << "\n";
  if (image_ref) {
    out << "image " << image_ref->size() << "\n" << *image_ref << "\n";
  } else {
    out << "image -\n";
  }
  return out.str();
}

std::string ChatRequest::fingerprint() const { return text::sha256_hex(canonical()); }

// ---- transcript ------------------------------------------------------------

Transcript Transcript::parse(std::string_view input, std::string_view source) {
  const auto lines = text::split_lines(input);
  Transcript transcript;
  auto fail = [&](std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << source << ":" << line << ": " << what;
    throw Error(ErrorKind::ParseError, msg.str());
  };
  auto is_record_start = [&](std::size_t i) {
    return lines[i].starts_with(kFingerprintHeader);
  };

  std::size_t i = 0;
  while (i < lines.size()) {
    if (text::trim(lines[i]).empty()) {
      ++i;
      continue;
    }
    if (!is_record_start(i)) fail(i + 1, "expected 'FINGERPRINT: <hex>'");
    TranscriptEntry entry;
    entry.fingerprint = std::string(text::trim(std::string_view(lines[i]).substr(kFingerprintHeader.size())));
    if (entry.fingerprint.empty() ||
        entry.fingerprint.find_first_not_of("0123456789abcdef") != std::string::npos) {
      fail(i + 1, "fingerprint must be lower-case hex");
    }
    ++i;
    if (i >= lines.size() || text::trim(lines[i]) != kResponseHeader) fail(i + 1, "expected 'RESPONSE:'");
    ++i;
    std::string body;
    while (i < lines.size()) {
      // A blank line followed by FINGERPRINT: closes the record.
      if (text::trim(lines[i]).empty() && i + 1 < lines.size() && is_record_start(i + 1)) break;
      body += lines[i];
      body += "\n";
      ++i;
    }
    entry.response = rtrim(body);
    if (transcript.find(entry.fingerprint) != nullptr) {
      fail(i, "duplicate fingerprint " + entry.fingerprint);
    }
    transcript.entries_.push_back(std::move(entry));
  }
  return transcript;
}

std::string Transcript::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i > 0) out += "\n";
    out += std::string(kFingerprintHeader) + " " + entries_[i].fingerprint + "\n";
    out += std::string(kResponseHeader) + "\n";
    out += entries_[i].response + "\n";
  }
  return out;
}

const TranscriptEntry* Transcript::find(std::string_view fingerprint) const {
  for (const auto& e : entries_) {
    if (e.fingerprint == fingerprint) return &e;
  }
  return nullptr;
}

void Transcript::add(TranscriptEntry entry) {
  if (find(entry.fingerprint) != nullptr) {
    throw Error(ErrorKind::InvalidArgument, "duplicate fingerprint " + entry.fingerprint);
  }
  entry.response = rtrim(entry.response);
  entries_.push_back(std::move(entry));
}

// ---- providers -----------------------------------------------------------

ReplayProvider::ReplayProvider(Transcript transcript) : transcript_(std::move(transcript)) {}

ChatResponse ReplayProvider::complete(const ChatRequest& request) {
  const std::string fp = request.fingerprint();
  const TranscriptEntry* entry = transcript_.find(fp);
  if (entry == nullptr) {
    throw Error(ErrorKind::ReplayMiss, "no recorded response for request fingerprint " + fp);
  }
  consumed_[fp] = true;
  return {entry->response, id(), 0.0};
}

std::vector<std::string> ReplayProvider::unused() const {
  std::vector<std::string> out;
  for (const auto& e : transcript_.entries()) {
    if (!consumed_.contains(e.fingerprint)) out.push_back(e.fingerprint);
  }
  return out;
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

ScriptedProvider ScriptedProvider::parse(std::string_view input) {
  std::vector<std::string> responses;
  std::string current;
  for (const auto& line : text::split_lines(input)) {
    if (text::trim(line) == "---") {
      responses.push_back(std::string(text::trim(current)));
      current.clear();
    } else {
      current += line + "\n";
    }
  }
  if (!text::trim(current).empty()) responses.push_back(std::string(text::trim(current)));
  return ScriptedProvider(std::move(responses));
}

ChatResponse ScriptedProvider::complete(const ChatRequest&) {
  if (next_ >= responses_.size()) {
    throw Error(ErrorKind::ProviderError, "scripted provider ran out of responses");
  }
  return {responses_[next_++], id(), 0.0};
}

RecordingProvider::RecordingProvider(ChatProvider& inner) : inner_(inner) {}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
  ChatResponse response = inner_.complete(request);
  const std::string fp = request.fingerprint();
  if (transcript_.find(fp) == nullptr) transcript_.add({fp, response.text});
  return response;
}

NetworkGuard::NetworkGuard() : previous_(g_network_forbidden.exchange(true)) {}

NetworkGuard::~NetworkGuard() { g_network_forbidden.store(previous_); }

bool NetworkGuard::network_forbidden() { return g_network_forbidden.load(); }

// ---- OpenAI-compatible live provider ------------------------------------------

OpenAIChatProvider::OpenAIChatProvider(OpenAIConfig config) : config_(std::move(config)) {
  if (config_.max_attempts < 1) throw Error(ErrorKind::InvalidArgument, "max_attempts must be >= 1");
}

std::string OpenAIChatProvider::id() const { return "openai:" + config_.model; }

std::string OpenAIChatProvider::request_body(const ChatRequest& request) const {
  nlohmann::json messages = nlohmann::json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  if (request.image_ref) {
    const std::string image = text::read_file(*request.image_ref);
    const std::string url = "data:" + image_mime(*request.image_ref) + ";base64," + base64(image);
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", request.user_text}});
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
    messages.push_back({{"role", "user"}, {"content", content}});
  } else {
    messages.push_back({{"role", "user"}, {"content", request.user_text}});
  }
  nlohmann::json body = {
      {"model", request.image_ref ? config_.vision_model : config_.model},
      {"messages", messages},
      {"temperature", 0},
  };
  return body.dump();
}

ChatResponse OpenAIChatProvider::complete(const ChatRequest& request) {
  if (NetworkGuard::network_forbidden()) {
    throw Error(ErrorKind::NetworkForbidden, "live provider call attempted in replay mode");
  }
  if (request.user_text.empty()) throw Error(ErrorKind::InvalidArgument, "empty user prompt");
  const std::string body = request_body(request);

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  const httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    auto result = client.Post("/v1/chat/completions", headers, body, "application/json");
    const double latency =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status != 200) {
      last_error = "HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 200);
      continue;
    }
    try {
      const auto json = nlohmann::json::parse(result->body);
      std::string content = json.at("choices").at(0).at("message").at("content").get<std::string>();
      if (text::trim(content).empty()) {
        last_error = "empty completion";
        continue;
      }
      return {std::move(content), id(), latency};
    } catch (const nlohmann::json::exception& e) {
      last_error = std::string("malformed response: ") + e.what();
    }
  }
  throw Error(ErrorKind::ProviderError, last_error);
}

}  // namespace llcoach
