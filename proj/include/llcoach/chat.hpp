#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llcoach {

struct ChatRequest {
  std::string system_text;
  std::string user_text;
  std::optional<std::string> image_ref;

  /// Byte-stable form the fingerprint is computed over.
  std::string canonical() const;
  /// Hex SHA-256 of canonical().
  std::string fingerprint() const;

  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct ChatResponse {
  std::string text;
  std::string provider_id;
  double latency = 0.0;  // seconds
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  virtual std::string id() const = 0;
  /// Blocking. Throws Error(ProviderError / ReplayMiss / NetworkForbidden).
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

struct TranscriptEntry {
  std::string fingerprint;
  std::string response;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

/// Recorded request fingerprint / response pairs.
///
/// File format: records separated by a blank line, each
///
///     FINGERPRINT: <hex>
///     RESPONSE:
///     <verbatim text, may contain blank lines>
///
/// A record ends where a blank line is followed by the next `FINGERPRINT:`
/// line (or at end of file). Trailing whitespace of a response is not kept.
class Transcript {
 public:
  Transcript() = default;

  static Transcript parse(std::string_view text, std::string_view source = "<transcript>");
  std::string serialize() const;

  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  const TranscriptEntry* find(std::string_view fingerprint) const;
  /// Throws InvalidArgument on a duplicate fingerprint.
  void add(TranscriptEntry entry);

  friend bool operator==(const Transcript&, const Transcript&) = default;

 private:
  std::vector<TranscriptEntry> entries_;
};

/// Answers strictly from a transcript; a request without a recorded
/// fingerprint is a ReplayMiss, never a live call.
class ReplayProvider final : public ChatProvider {
 public:
  explicit ReplayProvider(Transcript transcript);

  std::string id() const override { return "replay"; }
  ChatResponse complete(const ChatRequest& request) override;

  std::size_t consumed() const { return consumed_.size(); }
  /// Fingerprints never requested so far, in file order.
  std::vector<std::string> unused() const;

 private:
  Transcript transcript_;
  std::map<std::string, bool, std::less<>> consumed_;
};

/// Returns canned responses in order, regardless of the request. Used to
/// author transcripts offline (wrap it in a RecordingProvider).
class ScriptedProvider final : public ChatProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> responses);
  /// Responses separated by lines consisting of `---`.
  static ScriptedProvider parse(std::string_view text);

  std::string id() const override { return "scripted"; }
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

/// Forwards to another provider and records every exchange.
class RecordingProvider final : public ChatProvider {
 public:
  explicit RecordingProvider(ChatProvider& inner);

  std::string id() const override { return inner_.id(); }
  ChatResponse complete(const ChatRequest& request) override;

  const Transcript& transcript() const { return transcript_; }

 private:
  ChatProvider& inner_;
  Transcript transcript_;
};

/// Process-wide switch: while set, live providers refuse to open connections
/// (NetworkForbidden). Replay mode sets it for its whole lifetime.
class NetworkGuard {
 public:
  NetworkGuard();
  ~NetworkGuard();
  NetworkGuard(const NetworkGuard&) = delete;
  NetworkGuard& operator=(const NetworkGuard&) = delete;

  static bool network_forbidden();

 private:
  bool previous_;
};

struct OpenAIConfig {
  std::string base_url = "https://api.openai.com";
  std::string api_key;
  std::string model = "gpt-3.5-turbo-0125";
  std::string vision_model = "gpt-4-turbo";
  std::chrono::seconds timeout{60};
  int max_attempts = 2;  // one retry
};

/// Chat-completions client for OpenAI-compatible endpoints. Requests with an
/// image_ref go to `vision_model` with the image inlined as a data URL.
class OpenAIChatProvider final : public ChatProvider {
 public:
  explicit OpenAIChatProvider(OpenAIConfig config);

  std::string id() const override;
  ChatResponse complete(const ChatRequest& request) override;

  /// JSON body sent for `request` (exposed for tests).
  std::string request_body(const ChatRequest& request) const;

 private:
  OpenAIConfig config_;
};

/// Name of the environment variable holding the API key.
inline constexpr const char* kApiKeyEnv = "LLCOACH_API_KEY";

}  // namespace llcoach
