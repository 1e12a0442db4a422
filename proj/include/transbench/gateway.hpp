#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "transbench/error.hpp"

namespace transbench::gateway {

/// Codes: AuthMissing, TransportFailure, FixtureMiss, TruncatedResponse, InvalidRequest.
class GatewayError : public Error {
 public:
  using Error::Error;
};

struct ChatRequest {
  std::string prompt_text;
  double temperature = 0.7;
  std::string model_id = "gpt-4";
  int max_output = 4096;

  /// Throws GatewayError("InvalidRequest") when an invariant is broken.
  void validate() const;
};

enum class Backend { Live, Replay, Scripted };
std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

struct ModelResponse {
  std::string raw_text;
  Backend backend = Backend::Scripted;
  std::string request_digest;
  /// Provider stopped because the token budget ran out.
  bool truncated = false;
};

/// Canonical serialization hashed by fixture_key: fixed field order, the
/// temperature printed with four decimals, the prompt byte-for-byte.
std::string canonical_request(const ChatRequest& request);

/// SHA-256 (hex) of canonical_request(request).
std::string fixture_key(const ChatRequest& request);

/// One line of the JSON-lines fixture log.
struct FixtureEntry {
  std::string digest;
  std::string model_id;
  double temperature = 0.7;
  std::string prompt_sha;
  std::string response_text;
};

/// Digest-keyed fixture store backed by a JSON-lines file. Lookups are
/// read-only after load; appends go through one mutex and skip digests that
/// are already present.
class FixtureLog {
 public:
  FixtureLog() = default;
  /// Loads `path` if it exists; appends are written back to it.
  explicit FixtureLog(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& digest) const;
  /// Returns false when the digest was already recorded.
  bool append(const ChatRequest& request, const std::string& digest, const std::string& response_text);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, FixtureEntry> entries_;
};

/// A source of completions.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual ModelResponse complete(const ChatRequest& request) = 0;
  virtual Backend kind() const = 0;
};

/// Answers from a fixed digest -> text table, or from a responder callback.
class ScriptedBackend : public ModelBackend {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  explicit ScriptedBackend(std::map<std::string, std::string> by_digest);
  explicit ScriptedBackend(Responder responder);

  ModelResponse complete(const ChatRequest& request) override;
  Backend kind() const override { return Backend::Scripted; }
  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, std::string> by_digest_;
  Responder responder_;
  std::atomic<std::size_t> calls_{0};
};

/// Answers only from a fixture log; a missing digest is FixtureMiss.
class ReplayBackend : public ModelBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<const FixtureLog> fixtures) : fixtures_(std::move(fixtures)) {}
  ModelResponse complete(const ChatRequest& request) override;
  Backend kind() const override { return Backend::Replay; }

 private:
  std::shared_ptr<const FixtureLog> fixtures_;
};

struct LiveOptions {
  std::string api_url;  // OpenAI-compatible chat completions endpoint
  std::string api_key;
  std::chrono::milliseconds deadline{120'000};

  /// Reads MODEL_API_KEY and MODEL_API_URL. Missing key -> AuthMissing.
  static LiveOptions from_env();
};

/// HTTP backend speaking the chat-completions wire format. Every transport
/// error surfaces as TransportFailure; retries are the Gateway's job.
class LiveBackend : public ModelBackend {
 public:
  explicit LiveBackend(LiveOptions options);
  ModelResponse complete(const ChatRequest& request) override;
  Backend kind() const override { return Backend::Live; }

  /// Request body sent for `request` (exposed for tests).
  static std::string request_body(const ChatRequest& request);
  /// Parses a chat-completions response body.
  static ModelResponse parse_response(std::string_view body);

 private:
  LiveOptions options_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
};

/// Entry point used by the pipeline. Wraps a backend with retries on
/// TransportFailure, optional recording into a fixture log, and call counters.
/// When recording, digests already in the log are answered from it without
/// touching the backend, which makes interrupted runs resumable.
class Gateway {
 public:
  Gateway(std::unique_ptr<ModelBackend> backend, RetryPolicy retry = {},
          std::shared_ptr<FixtureLog> recorder = nullptr);

  /// Throws GatewayError; TruncatedResponse when the provider cut the answer.
  ModelResponse complete(const ChatRequest& request);

  Backend kind() const { return backend_->kind(); }
  /// Calls that reached the backend (including retried attempts).
  std::size_t backend_calls() const { return backend_calls_.load(); }
  std::size_t fixture_hits() const { return fixture_hits_.load(); }

 private:
  std::unique_ptr<ModelBackend> backend_;
  RetryPolicy retry_;
  std::shared_ptr<FixtureLog> recorder_;
  std::atomic<std::size_t> backend_calls_{0};
  std::atomic<std::size_t> fixture_hits_{0};
};

}  // namespace transbench::gateway
