#include "transbench/gateway.hpp"

#include <cstdio>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "transbench/text.hpp"

namespace transbench::gateway {

using nlohmann::json;

void ChatRequest::validate() const {
  if (prompt_text.empty()) throw GatewayError("InvalidRequest", "prompt_text must be non-empty");
  if (!(temperature >= 0.0 && temperature <= 1.0))
    throw GatewayError("InvalidRequest", "temperature must lie in [0,1]");
  if (max_output <= 0) throw GatewayError("InvalidRequest", "max_output must be positive");
}

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Live: return "live";
    case Backend::Replay: return "replay";
    case Backend::Scripted: return "scripted";
  }
  return "?";
}

Backend backend_from_string(std::string_view s) {
  if (s == "live") return Backend::Live;
  if (s == "replay") return Backend::Replay;
  if (s == "scripted") return Backend::Scripted;
  throw ConfigError("unknown backend '" + std::string(s) + "' (expected live, replay or scripted)");
}

std::string canonical_request(const ChatRequest& request) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.4f", request.temperature);
  // nlohmann::json objects keep keys sorted, so field order is fixed
  json doc{{"max_output", request.max_output},
           {"model_id", request.model_id},
           {"prompt_text", request.prompt_text},
           {"temperature", temp}};
  return doc.dump();
}

std::string fixture_key(const ChatRequest& request) { return text::sha256_hex(canonical_request(request)); }

// ---------------------------------------------------------------------------

FixtureLog::FixtureLog(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  const std::string data = text::read_file(path_);
  std::size_t lineno = 0;
  for (auto line : text::split_lines(data)) {
    ++lineno;
    if (text::is_blank(line)) continue;
    try {
      json j = json::parse(line);
      FixtureEntry e{.digest = j.at("digest").get<std::string>(),
                     .model_id = j.value("model_id", std::string()),
                     .temperature = j.value("temperature", 0.7),
                     .prompt_sha = j.value("prompt_sha", std::string()),
                     .response_text = j.at("response_text").get<std::string>()};
      entries_.try_emplace(e.digest, std::move(e));
    } catch (const json::exception& ex) {
      throw GatewayError("MalformedFixture", path_.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
}

std::optional<std::string> FixtureLog::lookup(const std::string& digest) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(digest);
  if (it == entries_.end()) return std::nullopt;
  return it->second.response_text;
}

bool FixtureLog::append(const ChatRequest& request, const std::string& digest, const std::string& response_text) {
  std::lock_guard lock(mu_);
  if (entries_.count(digest)) return false;
  FixtureEntry e{.digest = digest,
                 .model_id = request.model_id,
                 .temperature = request.temperature,
                 .prompt_sha = text::sha256_hex(request.prompt_text),
                 .response_text = response_text};
  if (!path_.empty()) {
    json j{{"digest", e.digest},
           {"model_id", e.model_id},
           {"temperature", e.temperature},
           {"prompt_sha", e.prompt_sha},
           {"response_text", e.response_text}};
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to fixture log " + path_.string());
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw IoError("write failed for fixture log " + path_.string());
  }
  entries_.emplace(digest, std::move(e));
  return true;
}

std::size_t FixtureLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::map<std::string, std::string> by_digest) : by_digest_(std::move(by_digest)) {}

ScriptedBackend::ScriptedBackend(Responder responder) : responder_(std::move(responder)) {}

ModelResponse ScriptedBackend::complete(const ChatRequest& request) {
  ++calls_;
  const std::string digest = fixture_key(request);
  ModelResponse r{.backend = Backend::Scripted, .request_digest = digest};
  if (responder_) {
    r.raw_text = responder_(request);
    return r;
  }
  auto it = by_digest_.find(digest);
  if (it == by_digest_.end()) throw GatewayError("FixtureMiss", "no scripted response for digest " + digest);
  r.raw_text = it->second;
  return r;
}

ModelResponse ReplayBackend::complete(const ChatRequest& request) {
  const std::string digest = fixture_key(request);
  auto text = fixtures_ ? fixtures_->lookup(digest) : std::nullopt;
  if (!text) throw GatewayError("FixtureMiss", "no fixture for digest " + digest);
  return ModelResponse{.raw_text = std::move(*text), .backend = Backend::Replay, .request_digest = digest};
}

// ---------------------------------------------------------------------------

Gateway::Gateway(std::unique_ptr<ModelBackend> backend, RetryPolicy retry, std::shared_ptr<FixtureLog> recorder)
    : backend_(std::move(backend)), retry_(retry), recorder_(std::move(recorder)) {
  if (!backend_) throw ConfigError("gateway requires a backend");
  if (retry_.attempts < 1) retry_.attempts = 1;
}

ModelResponse Gateway::complete(const ChatRequest& request) {
  request.validate();
  const std::string digest = fixture_key(request);

  if (recorder_) {
    if (auto hit = recorder_->lookup(digest)) {
      ++fixture_hits_;
      return ModelResponse{.raw_text = std::move(*hit), .backend = Backend::Replay, .request_digest = digest};
    }
  }

  auto backoff = retry_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      ++backend_calls_;
      ModelResponse r = backend_->complete(request);
      r.request_digest = digest;
      if (r.truncated)
        throw GatewayError("TruncatedResponse", "model response truncated at the token budget (digest " + digest + ")");
      if (recorder_) recorder_->append(request, digest, r.raw_text);
      return r;
    } catch (const GatewayError& e) {
      if (e.code() != "TransportFailure" || attempt >= retry_.attempts) throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace transbench::gateway
