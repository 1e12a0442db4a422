#include "httplib.h"

#include <cstdlib>
#include <regex>

#include "json.hpp"

#include "transbench/gateway.hpp"

namespace transbench::gateway {

using nlohmann::json;

namespace {

constexpr const char* kDefaultUrl = "https://api.openai.com/v1/chat/completions";

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw ConfigError("MODEL_API_URL is not an http(s) URL: " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

LiveOptions LiveOptions::from_env() {
  LiveOptions o;
  const char* key = std::getenv("MODEL_API_KEY");
  if (key == nullptr || *key == '\0') throw GatewayError("AuthMissing", "MODEL_API_KEY is not set");
  o.api_key = key;
  const char* url = std::getenv("MODEL_API_URL");
  o.api_url = (url && *url) ? url : kDefaultUrl;
  return o;
}

LiveBackend::LiveBackend(LiveOptions options) : options_(std::move(options)) {
  if (options_.api_key.empty()) throw GatewayError("AuthMissing", "live backend requires an API key");
  if (options_.api_url.empty()) options_.api_url = kDefaultUrl;
  split_url(options_.api_url);
}

std::string LiveBackend::request_body(const ChatRequest& request) {
  json body{{"model", request.model_id},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output},
            {"messages", json::array({{{"role", "user"}, {"content", request.prompt_text}}})}};
  return body.dump();
}

ModelResponse LiveBackend::parse_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw GatewayError("TransportFailure", std::string("unparseable response body: ") + e.what());
  }
  try {
    const json& choice = doc.at("choices").at(0);
    ModelResponse r;
    r.backend = Backend::Live;
    r.raw_text = choice.at("message").at("content").get<std::string>();
    r.truncated = choice.value("finish_reason", std::string()) == "length";
    return r;
  } catch (const json::exception& e) {
    throw GatewayError("TransportFailure", std::string("unexpected response shape: ") + e.what());
  }
}

ModelResponse LiveBackend::complete(const ChatRequest& request) {
  const Endpoint ep = split_url(options_.api_url);
  httplib::Client client(ep.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.deadline).count();
  client.set_connection_timeout(std::min<long>(secs, 30), 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  client.set_bearer_token_auth(options_.api_key);

  auto res = client.Post(ep.path, request_body(request), "application/json");
  if (!res) throw GatewayError("TransportFailure", "HTTP request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403)
    throw GatewayError("AuthMissing", "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
  if (res->status == 429 || res->status >= 500)
    throw GatewayError("TransportFailure", "HTTP " + std::to_string(res->status));
  if (res->status != 200)
    throw GatewayError("InvalidRequest", "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512));
  return parse_response(res->body);
}

}  // namespace transbench::gateway
