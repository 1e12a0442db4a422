#include "httplib.h"

#include <atomic>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>

#include "json.hpp"

#include "test_support.hpp"
#include "transbench/gateway.hpp"
#include "transbench/text.hpp"

namespace tb = transbench;
namespace gw = transbench::gateway;

namespace {

gw::ChatRequest req(std::string prompt = "translate this") {
  gw::ChatRequest r;
  r.prompt_text = std::move(prompt);
  return r;
}

/// Backend failing with TransportFailure a fixed number of times.
class FlakyBackend : public gw::ModelBackend {
 public:
  explicit FlakyBackend(int failures) : failures_(failures) {}
  gw::ModelResponse complete(const gw::ChatRequest&) override {
    if (calls_++ < failures_) throw gw::GatewayError("TransportFailure", "connection reset");
    return {.raw_text = "ok"};
  }
  gw::Backend kind() const override { return gw::Backend::Live; }

 private:
  int failures_;
  int calls_ = 0;
};

gw::RetryPolicy no_wait() { return {.attempts = 3, .initial_backoff = std::chrono::milliseconds(0)}; }

/// Minimal chat-completions endpoint on localhost.
class StubServer {
 public:
  std::atomic<int> calls{0};
  std::string finish_reason = "stop";
  int status = 200;

  StubServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& rq, httplib::Response& rs) {
      ++calls;
      last_auth_ = rq.get_header_value("Authorization");
      auto body = nlohmann::json::parse(rq.body);
      const std::string prompt = body["messages"][0]["content"];
      nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + prompt}}},
                                         {"finish_reason", finish_reason}}}}};
      rs.status = status;
      rs.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  std::string last_auth() const { return last_auth_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string last_auth_;
};

}  // namespace

TEST(Gateway, DigestIsDeterministicAndCoversEveryField) {
  auto a = req();
  EXPECT_EQ(gw::fixture_key(a), gw::fixture_key(req()));
  auto b = a;
  b.temperature = 0.2;
  EXPECT_NE(gw::fixture_key(a), gw::fixture_key(b));
  b = a;
  b.model_id = "other";
  EXPECT_NE(gw::fixture_key(a), gw::fixture_key(b));
  b = a;
  b.max_output = 17;
  EXPECT_NE(gw::fixture_key(a), gw::fixture_key(b));
}

TEST(Gateway, DigestDoesNotNormalizeWhitespace) {
  const auto a = gw::fixture_key(req("a b\nc"));
  const auto b = gw::fixture_key(req("a  b\nc"));
  const auto c = gw::fixture_key(req("a b\r\nc"));
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
}

TEST(Gateway, DigestMatchesIndependentHash) {
  // canonical form: sorted keys, temperature with four decimals
  auto r = req("hi");
  r.temperature = 0.7;
  r.model_id = "gpt-4";
  r.max_output = 4096;
  const std::string canonical = R"({"max_output":4096,"model_id":"gpt-4","prompt_text":"hi","temperature":"0.7000"})";
  EXPECT_EQ(gw::canonical_request(r), canonical);
  EXPECT_EQ(gw::fixture_key(r), tb::text::sha256_hex(canonical));
}

TEST(Gateway, ScriptedBackendAnswersByDigest) {
  auto r = req();
  auto d = gw::fixture_key(r);
  gw::Gateway g(std::make_unique<gw::ScriptedBackend>(std::map<std::string, std::string>{{d, "hello"}}));
  auto resp = g.complete(r);
  EXPECT_EQ(resp.raw_text, "hello");
  EXPECT_EQ(resp.request_digest, d);
  EXPECT_THROW(g.complete(req("other")), gw::GatewayError);
}

TEST(Gateway, ReplayWithEmptyLogIsFixtureMissWithDigest) {
  gw::Gateway g(std::make_unique<gw::ReplayBackend>(std::make_shared<gw::FixtureLog>()));
  auto r = req();
  try {
    g.complete(r);
    FAIL();
  } catch (const gw::GatewayError& e) {
    EXPECT_EQ(e.code(), "FixtureMiss");
    EXPECT_NE(std::string(e.what()).find(gw::fixture_key(r)), std::string::npos);
  }
}

TEST(Gateway, InvalidRequestsAreRejected) {
  gw::Gateway g(std::make_unique<gw::ScriptedBackend>(gw::ScriptedBackend::Responder([](auto&) { return "x"; })));
  EXPECT_THROW(g.complete(req("")), gw::GatewayError);
  auto hot = req();
  hot.temperature = 1.5;
  EXPECT_THROW(g.complete(hot), gw::GatewayError);
}

TEST(Gateway, RetriesTransportFailuresThenSucceeds) {
  gw::Gateway g(std::make_unique<FlakyBackend>(2), no_wait());
  EXPECT_EQ(g.complete(req()).raw_text, "ok");
  EXPECT_EQ(g.backend_calls(), 3u);
}

TEST(Gateway, GivesUpAfterBoundedRetries) {
  gw::Gateway g(std::make_unique<FlakyBackend>(10), no_wait());
  try {
    g.complete(req());
    FAIL();
  } catch (const gw::GatewayError& e) {
    EXPECT_EQ(e.code(), "TransportFailure");
  }
  EXPECT_EQ(g.backend_calls(), 3u);
}

TEST(Gateway, RecordingThenReplayReproducesResponses) {
  tb::Sandbox dir;
  const auto path = dir.path() / "fixtures.jsonl";
  int n = 0;
  {
    auto log = std::make_shared<gw::FixtureLog>(path);
    gw::Gateway g(std::make_unique<gw::ScriptedBackend>(
                      gw::ScriptedBackend::Responder([&](const gw::ChatRequest& r) { return r.prompt_text + "!" + std::to_string(n++); })),
                  {}, log);
    EXPECT_EQ(g.complete(req("a")).raw_text, "a!0");
    EXPECT_EQ(g.complete(req("b")).raw_text, "b!1");
    // recorded digests are served from the log, not the backend
    EXPECT_EQ(g.complete(req("a")).raw_text, "a!0");
    EXPECT_EQ(g.backend_calls(), 2u);
    EXPECT_EQ(log->size(), 2u);
  }
  auto replay_log = std::make_shared<gw::FixtureLog>(path);
  gw::Gateway replay(std::make_unique<gw::ReplayBackend>(replay_log));
  EXPECT_EQ(replay.complete(req("b")).raw_text, "b!1");
  EXPECT_EQ(replay.complete(req("a")).raw_text, "a!0");
  EXPECT_EQ(tb::text::split_lines(tb::text::read_file(path)).size(), 2u);
}

TEST(Gateway, ConcurrentAppendsKeepOneLinePerDigest) {
  tb::Sandbox dir;
  const auto path = dir.path() / "fixtures.jsonl";
  auto log = std::make_shared<gw::FixtureLog>(path);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) {
        auto r = req("p" + std::to_string(i % 25));
        log->append(r, gw::fixture_key(r), "resp" + std::to_string(t));
      }
    });
  threads.clear();
  EXPECT_EQ(log->size(), 25u);
  EXPECT_EQ(gw::FixtureLog(path).size(), 25u);
  EXPECT_EQ(tb::text::split_lines(tb::text::read_file(path)).size(), 25u);
}

TEST(Gateway, MalformedFixtureFileIsReported) {
  tb::Sandbox dir;
  tb::text::write_file(dir.path() / "f.jsonl", "{\"digest\": \"x\"}\n");
  try {
    gw::FixtureLog log(dir.path() / "f.jsonl");
    FAIL();
  } catch (const gw::GatewayError& e) {
    EXPECT_EQ(e.code(), "MalformedFixture");
  }
}

TEST(LiveBackend, RequiresApiKeyFromEnvironment) {
  const char* saved = std::getenv("MODEL_API_KEY");
  std::string keep = saved ? saved : "";
  ::unsetenv("MODEL_API_KEY");
  try {
    gw::LiveOptions::from_env();
    FAIL();
  } catch (const gw::GatewayError& e) {
    EXPECT_EQ(e.code(), "AuthMissing");
  }
  if (saved) ::setenv("MODEL_API_KEY", keep.c_str(), 1);
}

TEST(LiveBackend, WireFormat) {
  auto r = req("hello");
  auto body = nlohmann::json::parse(gw::LiveBackend::request_body(r));
  EXPECT_EQ(body["model"], "gpt-4");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  EXPECT_EQ(body["messages"][0]["content"], "hello");
  auto resp = gw::LiveBackend::parse_response(
      R"({"choices":[{"message":{"role":"assistant","content":"x"},"finish_reason":"length"}]})");
  EXPECT_EQ(resp.raw_text, "x");
  EXPECT_TRUE(resp.truncated);
  EXPECT_THROW(gw::LiveBackend::parse_response("{}"), gw::GatewayError);
}

TEST(LiveBackend, TalksToChatCompletionsEndpoint) {
  StubServer server;
  gw::LiveOptions o{.api_url = server.url(), .api_key = "k-123", .deadline = std::chrono::seconds(10)};
  gw::Gateway g(std::make_unique<gw::LiveBackend>(o));
  EXPECT_EQ(g.complete(req("ping")).raw_text, "echo: ping");
  EXPECT_EQ(server.last_auth(), "Bearer k-123");

  server.finish_reason = "length";
  try {
    g.complete(req("long"));
    FAIL();
  } catch (const gw::GatewayError& e) {
    EXPECT_EQ(e.code(), "TruncatedResponse");
  }
  server.finish_reason = "stop";
  server.status = 401;
  try {
    g.complete(req("again"));
    FAIL();
  } catch (const gw::GatewayError& e) {
    EXPECT_EQ(e.code(), "AuthMissing");
  }
}

TEST(LiveBackend, UnreachableEndpointIsTransportFailure) {
  gw::LiveOptions o{.api_url = "http://127.0.0.1:9/v1/chat/completions", .api_key = "k",
                    .deadline = std::chrono::seconds(2)};
  gw::Gateway g(std::make_unique<gw::LiveBackend>(o), no_wait());
  try {
    g.complete(req());
    FAIL();
  } catch (const gw::GatewayError& e) {
    EXPECT_EQ(e.code(), "TransportFailure");
  }
  EXPECT_EQ(g.backend_calls(), 3u);
}

TEST(LiveBackend, ResumedRecordingMakesNoLiveCalls) {
  StubServer server;
  tb::Sandbox dir;
  const auto path = dir.path() / "rec.jsonl";
  gw::LiveOptions o{.api_url = server.url(), .api_key = "k", .deadline = std::chrono::seconds(10)};
  const std::vector<std::string> prompts{"one", "two", "three"};
  {
    gw::Gateway g(std::make_unique<gw::LiveBackend>(o), {}, std::make_shared<gw::FixtureLog>(path));
    for (const auto& p : prompts) g.complete(req(p));
  }
  EXPECT_EQ(server.calls.load(), 3);
  gw::Gateway again(std::make_unique<gw::LiveBackend>(o), {}, std::make_shared<gw::FixtureLog>(path));
  for (const auto& p : prompts) EXPECT_EQ(again.complete(req(p)).raw_text, "echo: " + p);
  EXPECT_EQ(server.calls.load(), 3);
  EXPECT_EQ(again.backend_calls(), 0u);
  EXPECT_EQ(again.fixture_hits(), 3u);
}
