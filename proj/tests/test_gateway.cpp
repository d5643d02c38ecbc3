#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "craftplan/error.hpp"
#include "craftplan/llm_gateway.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"

using namespace craftplan;
using craftplan::testutil::scratch_dir;

namespace {

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  REQUIRE(out.good());
  out << body;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("request fingerprints separate roles and prompts") {
  std::string fp = request_fingerprint(Role::actor, "hello");
  CHECK(fp.size() == 16);
  CHECK(fp.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(fp != request_fingerprint(Role::critic, "hello"));
  CHECK(fp != request_fingerprint(Role::actor, "hello!"));
  CHECK(fp == request_fingerprint(Role::actor, "hello"));

  // hash input is role tag, unit separator, prompt
  uint64_t manual = fnv1a64(std::string("actor") + '\x1f' + "hello");
  char buf[17];
  snprintf(buf, sizeof buf, "%016lx", static_cast<unsigned long>(manual));
  CHECK(fp == buf);
  // the separator matters: "actorh" + "ello" must not collide by design
  CHECK(fp != request_fingerprint(Role::actor, std::string("h\x1f") + "ello"));
}

TEST_CASE("role names round trip") {
  for (Role r : {Role::actor, Role::critic, Role::refiner, Role::extractor})
    CHECK(role_from_string(role_to_string(r)) == r);
  CHECK_THROWS_AS(role_from_string("oracle"), SchemaError);
}

TEST_CASE("mock backend walks its rule table in order") {
  std::string dir = scratch_dir("mock");
  write_file(dir + "/canned.txt", "canned file reply");
  json script = {
      {"rules",
       json::array(
           {json{{"role", "critic"},
                 {"fingerprint", request_fingerprint(Role::critic, "ping")},
                 {"responses", json::array({"first", "second"})}},
            json{{"role", "any"}, {"user_contains", "ping"}, {"response", "fallback"}},
            json{{"role", "actor"}, {"response_file", "canned.txt"}}})}};
  write_file(dir + "/script.json", script.dump(2));

  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::mock;
  cfg.script_path = dir + "/script.json";
  auto backend = make_backend(cfg);

  ChatRequest req;
  req.role = Role::critic;
  req.user_prompt = "ping";
  CHECK(backend->complete(req) == "first");
  CHECK(backend->complete(req) == "second");
  // finite responses list consumed: falls through to the next matching rule
  CHECK(backend->complete(req) == "fallback");
  CHECK(backend->complete(req) == "fallback");

  req.role = Role::actor;
  CHECK(backend->complete(req) == "fallback");  // user_contains matches first
  req.user_prompt = "something else";
  CHECK(backend->complete(req) == "canned file reply");
  CHECK(backend->complete(req) == "canned file reply");  // repeats forever

  req.role = Role::refiner;
  CHECK_THROWS_AS(backend->complete(req), BackendError);
  CHECK_FALSE(backend->records_latency());
}

TEST_CASE("mock script schema is validated") {
  std::string dir = scratch_dir("mockbad");
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::mock;
  cfg.script_path = dir + "/script.json";

  write_file(cfg.script_path, R"({"rules": "nope"})");
  CHECK_THROWS_AS(make_backend(cfg), SchemaError);
  write_file(cfg.script_path, R"({"rules": [{"role": "poet", "response": "x"}]})");
  CHECK_THROWS_AS(make_backend(cfg), SchemaError);
  write_file(cfg.script_path, R"({"rules": [{"role": "actor"}]})");
  CHECK_THROWS_AS(make_backend(cfg), SchemaError);
  write_file(cfg.script_path, R"({"rules": [{"role": "actor", "responses": []}]})");
  CHECK_THROWS_AS(make_backend(cfg), SchemaError);
}

TEST_CASE("gateway records a transcript that the replay backend can serve") {
  std::string dir = scratch_dir("replay");
  json script = {{"rules", json::array({json{
                     {"role", "any"},
                     {"responses", json::array({"alpha", "beta", "gamma"})}}})}};
  write_file(dir + "/script.json", script.dump());

  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::mock;
  cfg.script_path = dir + "/script.json";

  std::string transcript = dir + "/transcript.jsonl";
  write_file(transcript, "stale junk that must be truncated\n");
  {
    LlmGateway gw(cfg, transcript);
    CHECK(read_file(transcript).empty());  // truncated at construction
    CHECK(gw.complete(Role::actor, "sys", "same prompt") == "alpha");
    CHECK(gw.complete(Role::actor, "sys", "same prompt") == "beta");
    CHECK(gw.complete(Role::critic, "sys", "same prompt") == "gamma");
    CHECK(gw.transcript().size() == 3);
    CHECK(gw.transcript()[0].fingerprint ==
          request_fingerprint(Role::actor, "same prompt"));
    CHECK(gw.transcript()[0].latency_ms == 0);  // mock takes no wall time
  }

  BackendConfig replay;
  replay.kind = BackendConfig::Kind::replay;
  replay.transcript_path = transcript;
  auto backend = make_backend(replay);

  ChatRequest req;
  req.role = Role::actor;
  req.user_prompt = "same prompt";
  CHECK(backend->complete(req) == "alpha");  // FIFO per fingerprint
  CHECK(backend->complete(req) == "beta");
  CHECK_THROWS_AS(backend->complete(req), BackendError);  // queue drained
  req.role = Role::critic;
  CHECK(backend->complete(req) == "gamma");
  req.user_prompt = "never recorded";
  CHECK_THROWS_AS(backend->complete(req), BackendError);
}

TEST_CASE("replay skips error records and rejects bad lines") {
  std::string dir = scratch_dir("replay2");
  TranscriptRecord ok;
  ok.role = Role::actor;
  ok.fingerprint = request_fingerprint(Role::actor, "q");
  ok.user_prompt = "q";
  ok.response = "good";
  TranscriptRecord failed = ok;
  failed.response.reset();
  failed.error = "boom";

  std::string path = dir + "/t.jsonl";
  write_file(path, failed.to_json().dump() + "\n" + ok.to_json().dump() + "\n");

  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::replay;
  cfg.transcript_path = path;
  auto backend = make_backend(cfg);
  ChatRequest req;
  req.role = Role::actor;
  req.user_prompt = "q";
  CHECK(backend->complete(req) == "good");
  CHECK_THROWS_AS(backend->complete(req), BackendError);

  write_file(path, "{not json\n");
  CHECK_THROWS_AS(make_backend(cfg), SchemaError);
}

TEST_CASE("gateway appends failed exchanges before rethrowing") {
  std::string dir = scratch_dir("gwfail");
  write_file(dir + "/script.json",
             R"({"rules": [{"role": "critic", "response": "yes"}]})");
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::mock;
  cfg.script_path = dir + "/script.json";
  LlmGateway gw(cfg, dir + "/t.jsonl");

  CHECK_THROWS_AS(gw.complete(Role::actor, "sys", "unmatched"), BackendError);
  REQUIRE(gw.transcript().size() == 1);
  CHECK(gw.transcript()[0].error.has_value());
  CHECK_FALSE(gw.transcript()[0].response.has_value());

  json line = json::parse(read_file(dir + "/t.jsonl"));
  CHECK(line.contains("error"));
  CHECK_FALSE(line.contains("response"));
}

TEST_CASE("backend config parsing") {
  CHECK_THROWS_AS(backend_config_from_json(json{{"backend", "carrier_pigeon"}}),
                  SchemaError);
  CHECK_THROWS_AS(backend_config_from_json(json{{"backend", "http"}}), SchemaError);
  CHECK_THROWS_AS(backend_config_from_json(json{{"backend", "mock"}}), SchemaError);
  CHECK_THROWS_AS(backend_config_from_json(json{{"backend", "replay"}}), SchemaError);
  CHECK_THROWS_AS(
      backend_config_from_json(json{{"backend", "mock"}, {"script", "s"}, {"timeout_s", 0}}),
      SchemaError);
  CHECK_THROWS_AS(backend_config_from_json(
                      json{{"backend", "mock"}, {"script", "s"}, {"max_retries", 0}}),
                  SchemaError);
  CHECK_THROWS_AS(
      backend_config_from_json(json{{"backend", "mock"},
                                    {"script", "s"},
                                    {"temperatures", json{{"poet", 0.3}}}}),
      SchemaError);

  BackendConfig cfg = backend_config_from_json(
      json{{"backend", "http"},
           {"endpoint", "http://localhost:1/v1/chat/completions"},
           {"model", "m"},
           {"max_retries", 2},
           {"temperatures", json{{"actor", 0.9}}}});
  CHECK(cfg.kind == BackendConfig::Kind::http);
  CHECK(cfg.max_retries == 2);
  CHECK(cfg.temperatures.at(Role::actor) == doctest::Approx(0.9));
  CHECK(cfg.temperatures.at(Role::critic) == doctest::Approx(0.1));  // default kept
}

namespace {

struct TestServer {
  httplib::Server srv;
  int port = 0;
  std::thread thread;

  explicit TestServer(httplib::Server::Handler handler) {
    srv.Post("/v1/chat/completions", std::move(handler));
    port = srv.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { srv.listen_after_bind(); });
    srv.wait_until_ready();
  }
  ~TestServer() {
    srv.stop();
    thread.join();
  }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

json chat_completion(const std::string& content) {
  return json{{"choices",
               json::array({json{{"message", json{{"content", content}}}}})}};
}

}  // namespace

TEST_CASE("http backend retries 5xx with backoff and then succeeds") {
  std::atomic<int> hits{0};
  json seen_body;
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    int n = ++hits;
    if (n <= 2) {
      res.status = 503;
      res.set_content("overloaded", "text/plain");
      return;
    }
    seen_body = json::parse(req.body);
    res.set_content(chat_completion("recovered").dump(), "application/json");
  });

  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http;
  cfg.endpoint = server.endpoint();
  cfg.max_retries = 3;
  cfg.model = "test-model";
  LlmGateway gw(cfg);
  CHECK(gw.complete(Role::actor, "be brief", "say hi") == "recovered");
  CHECK(hits.load() == 3);
  CHECK(seen_body["model"] == "test-model");
  CHECK(seen_body["messages"][0]["role"] == "system");
  CHECK(seen_body["messages"][0]["content"] == "be brief");
  CHECK(seen_body["messages"][1]["content"] == "say hi");
  CHECK(seen_body["temperature"] == doctest::Approx(0.6));  // actor default
  CHECK(gw.transcript().size() == 1);
  CHECK(gw.transcript()[0].response == "recovered");
}

TEST_CASE("http backend gives up after max_retries") {
  std::atomic<int> hits{0};
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http;
  cfg.endpoint = server.endpoint();
  cfg.max_retries = 2;
  auto backend = make_backend(cfg);
  ChatRequest req;
  CHECK_THROWS_WITH_AS(backend->complete(req),
                       doctest::Contains("retries exhausted"), BackendError);
  CHECK(hits.load() == 2);
}

TEST_CASE("http backend fails 4xx immediately, without retrying") {
  std::atomic<int> hits{0};
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 404;
    res.set_content("no such model", "text/plain");
  });
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http;
  cfg.endpoint = server.endpoint();
  cfg.max_retries = 5;
  auto backend = make_backend(cfg);
  ChatRequest req;
  CHECK_THROWS_WITH_AS(backend->complete(req), doctest::Contains("404"),
                       BackendError);
  CHECK(hits.load() == 1);
}

TEST_CASE("http backend sends the bearer token and demands the env var") {
  std::atomic<int> hits{0};
  std::string auth_header;
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    auth_header = req.get_header_value("Authorization");
    res.set_content(chat_completion("ok").dump(), "application/json");
  });

  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http;
  cfg.endpoint = server.endpoint();
  cfg.api_key_env = "CRAFTPLAN_TEST_KEY";

  ::unsetenv("CRAFTPLAN_TEST_KEY");
  auto backend = make_backend(cfg);
  ChatRequest req;
  CHECK_THROWS_AS(backend->complete(req), BackendError);
  CHECK(hits.load() == 0);  // never reached the wire

  ::setenv("CRAFTPLAN_TEST_KEY", "sk-test-123", 1);
  CHECK(backend->complete(req) == "ok");
  CHECK(auth_header == "Bearer sk-test-123");
  ::unsetenv("CRAFTPLAN_TEST_KEY");
}

TEST_CASE("http backend rejects malformed completion payloads") {
  TestServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": []})", "application/json");
  });
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http;
  cfg.endpoint = server.endpoint();
  auto backend = make_backend(cfg);
  ChatRequest req;
  CHECK_THROWS_WITH_AS(backend->complete(req), doctest::Contains("malformed"),
                       BackendError);
}
