#include "craftplan/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <deque>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "craftplan/error.hpp"
#include "httplib.h"

namespace craftplan {

std::string role_to_string(Role r) {
  switch (r) {
    case Role::actor: return "actor";
    case Role::critic: return "critic";
    case Role::refiner: return "refiner";
    case Role::extractor: return "extractor";
  }
  return "?";
}

Role role_from_string(const std::string& s) {
  if (s == "actor") return Role::actor;
  if (s == "critic") return Role::critic;
  if (s == "refiner") return Role::refiner;
  if (s == "extractor") return Role::extractor;
  throw SchemaError("unknown role '" + s + "'");
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string request_fingerprint(Role role, const std::string& user_prompt) {
  std::string key = role_to_string(role);
  key.push_back('\x1f');
  key += user_prompt;
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(key);
  return os.str();
}

BackendConfig backend_config_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("llm: config must be an object");
  BackendConfig cfg;
  std::string kind = require_string(j, "backend", "llm");
  if (kind == "http")
    cfg.kind = BackendConfig::Kind::http;
  else if (kind == "mock")
    cfg.kind = BackendConfig::Kind::mock;
  else if (kind == "replay")
    cfg.kind = BackendConfig::Kind::replay;
  else
    throw SchemaError("llm: backend must be http, mock or replay");

  if (j.contains("endpoint")) cfg.endpoint = require_string(j, "endpoint", "llm");
  if (j.contains("api_key_env")) cfg.api_key_env = require_string(j, "api_key_env", "llm");
  if (j.contains("model")) cfg.model = require_string(j, "model", "llm");
  if (j.contains("script")) cfg.script_path = require_string(j, "script", "llm");
  if (j.contains("transcript"))
    cfg.transcript_path = require_string(j, "transcript", "llm");
  if (j.contains("timeout_s")) {
    if (!j["timeout_s"].is_number()) throw SchemaError("llm: timeout_s must be a number");
    cfg.timeout_s = j["timeout_s"].get<double>();
    if (cfg.timeout_s <= 0) throw SchemaError("llm: timeout_s must be positive");
  }
  if (j.contains("max_retries")) {
    if (!j["max_retries"].is_number_integer() || j["max_retries"].get<int>() < 1)
      throw SchemaError("llm: max_retries must be a positive integer");
    cfg.max_retries = j["max_retries"].get<int>();
  }
  if (j.contains("max_tokens")) {
    if (!j["max_tokens"].is_number_integer() || j["max_tokens"].get<int>() < 1)
      throw SchemaError("llm: max_tokens must be a positive integer");
    cfg.max_tokens = j["max_tokens"].get<int>();
  }
  if (j.contains("temperatures")) {
    const json& t = j["temperatures"];
    if (!t.is_object()) throw SchemaError("llm: temperatures must be an object");
    for (const auto& [key, value] : t.items()) {
      if (!value.is_number()) throw SchemaError("llm: temperature must be a number");
      cfg.temperatures[role_from_string(key)] = value.get<double>();
    }
  }
  if (cfg.kind == BackendConfig::Kind::http && cfg.endpoint.empty())
    throw SchemaError("llm: http backend needs an endpoint");
  if (cfg.kind == BackendConfig::Kind::mock && cfg.script_path.empty())
    throw SchemaError("llm: mock backend needs a script");
  if (cfg.kind == BackendConfig::Kind::replay && cfg.transcript_path.empty())
    throw SchemaError("llm: replay backend needs a transcript");
  return cfg;
}

json TranscriptRecord::to_json() const {
  json j;
  j["role"] = role_to_string(role);
  j["fingerprint"] = fingerprint;
  j["system_prompt"] = system_prompt;
  j["user_prompt"] = user_prompt;
  if (response) j["response"] = *response;
  if (error) j["error"] = *error;
  j["latency_ms"] = latency_ms;
  return j;
}

TranscriptRecord TranscriptRecord::from_json(const json& j) {
  TranscriptRecord rec;
  rec.role = role_from_string(require_string(j, "role", "transcript"));
  rec.fingerprint = require_string(j, "fingerprint", "transcript");
  rec.system_prompt = require_string(j, "system_prompt", "transcript");
  rec.user_prompt = require_string(j, "user_prompt", "transcript");
  if (j.contains("response")) rec.response = j["response"].get<std::string>();
  if (j.contains("error")) rec.error = j["error"].get<std::string>();
  if (j.contains("latency_ms")) rec.latency_ms = j["latency_ms"].get<long>();
  return rec;
}

namespace {

class MockBackend final : public Backend {
 public:
  explicit MockBackend(const std::string& script_path) {
    json doc = load_json_file(script_path);
    const json& arr = require_field(doc, "rules", "mock script");
    if (!arr.is_array()) throw SchemaError("mock script: 'rules' must be an array");
    std::filesystem::path base =
        std::filesystem::path(script_path).parent_path();
    for (const json& rj : arr) {
      Rule r;
      r.role = require_string(rj, "role", "mock rule");
      if (r.role != "any") role_from_string(r.role);  // validate spelling
      if (rj.contains("fingerprint"))
        r.fingerprint = require_string(rj, "fingerprint", "mock rule");
      if (rj.contains("user_contains"))
        r.user_contains = require_string(rj, "user_contains", "mock rule");
      if (rj.contains("response_file")) {
        r.responses.push_back(read_text_file(
            (base / require_string(rj, "response_file", "mock rule")).string()));
        r.repeat_last = true;
      } else if (rj.contains("responses")) {
        const json& rs = rj["responses"];
        if (!rs.is_array() || rs.empty())
          throw SchemaError("mock rule: 'responses' must be a non-empty array");
        for (const json& one : rs) r.responses.push_back(one.get<std::string>());
        r.repeat_last = false;
      } else {
        r.responses.push_back(require_string(rj, "response", "mock rule"));
        r.repeat_last = true;
      }
      rules_.push_back(std::move(r));
    }
  }

  std::string complete(const ChatRequest& req) override {
    std::string role = role_to_string(req.role);
    std::string fp = request_fingerprint(req.role, req.user_prompt);
    for (Rule& r : rules_) {
      if (r.role != "any" && r.role != role) continue;
      if (!r.fingerprint.empty() && r.fingerprint != fp) continue;
      if (!r.user_contains.empty() &&
          req.user_prompt.find(r.user_contains) == std::string::npos)
        continue;
      if (r.next >= r.responses.size()) {
        if (!r.repeat_last) continue;  // consumed; try later rules
        return r.responses.back();
      }
      return r.responses[r.next++];
    }
    throw BackendError("mock backend: no rule matches " + role +
                       " request (fingerprint " + fp + ")");
  }

 private:
  struct Rule {
    std::string role;
    std::string fingerprint;
    std::string user_contains;
    std::vector<std::string> responses;
    bool repeat_last = true;
    size_t next = 0;
  };
  std::vector<Rule> rules_;
};

class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(const std::string& transcript_path) {
    std::ifstream in(transcript_path);
    if (!in) throw SchemaError("cannot open " + transcript_path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw SchemaError("bad transcript line " + std::to_string(n) + ": " + e.what());
      }
      TranscriptRecord rec = TranscriptRecord::from_json(j);
      if (rec.response) queues_[rec.fingerprint].push_back(*rec.response);
    }
  }

  std::string complete(const ChatRequest& req) override {
    std::string fp = request_fingerprint(req.role, req.user_prompt);
    auto it = queues_.find(fp);
    if (it == queues_.end() || it->second.empty())
      throw BackendError("replay backend: no recorded response for " +
                         role_to_string(req.role) + " fingerprint " + fp);
    std::string out = it->second.front();
    it->second.pop_front();
    return out;
  }

 private:
  std::map<std::string, std::deque<std::string>> queues_;
};

class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(const BackendConfig& cfg) : cfg_(cfg) {}

  bool records_latency() const override { return true; }

  std::string complete(const ChatRequest& req) override {
    // split endpoint into host part and path
    std::string url = cfg_.endpoint;
    size_t scheme = url.find("://");
    if (scheme == std::string::npos)
      throw BackendError("http backend: endpoint must include a scheme");
    size_t path_start = url.find('/', scheme + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    json body = {
        {"model", req.model},
        {"messages",
         json::array({json{{"role", "system"}, {"content", req.system_prompt}},
                      json{{"role", "user"}, {"content", req.user_prompt}}})},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
    };

    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
      const char* key = std::getenv(cfg_.api_key_env.c_str());
      if (!key)
        throw BackendError("http backend: environment variable " +
                           cfg_.api_key_env + " is not set");
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt < cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        auto delay = std::chrono::milliseconds(250 * (1L << (attempt - 1)));
        std::this_thread::sleep_for(delay);
      }
      httplib::Client client(base);
      client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
      client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
      auto res = client.Post(path, headers, body.dump(), "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "server error: HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300)
        throw BackendError("http backend: HTTP " + std::to_string(res->status) +
                           ": " + res->body);
      try {
        json j = json::parse(res->body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw BackendError(std::string("http backend: malformed response: ") + e.what());
      }
    }
    throw BackendError("http backend: retries exhausted after " +
                       std::to_string(cfg_.max_retries) + " attempts (" +
                       last_error + ")");
  }

 private:
  BackendConfig cfg_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg) {
  switch (cfg.kind) {
    case BackendConfig::Kind::mock:
      return std::make_unique<MockBackend>(cfg.script_path);
    case BackendConfig::Kind::replay:
      return std::make_unique<ReplayBackend>(cfg.transcript_path);
    case BackendConfig::Kind::http:
      return std::make_unique<HttpBackend>(cfg);
  }
  throw SchemaError("unknown backend kind");
}

LlmGateway::LlmGateway(const BackendConfig& cfg, std::string transcript_path)
    : cfg_(cfg),
      backend_(make_backend(cfg)),
      transcript_path_(std::move(transcript_path)) {
  if (transcript_path_.empty() && !cfg.transcript_path.empty() &&
      cfg.kind != BackendConfig::Kind::replay)
    transcript_path_ = cfg.transcript_path;
  if (!transcript_path_.empty()) {
    std::ofstream out(transcript_path_, std::ios::trunc);
    if (!out) throw Error("cannot write transcript " + transcript_path_);
  }
}

std::string LlmGateway::complete(Role role, const std::string& system_prompt,
                                 const std::string& user_prompt) {
  ChatRequest req;
  req.role = role;
  req.system_prompt = system_prompt;
  req.user_prompt = user_prompt;
  req.model = cfg_.model;
  req.max_tokens = cfg_.max_tokens;
  auto it = cfg_.temperatures.find(role);
  req.temperature = it == cfg_.temperatures.end() ? 0.2 : it->second;

  TranscriptRecord rec;
  rec.role = role;
  rec.fingerprint = request_fingerprint(role, user_prompt);
  rec.system_prompt = system_prompt;
  rec.user_prompt = user_prompt;

  auto started = std::chrono::steady_clock::now();
  try {
    std::string response = backend_->complete(req);
    if (backend_->records_latency()) {
      auto elapsed = std::chrono::steady_clock::now() - started;
      rec.latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    }
    rec.response = response;
    append(rec);
    return response;
  } catch (const BackendError& e) {
    if (backend_->records_latency()) {
      auto elapsed = std::chrono::steady_clock::now() - started;
      rec.latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
    }
    rec.error = e.what();
    append(rec);
    throw;
  }
}

void LlmGateway::append(const TranscriptRecord& rec) {
  records_.push_back(rec);
  if (transcript_path_.empty()) return;
  std::ofstream out(transcript_path_, std::ios::app);
  if (!out) throw Error("cannot append transcript " + transcript_path_);
  out << rec.to_json().dump() << "\n";
}

}  // namespace craftplan
