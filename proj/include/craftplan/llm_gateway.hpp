#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "craftplan/json_util.hpp"

namespace craftplan {

enum class Role { actor, critic, refiner, extractor };

std::string role_to_string(Role r);
Role role_from_string(const std::string& s);

struct ChatRequest {
  Role role = Role::actor;
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int max_tokens = 500;
  std::string model;
};

// Stable 64-bit FNV-1a over (role tag, 0x1f, user prompt), hex encoded.
// Keys mock rule tables and replay transcripts.
std::string request_fingerprint(Role role, const std::string& user_prompt);
uint64_t fnv1a64(const std::string& data);

struct BackendConfig {
  enum class Kind { http, mock, replay };
  Kind kind = Kind::mock;
  // http
  std::string endpoint;     // e.g. http://host:port/v1/chat/completions
  std::string api_key_env;  // env var holding the bearer token
  double timeout_s = 30.0;
  int max_retries = 3;      // attempts on transport/5xx failures
  // mock
  std::string script_path;  // rule table JSON
  // replay
  std::string transcript_path;  // previously recorded transcript JSONL
  // shared
  std::string model = "local";
  std::map<Role, double> temperatures = {{Role::actor, 0.6},
                                         {Role::critic, 0.1},
                                         {Role::refiner, 0.2},
                                         {Role::extractor, 0.2}};
  int max_tokens = 500;
};

BackendConfig backend_config_from_json(const json& j);

class Backend {
 public:
  virtual ~Backend() = default;
  // Returns the completion text or throws BackendError.
  virtual std::string complete(const ChatRequest& req) = 0;
  // True when completions take real wall time worth recording.
  virtual bool records_latency() const { return false; }
};

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg);

struct TranscriptRecord {
  Role role;
  std::string fingerprint;
  std::string system_prompt;
  std::string user_prompt;
  std::optional<std::string> response;  // empty on failure
  std::optional<std::string> error;
  long latency_ms = 0;

  json to_json() const;
  static TranscriptRecord from_json(const json& j);
};

// Owns a backend, fills per-role defaults, and appends every exchange
// (including failures) to an in-memory transcript, optionally mirrored to a
// JSONL file.
class LlmGateway {
 public:
  LlmGateway(const BackendConfig& cfg, std::string transcript_path = "");

  // Applies per-role temperature/max_tokens/model defaults when unset.
  std::string complete(Role role, const std::string& system_prompt,
                       const std::string& user_prompt);

  const std::vector<TranscriptRecord>& transcript() const { return records_; }
  const BackendConfig& config() const { return cfg_; }

 private:
  BackendConfig cfg_;
  std::unique_ptr<Backend> backend_;
  std::string transcript_path_;
  std::vector<TranscriptRecord> records_;

  void append(const TranscriptRecord& rec);
};

}  // namespace craftplan
