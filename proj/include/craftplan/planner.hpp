#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "craftplan/entity_kb.hpp"
#include "craftplan/llm_gateway.hpp"
#include "craftplan/observation.hpp"
#include "craftplan/plan.hpp"
#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

// Everything the prompt templates can reference for one planning round.
struct PlanningContext {
  std::string text_obs;               // canonical observation text
  std::string entity_info;            // rendered KB lookups for visible names
  std::vector<SubgoalId> unachieved;  // sorted
  std::vector<SubgoalId> available;   // candidate pool shown to the LLM
  std::string graph_text;             // weighted verbalization
  const SubgoalGraph* graph = nullptr;
  const EntityKB* kb = nullptr;
  std::set<SubgoalId> achieved;  // episode achievements so far
};

PlanningContext build_context(const TextObservation& obs,
                              const SubgoalGraph& g, const EntityKB& kb,
                              const std::set<SubgoalId>& achieved);

// --- Prompt templates ---

// Loads role templates (system + user) from a directory of .txt files and
// substitutes {placeholder} slots. Unknown placeholders are an error that
// names the offender.
class PromptLibrary {
 public:
  static PromptLibrary from_directory(const std::string& dir);
  // In-memory construction for tests.
  static PromptLibrary from_map(std::map<std::string, std::string> files);

  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& values) const;
  bool has(const std::string& name) const { return files_.count(name) > 0; }

 private:
  std::map<std::string, std::string> files_;  // template name -> body
};

std::string render_template(const std::string& body,
                            const std::map<std::string, std::string>& values);

// --- Strict-format output parsing ---

struct CandidatePlan {
  std::string label;  // "PlanA" ...
  std::vector<SubgoalId> subgoals;
  std::string reason;
};

struct CriticFeedback {
  std::map<std::string, std::string> feedback;  // label -> text
  std::vector<std::string> ranking;             // best first
  bool need_modify = false;
};

struct RefinerOutput {
  std::string analysis;  // may be empty
  std::vector<SubgoalId> final_plan;
};

std::vector<CandidatePlan> parse_actor_output(const std::string& text);
CriticFeedback parse_critic_output(const std::string& text,
                                   const std::vector<std::string>& labels);
RefinerOutput parse_refiner_output(const std::string& text);

// --- Pipeline ---

struct StageAttempt {
  std::string fingerprint;
  std::string raw_response;
  bool parse_ok = false;
  std::string error;  // parse/validation error text when !parse_ok
};

struct StageTrace {
  Role role;
  std::vector<StageAttempt> attempts;
  bool succeeded = false;
};

struct PlanTrace {
  std::vector<StageTrace> stages;
  std::vector<CandidatePlan> candidates;
  std::optional<CriticFeedback> feedback;
  std::string fallback_reason;  // empty unless the ladder fired
  int llm_calls = 0;            // successful-parse calls (retries excluded)

  json to_json() const;
};

struct PlannerOptions {
  int retries = 2;  // re-asks per stage after the first attempt
};

struct PlanResult {
  FinalPlan plan;
  PlanTrace trace;
};

// Actor -> critic -> (refiner when need_modify). Parse failures re-ask the
// failing stage up to `retries` times; exhaustion or invalid final plans walk
// the fallback ladder (ranked candidates, then the frontier heuristic). The
// returned plan always holds 3 distinct ids from ctx.available.
PlanResult generate_plan(const PlanningContext& ctx, LlmGateway& gateway,
                         const PromptLibrary& prompts,
                         const PlannerOptions& opts = {});

// Deterministic plan from the graph alone: unachieved subgoals whose
// graph-level prerequisites are met, ordered by (depth, id), padded to 3.
std::vector<SubgoalId> frontier_plan(const PlanningContext& ctx);

// 3 distinct ids, all inside `available`.
bool plan_is_valid(const std::vector<SubgoalId>& plan,
                   const std::vector<SubgoalId>& available);

std::string render_candidates(const std::vector<CandidatePlan>& plans);
std::string render_feedback(const CriticFeedback& fb);

}  // namespace craftplan
