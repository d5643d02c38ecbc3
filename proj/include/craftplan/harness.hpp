#pragma once

#include <optional>
#include <string>
#include <vector>

#include "craftplan/agent.hpp"
#include "craftplan/entity_kb.hpp"
#include "craftplan/gridcraft.hpp"
#include "craftplan/json_util.hpp"
#include "craftplan/llm_gateway.hpp"
#include "craftplan/planner.hpp"
#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

struct RunConfig {
  uint64_t seed = 0;
  long max_steps = 5000;        // total primitive steps across episodes
  int planning_interval = 100;  // H
  double alpha = 0.2;           // tracker extra-reward coefficient
  std::string policy = "scripted";
  std::string graph_path;
  std::string kb_path;
  std::string prompt_dir;
  WorldConfig world;
  BackendConfig llm;
  TabularConfig tabular;
  std::string out_dir;  // empty: keep logs in memory only
  PlannerOptions planner;
};

RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::string& path);

// One JSONL record per event. `type` is "replan", "step", "episode" or
// "metrics"; no wall-clock fields, so equal-seed runs match byte for byte.
struct RunLog {
  std::vector<json> records;
  std::string to_jsonl() const;

  std::vector<json> of_type(const std::string& type) const;
};

struct RunResult {
  RunLog log;
  json metrics;  // the final metrics record
};

// Full control loop: replan on interval/episode start/plan completion, act,
// track, shape, adapt weights, log. Writes runlog.jsonl and the LLM
// transcript under out_dir when set.
RunResult run_experiment(const RunConfig& cfg);

// Geometric-mean score over per-achievement success rates in [0,100].
double score(const std::vector<double>& success_rates);

// Aggregate one or more run logs: per-achievement success rates over
// completed episodes, mean episode reward, score.
json summarize_runs(const std::vector<RunLog>& logs);
json summarize_files(const std::vector<std::string>& runlog_paths);
std::string render_summary_table(const json& summary);

}  // namespace craftplan
