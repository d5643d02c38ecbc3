#include "craftplan/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "craftplan/error.hpp"
#include "craftplan/rng.hpp"
#include "craftplan/tracker.hpp"

namespace craftplan {

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("run config must be an object");
  RunConfig cfg;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw SchemaError("run config: seed must be a non-negative integer");
    cfg.seed = j["seed"].get<uint64_t>();
  }
  auto get_long = [&](const char* key, long& dest, long min) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer() || j[key].get<long>() < min)
      throw SchemaError(std::string("run config: bad ") + key);
    dest = j[key].get<long>();
  };
  get_long("max_steps", cfg.max_steps, 1);
  long h = cfg.planning_interval;
  get_long("planning_interval", h, 1);
  cfg.planning_interval = static_cast<int>(h);
  if (j.contains("alpha")) {
    if (!j["alpha"].is_number() || j["alpha"].get<double>() < 0)
      throw SchemaError("run config: alpha must be a non-negative number");
    cfg.alpha = j["alpha"].get<double>();
  }
  if (j.contains("policy")) cfg.policy = require_string(j, "policy", "run config");
  cfg.graph_path = require_string(j, "graph", "run config");
  cfg.kb_path = require_string(j, "kb", "run config");
  cfg.prompt_dir = require_string(j, "prompts", "run config");
  if (j.contains("out")) cfg.out_dir = require_string(j, "out", "run config");

  cfg.llm = backend_config_from_json(require_field(j, "llm", "run config"));
  if (j.contains("world")) {
    if (j["world"].is_string())
      cfg.world = world_config_from_json(load_json_file(j["world"].get<std::string>()));
    else
      cfg.world = world_config_from_json(j["world"]);
  }
  if (j.contains("tabular")) {
    const json& t = j["tabular"];
    auto get_d = [&](const char* key, double& dest) {
      if (t.contains(key)) dest = t.at(key).get<double>();
    };
    auto get_i = [&](const char* key, int& dest) {
      if (t.contains(key)) dest = t.at(key).get<int>();
    };
    get_d("lr", cfg.tabular.lr);
    get_d("gamma", cfg.tabular.gamma);
    get_d("eps_start", cfg.tabular.eps_start);
    get_d("eps_end", cfg.tabular.eps_end);
    get_i("eps_decay_steps", cfg.tabular.eps_decay_steps);
    get_i("macro_budget", cfg.tabular.macro_budget);
  }
  if (j.contains("retries")) {
    if (!j["retries"].is_number_integer() || j["retries"].get<int>() < 0)
      throw SchemaError("run config: retries must be >= 0");
    cfg.planner.retries = j["retries"].get<int>();
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  json j = load_json_file(path);
  // relative fixture paths resolve against the config file's directory
  namespace fs = std::filesystem;
  fs::path base = fs::path(path).parent_path();
  auto rebase = [&](json& field) {
    if (field.is_string() && fs::path(field.get<std::string>()).is_relative())
      field = (base / field.get<std::string>()).string();
  };
  if (j.is_object()) {
    for (const char* key : {"graph", "kb", "prompts", "world"})
      if (j.contains(key)) rebase(j[key]);
    if (j.contains("llm") && j["llm"].is_object()) {
      for (const char* key : {"script", "transcript"})
        if (j["llm"].contains(key)) rebase(j["llm"][key]);
    }
  }
  return run_config_from_json(j);
}

std::string RunLog::to_jsonl() const {
  std::string out;
  for (const json& r : records) out += r.dump() + "\n";
  return out;
}

std::vector<json> RunLog::of_type(const std::string& type) const {
  std::vector<json> out;
  for (const json& r : records)
    if (r.value("type", "") == type) out.push_back(r);
  return out;
}

double score(const std::vector<double>& success_rates) {
  if (success_rates.empty())
    throw PreconditionError("score: empty success-rate vector");
  long double acc = 0.0L;
  for (double s : success_rates) {
    if (!(s >= 0.0 && s <= 100.0))
      throw PreconditionError("score: success rates must lie in [0,100]");
    acc += std::log1p(static_cast<long double>(s));
  }
  long double mean = acc / static_cast<long double>(success_rates.size());
  return static_cast<double>(std::expm1(mean));
}

RunResult run_experiment(const RunConfig& cfg) {
  SubgoalGraph graph = load_graph(cfg.graph_path);
  EntityKB kb = load_kb(cfg.kb_path);
  {
    ValidationReport rep = validate_graph(graph);
    ValidationReport krep = validate_kb(kb, graph);
    rep.findings.insert(rep.findings.end(), krep.findings.begin(),
                        krep.findings.end());
    if (!rep.ok())
      throw PreconditionError("run: fixtures failed validation: " +
                              rep.findings.front().message);
  }
  PromptLibrary prompts = PromptLibrary::from_directory(cfg.prompt_dir);

  std::string transcript_path;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    transcript_path =
        (std::filesystem::path(cfg.out_dir) / "transcript.jsonl").string();
  }
  LlmGateway gateway(cfg.llm, transcript_path);

  GridCraft env(cfg.world);
  std::unique_ptr<Policy> policy =
      make_policy(cfg.policy, derive_seed(cfg.seed, 1), cfg.tabular);
  TrackerState tracker;
  tracker.alpha = cfg.alpha;

  RunResult res;
  int episode = 0;
  long plan_seq = 0;
  TextObservation obs = env.reset(cfg.seed);
  policy->begin_episode();
  double ep_env_reward = 0.0, ep_extra = 0.0;
  long ep_len = 0;

  auto achieved_set = [&]() {
    std::set<SubgoalId> done;
    for (const auto& [name, flag] : env.achievements())
      if (flag) done.insert(name);
    return done;
  };

  auto flush_episode = [&](bool partial) {
    json rec;
    rec["type"] = "episode";
    rec["episode"] = episode;
    rec["length"] = ep_len;
    rec["env_reward"] = ep_env_reward;
    rec["extra_reward"] = ep_extra;
    rec["partial"] = partial;
    rec["achievements"] = env.achievements();
    res.log.records.push_back(rec);
  };

  for (long t = 0; t < cfg.max_steps; ++t) {
    std::string reason;
    if (t % cfg.planning_interval == 0)
      reason = "interval";
    else if (!tracker.active_plan)
      reason = "episode_start";
    else if (tracker_all_achieved(tracker))
      reason = "plan_complete";

    if (!reason.empty()) {
      std::set<SubgoalId> achieved = achieved_set();
      PlanningContext ctx = build_context(obs, graph, kb, achieved);
      PlanResult pres = generate_plan(ctx, gateway, prompts, cfg.planner);
      tracker_new_plan(tracker, graph, pres.plan, achieved);
      plan_seq += 1;
      json rec;
      rec["type"] = "replan";
      rec["step"] = t;
      rec["episode"] = episode;
      rec["plan_seq"] = plan_seq;
      rec["reason"] = reason;
      rec["plan"] = pres.plan.subgoals;
      rec["provenance"] = provenance_to_string(pres.plan.provenance);
      rec["llm_calls"] = pres.trace.llm_calls;
      if (!pres.trace.fallback_reason.empty())
        rec["fallback_reason"] = pres.trace.fallback_reason;
      res.log.records.push_back(rec);
    }

    PolicyContext pctx{env, tracker.active_plan->subgoals,
                       tracker.first_achieved, &graph};
    Action action = policy->act(pctx);
    StepOutcome out = env.step(action);
    TrackerStepResult tr = tracker_step(tracker, graph, obs, out.obs);
    policy->observe(out.reward + tr.extra_reward, out.done);

    json rec;
    rec["type"] = "step";
    rec["step"] = t;
    rec["episode"] = episode;
    rec["action"] = action_name(action);
    rec["env_reward"] = out.reward;
    rec["extra_reward"] = tr.extra_reward;
    if (!tr.first_achieved.empty()) rec["achieved"] = tr.first_achieved;
    if (!out.unlocked.empty()) rec["unlocked"] = out.unlocked;
    rec["done"] = out.done;
    res.log.records.push_back(rec);

    ep_env_reward += out.reward;
    ep_extra += tr.extra_reward;
    ep_len += 1;
    obs = out.obs;

    if (out.done) {
      flush_episode(false);
      episode += 1;
      ep_env_reward = ep_extra = 0.0;
      ep_len = 0;
      tracker_reset_episode(tracker);
      policy->begin_episode();
      obs = env.reset(cfg.seed + static_cast<uint64_t>(episode));
    }
  }
  if (ep_len > 0) flush_episode(true);

  // final metrics over completed episodes
  {
    std::vector<json> episodes = res.log.of_type("episode");
    std::map<std::string, int> hits;
    int completed = 0;
    double reward_sum = 0.0;
    for (const json& e : episodes) {
      if (e.value("partial", false)) continue;
      completed += 1;
      reward_sum += e["env_reward"].get<double>();
      for (const auto& [name, flag] : e["achievements"].items())
        if (flag.get<bool>()) hits[name] += 1;
    }
    json rates;
    std::vector<double> rate_vec;
    for (const auto& name : GridCraft::achievement_names()) {
      double pct = completed == 0
                       ? 0.0
                       : 100.0 * static_cast<double>(hits[name]) / completed;
      rates[name] = pct;
      rate_vec.push_back(pct);
    }
    json metrics;
    metrics["type"] = "metrics";
    metrics["episodes"] = completed;
    metrics["total_steps"] = cfg.max_steps;
    metrics["replans"] = plan_seq;
    metrics["success_rates"] = rates;
    metrics["score"] = score(rate_vec);
    metrics["mean_env_reward"] =
        completed == 0 ? 0.0 : reward_sum / completed;
    res.log.records.push_back(metrics);
    res.metrics = metrics;
  }

  if (!cfg.out_dir.empty()) {
    namespace fs = std::filesystem;
    write_text_file((fs::path(cfg.out_dir) / "runlog.jsonl").string(),
                    res.log.to_jsonl());
    write_json_file((fs::path(cfg.out_dir) / "metrics.json").string(),
                    res.metrics);
  }
  return res;
}

json summarize_runs(const std::vector<RunLog>& logs) {
  std::map<std::string, int> hits;
  int completed = 0;
  double reward_sum = 0.0;
  std::set<std::string> names;
  for (const RunLog& log : logs) {
    for (const json& e : log.of_type("episode")) {
      if (e.value("partial", false)) continue;
      completed += 1;
      reward_sum += e["env_reward"].get<double>();
      for (const auto& [name, flag] : e["achievements"].items()) {
        names.insert(name);
        if (flag.get<bool>()) hits[name] += 1;
      }
    }
  }
  if (completed == 0)
    throw PreconditionError("summarize: no completed episodes in the logs");

  json rates;
  std::vector<double> rate_vec;
  for (const auto& name : names) {
    double pct = 100.0 * static_cast<double>(hits[name]) / completed;
    rates[name] = pct;
    rate_vec.push_back(pct);
  }
  json out;
  out["runs"] = logs.size();
  out["episodes"] = completed;
  out["mean_env_reward"] = reward_sum / completed;
  out["success_rates"] = rates;
  out["score"] = score(rate_vec);
  return out;
}

json summarize_files(const std::vector<std::string>& runlog_paths) {
  std::vector<RunLog> logs;
  for (const std::string& path : runlog_paths) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    RunLog log;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        log.records.push_back(json::parse(line));
      } catch (const json::parse_error& e) {
        throw SchemaError(path + " line " + std::to_string(n) + ": " + e.what());
      }
    }
    logs.push_back(std::move(log));
  }
  return summarize_runs(logs);
}

std::string render_summary_table(const json& summary) {
  std::ostringstream os;
  os << std::left << std::setw(24) << "achievement" << std::right
     << std::setw(10) << "success%" << "\n";
  os << std::string(34, '-') << "\n";
  for (const auto& [name, pct] : summary.at("success_rates").items()) {
    os << std::left << std::setw(24) << name << std::right << std::setw(10)
       << std::fixed << std::setprecision(1) << pct.get<double>() << "\n";
  }
  os << std::string(34, '-') << "\n";
  os << "episodes: " << summary.at("episodes").get<int>()
     << "  mean episode reward: " << std::fixed << std::setprecision(3)
     << summary.at("mean_env_reward").get<double>() << "  score: "
     << std::setprecision(3) << summary.at("score").get<double>() << "\n";
  return os.str();
}

}  // namespace craftplan
