#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "craftplan/error.hpp"
#include "craftplan/harness.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace craftplan;
using testutil::fixture;
using testutil::scratch_dir;

// independent geometric-mean reference, plain double arithmetic
static double score_oracle(const std::vector<double>& rates) {
  double acc = 0.0;
  for (double s : rates) acc += std::log1p(s);
  return std::expm1(acc / static_cast<double>(rates.size()));
}

TEST_CASE("score hits the boundary values exactly") {
  CHECK(score(std::vector<double>(22, 0.0)) == 0.0);
  CHECK(score(std::vector<double>(22, 100.0)) == doctest::Approx(100.0).epsilon(1e-15));
  CHECK(score({50.0}) == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("score matches a direct evaluation on random rate vectors") {
  std::mt19937_64 rng(0x5c0e);
  for (int round = 0; round < 1000; ++round) {
    std::vector<double> rates(22);
    for (double& r : rates) r = unit_real(rng) * 100.0;
    CHECK(score(rates) == doctest::Approx(score_oracle(rates)).epsilon(1e-9));
  }
}

TEST_CASE("score is monotone and permutation invariant") {
  std::mt19937_64 rng(0xa11);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> rates(22);
    for (double& r : rates) r = unit_real(rng) * 90.0;
    double base = score(rates);

    std::vector<double> bumped = rates;
    bumped[bounded_int(rng, 0, 21)] += 10.0;
    CHECK(score(bumped) > base);

    std::vector<double> shuffled = rates;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(score(shuffled) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("score rejects empty and out-of-range input") {
  CHECK_THROWS_AS(score({}), PreconditionError);
  CHECK_THROWS_AS(score({50.0, -0.001}), PreconditionError);
  CHECK_THROWS_AS(score({100.001}), PreconditionError);
  CHECK_THROWS_AS(score({std::nan("")}), PreconditionError);
}

static json minimal_cfg_json() {
  json j;
  j["graph"] = fixture("crafter_graph.json");
  j["kb"] = fixture("crafter_kb.json");
  j["prompts"] = fixture("prompts");
  j["llm"] = {{"backend", "mock"}, {"script", fixture("mocks/mock_smoke.json")}};
  return j;
}

TEST_CASE("run_config_from_json applies defaults and validates fields") {
  RunConfig cfg = run_config_from_json(minimal_cfg_json());
  CHECK(cfg.seed == 0);
  CHECK(cfg.max_steps == 5000);
  CHECK(cfg.planning_interval == 100);
  CHECK(cfg.alpha == doctest::Approx(0.2));
  CHECK(cfg.policy == "scripted");
  CHECK(cfg.out_dir.empty());
  CHECK(cfg.llm.kind == BackendConfig::Kind::mock);

  json full = minimal_cfg_json();
  full["seed"] = 42;
  full["max_steps"] = 1234;
  full["planning_interval"] = 25;
  full["alpha"] = 0.05;
  full["policy"] = "tabular";
  full["retries"] = 3;
  full["world"] = {{"episode_cap", 99}};
  full["tabular"] = {{"lr", 0.5}, {"eps_decay_steps", 77}};
  RunConfig c2 = run_config_from_json(full);
  CHECK(c2.seed == 42);
  CHECK(c2.max_steps == 1234);
  CHECK(c2.planning_interval == 25);
  CHECK(c2.alpha == doctest::Approx(0.05));
  CHECK(c2.policy == "tabular");
  CHECK(c2.planner.retries == 3);
  CHECK(c2.world.episode_cap == 99);
  CHECK(c2.tabular.lr == doctest::Approx(0.5));
  CHECK(c2.tabular.eps_decay_steps == 77);

  for (const char* missing : {"graph", "kb", "prompts", "llm"}) {
    json bad = minimal_cfg_json();
    bad.erase(missing);
    CHECK_THROWS_AS(run_config_from_json(bad), SchemaError);
  }
  json bad = minimal_cfg_json();
  bad["seed"] = -1;
  CHECK_THROWS_AS(run_config_from_json(bad), SchemaError);
  bad = minimal_cfg_json();
  bad["max_steps"] = 0;
  CHECK_THROWS_AS(run_config_from_json(bad), SchemaError);
  bad = minimal_cfg_json();
  bad["planning_interval"] = 0;
  CHECK_THROWS_AS(run_config_from_json(bad), SchemaError);
  bad = minimal_cfg_json();
  bad["alpha"] = -0.1;
  CHECK_THROWS_AS(run_config_from_json(bad), SchemaError);
  bad = minimal_cfg_json();
  bad["retries"] = -1;
  CHECK_THROWS_AS(run_config_from_json(bad), SchemaError);
  CHECK_THROWS_AS(run_config_from_json(json::array()), SchemaError);
}

TEST_CASE("load_run_config rebases relative paths against the config dir") {
  RunConfig cfg = load_run_config(fixture("configs/run_smoke.json"));
  CHECK(cfg.seed == 7);
  CHECK(cfg.graph_path == fixture("configs/../crafter_graph.json"));
  CHECK(std::filesystem::exists(cfg.graph_path));
  CHECK(std::filesystem::exists(cfg.kb_path));
  CHECK(std::filesystem::exists(cfg.prompt_dir));
  CHECK(cfg.llm.script_path == fixture("configs/../mocks/mock_smoke.json"));
  CHECK(cfg.world.episode_cap == 500);

  // absolute paths pass through untouched
  std::string dir = scratch_dir("cfg");
  json j = minimal_cfg_json();
  write_json_file(dir + "/run.json", j);
  RunConfig abs = load_run_config(dir + "/run.json");
  CHECK(abs.graph_path == fixture("crafter_graph.json"));
}

static RunConfig mini_cfg(const std::string& out_dir) {
  RunConfig cfg = load_run_config(fixture("configs/run_smoke.json"));
  cfg.max_steps = 600;  // one full episode (cap 500) plus a partial tail
  cfg.out_dir = out_dir;
  return cfg;
}

TEST_CASE("run_experiment emits a well-formed deterministic log") {
  std::string dir_a = scratch_dir("run_a");
  std::string dir_b = scratch_dir("run_b");
  RunResult a = run_experiment(mini_cfg(dir_a));
  RunResult b = run_experiment(mini_cfg(dir_b));
  CHECK(a.log.to_jsonl() == b.log.to_jsonl());

  // files match the in-memory log
  std::ifstream in(dir_a + "/runlog.jsonl");
  REQUIRE(in.good());
  std::string file_body((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  CHECK(file_body == a.log.to_jsonl());
  CHECK(std::filesystem::exists(dir_a + "/metrics.json"));
  CHECK(std::filesystem::exists(dir_a + "/transcript.jsonl"));
  CHECK(std::filesystem::file_size(dir_a + "/transcript.jsonl") > 0);

  // record shapes
  std::vector<json> replans = a.log.of_type("replan");
  std::vector<json> steps = a.log.of_type("step");
  std::vector<json> episodes = a.log.of_type("episode");
  std::vector<json> metrics = a.log.of_type("metrics");
  REQUIRE(!replans.empty());
  CHECK(steps.size() == 600);
  REQUIRE(metrics.size() == 1);
  CHECK(replans.size() + steps.size() + episodes.size() + metrics.size() ==
        a.log.records.size());

  const json& first = a.log.records.front();
  CHECK(first["type"] == "replan");
  CHECK(first["step"] == 0);
  CHECK(first["reason"] == "interval");
  CHECK(first["plan_seq"] == 1);
  CHECK(first["plan"].size() == 3);
  CHECK(first["provenance"].is_string());
  CHECK(first["llm_calls"].is_number_integer());

  std::set<std::string> reasons;
  long prev_seq = 0;
  for (const json& r : replans) {
    reasons.insert(r["reason"].get<std::string>());
    CHECK(r["plan_seq"].get<long>() == prev_seq + 1);
    prev_seq = r["plan_seq"].get<long>();
    CHECK(r["step"].is_number_integer());
    CHECK(r["episode"].is_number_integer());
  }
  for (const std::string& r : reasons)
    CHECK((r == "interval" || r == "episode_start" || r == "plan_complete"));
  // the interval fires at t=0 and every 100 steps after
  CHECK(reasons.count("interval") == 1);

  long step_counter = 0;
  int episode_counter = 0;
  double extra_sum = 0.0;
  for (const json& s : steps) {
    CHECK(s["step"].get<long>() == step_counter++);
    CHECK(s["episode"].get<int>() >= episode_counter);
    episode_counter = s["episode"].get<int>();
    CHECK(s["action"].is_string());
    CHECK(s["env_reward"].is_number());
    CHECK(s["extra_reward"].is_number());
    CHECK(s["done"].is_boolean());
    extra_sum += s["extra_reward"].get<double>();
    if (s.contains("achieved")) {
      CHECK(!s["achieved"].empty());
      CHECK(s["extra_reward"].get<double>() ==
            doctest::Approx(0.2 * s["achieved"].size()));
    } else {
      CHECK(s["extra_reward"].get<double>() == 0.0);
    }
  }
  // the scripted policy makes progress, so shaping pays out at least once
  CHECK(extra_sum > 0.0);

  REQUIRE(!episodes.empty());
  CHECK(episodes.front()["partial"] == false);
  CHECK(episodes.front()["length"].get<long>() >= 1);
  CHECK(episodes.front()["length"].get<long>() <= 500);
  CHECK(episodes.front()["achievements"].size() == 22);
  int completed = 0;
  for (const json& e : episodes)
    if (!e["partial"].get<bool>()) ++completed;
  CHECK(completed >= 1);

  const json& m = metrics.front();
  CHECK(m["episodes"].get<int>() == completed);
  CHECK(m["total_steps"] == 600);
  CHECK(m["replans"].get<long>() == static_cast<long>(replans.size()));
  CHECK(m["success_rates"].size() == 22);
  const std::vector<std::string>& names = GridCraft::achievement_names();
  std::vector<double> rates;
  for (const auto& [name, pct] : m["success_rates"].items()) {
    CHECK(std::find(names.begin(), names.end(), name) != names.end());
    rates.push_back(pct.get<double>());
  }
  CHECK(m["score"].get<double>() == doctest::Approx(score(rates)).epsilon(1e-12));
  CHECK(m.dump() == a.metrics.dump());
}

TEST_CASE("alpha zero disables shaped reward") {
  RunConfig cfg = mini_cfg("");
  cfg.alpha = 0.0;
  cfg.max_steps = 400;
  RunResult res = run_experiment(cfg);
  for (const json& s : res.log.of_type("step"))
    CHECK(s["extra_reward"].get<double>() == 0.0);
}

static RunLog fake_log(double reward_a, double reward_b) {
  auto episode = [](int idx, double reward, bool wood, bool table,
                    bool partial) {
    json e;
    e["type"] = "episode";
    e["episode"] = idx;
    e["length"] = 100;
    e["env_reward"] = reward;
    e["extra_reward"] = 0.0;
    e["partial"] = partial;
    e["achievements"] = {{"collect_wood", wood}, {"place_table", table}};
    return e;
  };
  RunLog log;
  log.records.push_back(episode(0, reward_a, true, true, false));
  log.records.push_back(episode(1, reward_b, true, false, false));
  log.records.push_back(episode(2, 99.0, true, true, true));  // ignored
  return log;
}

TEST_CASE("summarize_runs aggregates completed episodes only") {
  json sum = summarize_runs({fake_log(1.0, 3.0)});
  CHECK(sum["runs"] == 1);
  CHECK(sum["episodes"] == 2);
  CHECK(sum["mean_env_reward"].get<double>() == doctest::Approx(2.0));
  CHECK(sum["success_rates"]["collect_wood"].get<double>() == doctest::Approx(100.0));
  CHECK(sum["success_rates"]["place_table"].get<double>() == doctest::Approx(50.0));
  CHECK(sum["score"].get<double>() ==
        doctest::Approx(score_oracle({100.0, 50.0})).epsilon(1e-9));

  // pooling across logs
  json pooled = summarize_runs({fake_log(1.0, 3.0), fake_log(5.0, 7.0)});
  CHECK(pooled["runs"] == 2);
  CHECK(pooled["episodes"] == 4);
  CHECK(pooled["mean_env_reward"].get<double>() == doctest::Approx(4.0));

  RunLog empty;
  CHECK_THROWS_AS(summarize_runs({empty}), PreconditionError);
  RunLog only_partial;
  only_partial.records = fake_log(1, 1).records;
  for (json& r : only_partial.records) r["partial"] = true;
  CHECK_THROWS_AS(summarize_runs({only_partial}), PreconditionError);
}

TEST_CASE("summarize_files reads runlog JSONL back") {
  std::string dir = scratch_dir("sum");
  write_text_file(dir + "/log.jsonl", fake_log(1.0, 3.0).to_jsonl());
  json sum = summarize_files({dir + "/log.jsonl"});
  CHECK(sum["episodes"] == 2);
  CHECK(sum["success_rates"]["place_table"].get<double>() == doctest::Approx(50.0));

  CHECK_THROWS_AS(summarize_files({dir + "/missing.jsonl"}), SchemaError);
  write_text_file(dir + "/bad.jsonl", "{not json\n");
  CHECK_THROWS_AS(summarize_files({dir + "/bad.jsonl"}), SchemaError);
}

TEST_CASE("render_summary_table formats the summary") {
  std::string table = render_summary_table(summarize_runs({fake_log(1.0, 3.0)}));
  CHECK(table.find("achievement") != std::string::npos);
  CHECK(table.find("collect_wood") != std::string::npos);
  CHECK(table.find("100.0") != std::string::npos);
  CHECK(table.find("50.0") != std::string::npos);
  CHECK(table.find("episodes: 2") != std::string::npos);
  CHECK(table.find("score:") != std::string::npos);
}
