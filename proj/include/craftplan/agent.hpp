#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "craftplan/gridcraft.hpp"
#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

// What a policy sees each step. Policies get the full world (the text
// observation has no geometry); only the tracker is text-restricted.
struct PolicyContext {
  const GridCraft& world;
  const std::vector<SubgoalId>& plan;            // active plan subgoals
  const std::map<SubgoalId, bool>& plan_done;    // tracker per-plan flags
  const SubgoalGraph* graph = nullptr;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const PolicyContext& ctx) = 0;
  // Shaped reward (env + tracker extra) for the step just taken.
  virtual void observe(double reward, bool done) { (void)reward; (void)done; }
  virtual void begin_episode() {}
  virtual std::string name() const = 0;
};

// Uniform random over all actions; the shaping floor.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(uint64_t seed) : rng_(seed) {}
  Action act(const PolicyContext& ctx) override;
  std::string name() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
};

// Deterministic backward-chaining executor: resolves the first unfinished
// plan subgoal to a primitive step (gather inputs, place stations, craft,
// fight, wait), BFS pathfinding with pinned tie-breaks. Verification oracle
// for the environment and the end-to-end smoke runs.
class ScriptedPolicy final : public Policy {
 public:
  ScriptedPolicy() = default;
  Action act(const PolicyContext& ctx) override;
  std::string name() const override { return "scripted"; }
};

struct TabularConfig {
  double lr = 0.2;
  double gamma = 0.95;
  double eps_start = 1.0;
  double eps_end = 0.1;
  int eps_decay_steps = 2000;  // primitive steps to anneal over
  int macro_budget = 30;       // primitive-step cap per macro
  uint64_t seed = 1;
};

// Epsilon-greedy tabular TD learner over macro choices. Macros are shallow:
// a macro whose immediate precondition is unmet compiles to a single noop,
// so credit assignment is learned, not scripted.
class TabularPolicy final : public Policy {
 public:
  explicit TabularPolicy(const TabularConfig& cfg);

  Action act(const PolicyContext& ctx) override;
  void observe(double reward, bool done) override;
  void begin_episode() override;
  std::string name() const override { return "tabular"; }

  // Exposed for tests.
  int feature_state(const GridCraft& world) const;
  const std::map<std::pair<int, std::string>, double>& q_table() const {
    return q_;
  }
  std::string select_target(int state, const std::vector<std::string>& targets,
                            double eps);
  double epsilon() const;
  // One TD backup: Q(s,t) += lr * (g_return + bootstrap - Q(s,t)).
  void td_update(int state, const std::string& target, double g_return,
                 double bootstrap);

 private:
  TabularConfig cfg_;
  std::mt19937_64 rng_;
  std::map<std::pair<int, std::string>, double> q_;
  long prim_steps_ = 0;
  // in-flight macro
  std::vector<Action> macro_;
  size_t macro_pos_ = 0;
  int macro_state_ = 0;
  std::string macro_target_;
  double macro_reward_ = 0.0;
  int macro_len_ = 0;
  bool macro_active_ = false;

  void finish_macro(const GridCraft& world, bool done);
  std::vector<Action> compile_macro(const GridCraft& world,
                                    const std::string& target) const;
};

std::unique_ptr<Policy> make_policy(const std::string& kind, uint64_t seed,
                                    const TabularConfig& tab_cfg = {});

}  // namespace craftplan
