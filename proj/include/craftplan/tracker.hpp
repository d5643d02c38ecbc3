#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "craftplan/observation.hpp"
#include "craftplan/plan.hpp"
#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

// Monitors the active plan against observation deltas, pays the extra
// reward for first-time in-plan achievements, and feeds the success-rate
// counters that weight the graph.
struct TrackerState {
  double alpha = 0.2;  // extra reward per first-time achievement
  std::optional<FinalPlan> active_plan;
  std::map<SubgoalId, bool> first_achieved;  // per plan subgoal
  // Slots credited at new_plan; the same slots take the achieved increment.
  std::map<SubgoalId, std::vector<SlotKey>> credited;
  double plan_extra_total = 0.0;
};

struct TrackerStepResult {
  double extra_reward = 0.0;
  std::vector<SubgoalId> achieved;       // matched this step (any time)
  std::vector<SubgoalId> first_achieved; // matched and first in this plan
  StateDelta delta;
};

// Subgoals of `plan` whose postconditions all hold in `delta`.
std::vector<SubgoalId> check_subgoals(const StateDelta& delta,
                                      const std::vector<SubgoalId>& plan,
                                      const SubgoalGraph& g);

// Install a plan: reset per-plan flags and increment the planned counter of
// every credited slot. `achieved_episode` is the set of subgoals already
// achieved in this episode (used to pick which OR alternatives to credit).
void tracker_new_plan(TrackerState& st, SubgoalGraph& g, const FinalPlan& plan,
                      const std::set<SubgoalId>& achieved_episode);

// Consume one observation transition.
TrackerStepResult tracker_step(TrackerState& st, SubgoalGraph& g,
                               const TextObservation& prev,
                               const TextObservation& curr);

bool tracker_all_achieved(const TrackerState& st);

// Drop the active plan and per-plan state (episode boundary).
void tracker_reset_episode(TrackerState& st);

// Which slots a planned subgoal credits (root and/or AND group and/or OR
// edges; for OR targets, alternatives already achieved this episode if any,
// otherwise all alternatives).
std::vector<SlotKey> credited_slots(const SubgoalGraph& g, const SubgoalId& id,
                                    const std::set<SubgoalId>& achieved_episode);

}  // namespace craftplan
