#include "craftplan/tracker.hpp"

#include <algorithm>

#include "craftplan/error.hpp"

namespace craftplan {

namespace {

bool change_satisfied(const StateChangeSpec& spec, const StateDelta& delta) {
  switch (spec.kind) {
    case StateChangeSpec::Kind::appear:
      return delta.appeared.count(spec.object) > 0;
    case StateChangeSpec::Kind::disappear:
      return delta.disappeared.count(spec.object) > 0;
    case StateChangeSpec::Kind::delta: {
      auto it = delta.changed.find(spec.object);
      if (it == delta.changed.end()) return false;
      int got = it->second;
      if (spec.amount > 0) return got >= spec.amount;
      return got <= spec.amount;
    }
  }
  return false;
}

}  // namespace

std::vector<SubgoalId> check_subgoals(const StateDelta& delta,
                                      const std::vector<SubgoalId>& plan,
                                      const SubgoalGraph& g) {
  std::vector<SubgoalId> achieved;
  for (const auto& id : plan) {
    auto it = g.nodes.find(id);
    if (it == g.nodes.end())
      throw PreconditionError("check_subgoals: unknown subgoal '" + id + "'");
    const auto& posts = it->second.postconditions;
    if (posts.empty()) continue;  // nothing observable to match
    bool all = true;
    for (const auto& spec : posts)
      if (!change_satisfied(spec, delta)) all = false;
    if (all) achieved.push_back(id);
  }
  return achieved;
}

std::vector<SlotKey> credited_slots(const SubgoalGraph& g, const SubgoalId& id,
                                    const std::set<SubgoalId>& achieved_episode) {
  if (!g.has_node(id))
    throw PreconditionError("credited_slots: unknown subgoal '" + id + "'");
  std::vector<SlotKey> slots;
  if (g.roots.count(id)) slots.push_back(root_slot(id));
  if (g.and_groups.count(id)) slots.push_back(and_slot(id));
  if (auto it = g.or_edges.find(id); it != g.or_edges.end()) {
    std::vector<SlotKey> achieved_alts;
    for (const auto& s : it->second)
      if (achieved_episode.count(s)) achieved_alts.push_back(or_slot(s, id));
    if (!achieved_alts.empty()) {
      slots.insert(slots.end(), achieved_alts.begin(), achieved_alts.end());
    } else {
      for (const auto& s : it->second) slots.push_back(or_slot(s, id));
    }
  }
  return slots;
}

void tracker_new_plan(TrackerState& st, SubgoalGraph& g, const FinalPlan& plan,
                      const std::set<SubgoalId>& achieved_episode) {
  if (plan.subgoals.empty())
    throw PreconditionError("tracker_new_plan: empty plan");
  for (const auto& id : plan.subgoals)
    if (!g.has_node(id))
      throw PreconditionError("tracker_new_plan: unknown subgoal '" + id + "'");

  st.active_plan = plan;
  st.first_achieved.clear();
  st.credited.clear();
  st.plan_extra_total = 0.0;
  for (const auto& id : plan.subgoals) {
    st.first_achieved[id] = false;
    std::vector<SlotKey> slots = credited_slots(g, id, achieved_episode);
    for (const auto& key : slots) g.slot(key).planned += 1;
    st.credited[id] = std::move(slots);
  }
}

TrackerStepResult tracker_step(TrackerState& st, SubgoalGraph& g,
                               const TextObservation& prev,
                               const TextObservation& curr) {
  if (!st.active_plan)
    throw PreconditionError("tracker_step: no active plan");

  TrackerStepResult out;
  out.delta = diff(extract_objects(prev), extract_objects(curr));
  out.achieved = check_subgoals(out.delta, st.active_plan->subgoals, g);
  for (const auto& id : out.achieved) {
    if (st.first_achieved.at(id)) continue;
    st.first_achieved[id] = true;
    out.first_achieved.push_back(id);
    for (const auto& key : st.credited.at(id)) g.slot(key).achieved += 1;
  }
  out.extra_reward = st.alpha * static_cast<double>(out.first_achieved.size());
  st.plan_extra_total += out.extra_reward;
  return out;
}

bool tracker_all_achieved(const TrackerState& st) {
  if (!st.active_plan) return false;
  return std::all_of(st.first_achieved.begin(), st.first_achieved.end(),
                     [](const auto& kv) { return kv.second; });
}

void tracker_reset_episode(TrackerState& st) {
  st.active_plan.reset();
  st.first_achieved.clear();
  st.credited.clear();
  st.plan_extra_total = 0.0;
}

}  // namespace craftplan
