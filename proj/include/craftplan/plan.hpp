#pragma once

#include <string>
#include <vector>

#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

enum class PlanProvenance {
  adopted_top_ranked,  // critic said no modification; top candidate taken
  refined,             // refiner produced the final plan
  fallback,            // ladder: lower-ranked candidate or frontier heuristic
};

std::string provenance_to_string(PlanProvenance p);

struct FinalPlan {
  std::vector<SubgoalId> subgoals;  // exactly 3, distinct
  PlanProvenance provenance = PlanProvenance::fallback;
};

}  // namespace craftplan
