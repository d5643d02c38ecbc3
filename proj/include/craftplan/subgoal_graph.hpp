#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "craftplan/json_util.hpp"

namespace craftplan {

using SubgoalId = std::string;

bool is_valid_subgoal_id(const std::string& s);

// Precondition: either "subgoal X achieved" or "inventory has >= n of X".
struct Condition {
  enum class Kind { subgoal_achieved, inventory_at_least };
  Kind kind = Kind::subgoal_achieved;
  std::string subject;  // subgoal id or object name
  int count = 1;        // inventory_at_least only

  friend bool operator==(const Condition&, const Condition&) = default;
};

// Postcondition: an observable object-level change.
struct StateChangeSpec {
  enum class Kind { delta, appear, disappear };
  Kind kind = Kind::delta;
  std::string object;
  int amount = 0;  // delta only; nonzero, sign meaningful

  friend bool operator==(const StateChangeSpec&, const StateChangeSpec&) = default;
};

struct SubgoalNode {
  SubgoalId id;
  std::string description;
  std::vector<Condition> preconditions;
  std::vector<StateChangeSpec> postconditions;
  std::string notes;  // optional free text, e.g. detection caveats
};

// Where a success-rate counter lives: a root node, an AND group (one slot for
// the whole group), or a single OR edge.
struct SlotKey {
  enum class Kind { root, and_group, or_edge };
  Kind kind = Kind::root;
  SubgoalId a;  // root id / AND target / OR source
  SubgoalId b;  // OR target only

  friend auto operator<=>(const SlotKey&, const SlotKey&) = default;
};

SlotKey root_slot(const SubgoalId& id);
SlotKey and_slot(const SubgoalId& target);
SlotKey or_slot(const SubgoalId& source, const SubgoalId& target);
std::string slot_to_string(const SlotKey& k);

struct Counter {
  long planned = 0;
  long achieved = 0;
  // Success rate; empty until the slot has been planned at least once.
  std::optional<double> weight() const {
    if (planned == 0) return std::nullopt;
    return static_cast<double>(achieved) / static_cast<double>(planned);
  }
};

struct SubgoalGraph {
  std::map<SubgoalId, SubgoalNode> nodes;
  // target -> sources, all required. Always >= 2 sources (single-source
  // dependencies canonicalize to OR edges).
  std::map<SubgoalId, std::vector<SubgoalId>> and_groups;
  // target -> alternative sources, any one sufficient.
  std::map<SubgoalId, std::vector<SubgoalId>> or_edges;
  // Explicit: nodes achievable without prior subgoals. A node with OR edges
  // but no subgoal-achieved precondition is still a root.
  std::set<SubgoalId> roots;
  // Success-rate counters, one per root/AND-group/OR-edge.
  std::map<SlotKey, Counter> slots;

  bool has_node(const SubgoalId& id) const { return nodes.count(id) > 0; }
  std::vector<SubgoalId> node_ids() const;  // sorted
  Counter& slot(const SlotKey& k);
  const Counter* find_slot(const SlotKey& k) const;
};

struct Finding {
  std::string code;     // e.g. "unknown-reference", "cycle"
  std::string subject;  // offending id / edge / entity
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
  json to_json() const;
};

// Build a graph from its JSON document. Structural problems (bad shapes,
// duplicate ids, invalid id spelling) throw SchemaError; semantic problems
// (dangling references, cycles) are left for validate_graph so that drafts
// from the extractor can be written and then criticized.
SubgoalGraph graph_from_json(const json& doc);
SubgoalGraph load_graph(const std::string& path);
json graph_to_json(const SubgoalGraph& g);

// Semantic checks: reference closure, AND/OR exclusivity, precondition
// consistency with incoming edges, acyclicity, counter sanity.
ValidationReport validate_graph(const SubgoalGraph& g);

// Recompute the explicit root set from dependencies + preconditions.
std::set<SubgoalId> derive_roots(const SubgoalGraph& g);

// Ensure every root/group/edge has a (zeroed) counter slot.
void init_slots(SubgoalGraph& g);

// Longest-path depth: roots at 0, AND target = max(source)+1, OR target =
// max over alternatives of depth+1 (0 if the node is itself a root).
// Requires an acyclic graph with closed references; throws otherwise.
std::map<SubgoalId, int> node_depths(const SubgoalGraph& g);

// True structural equality (ids, edges, roots); descriptions ignored.
bool structure_equal(const SubgoalGraph& a, const SubgoalGraph& b);

// --- Detail retrieval (feeds the critic prompt) ---

struct DetailRecord {
  SubgoalId id;
  std::string description;
  std::vector<Condition> preconditions;
  std::vector<StateChangeSpec> postconditions;
  std::string notes;
  std::vector<SubgoalId> forward;   // targets reachable over one edge
  std::vector<SubgoalId> backward;  // sources one edge upstream
};

// Records for `ids` plus neighbors within `hops` edges (undirected), sorted
// by id. Unknown ids throw PreconditionError.
std::vector<DetailRecord> subgoal_details(const SubgoalGraph& g,
                                          const std::vector<SubgoalId>& ids,
                                          int hops);

std::string render_condition(const Condition& c);
std::string render_state_change(const StateChangeSpec& s);
std::string render_details(const std::vector<DetailRecord>& records);

}  // namespace craftplan
