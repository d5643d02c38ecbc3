#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "craftplan/json_util.hpp"
#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

struct EntityRecord {
  std::string name;  // lowercase
  std::string entity_type;
  std::string description;
  std::vector<SubgoalId> related_subgoals;
};

struct EntityKB {
  std::map<std::string, EntityRecord> entities;

  bool has(const std::string& name) const { return entities.count(name) > 0; }
  std::vector<std::string> names() const;  // sorted
};

EntityKB kb_from_json(const json& doc);
EntityKB load_kb(const std::string& path);
json kb_to_json(const EntityKB& kb);

// Related-subgoal closure against the graph; appended to a graph report by
// the harness-level validate.
ValidationReport validate_kb(const EntityKB& kb, const SubgoalGraph& g);

struct EntityLookup {
  std::vector<EntityRecord> found;      // sorted by name
  std::vector<std::string> unknown;     // names not in the KB, sorted
};

EntityLookup lookup_entities(const EntityKB& kb,
                             const std::vector<std::string>& names);

// Case-insensitive longest-match scan of free text against KB names. A match
// consumes its span, so "stone_pickaxe" does not also report "stone" at the
// same position; a separate "stone" elsewhere still matches.
std::set<std::string> extract_entity_names(const std::string& text,
                                           const EntityKB& kb);

// One line per record, sorted by name; "none" for an empty lookup.
std::string render_entity_info(const std::vector<EntityRecord>& records);

}  // namespace craftplan
