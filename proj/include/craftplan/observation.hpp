#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace craftplan {

// The textual interface between environment and tracker/planner. Canonical
// rendering is exactly four lines:
//   You see: cow, tree, tree
//   Inventory: sapling x1, wood x2
//   Vitals: health 9, food 9, drink 9, energy 9
//   Status: none
// Lists are lex-sorted ("You see" keeps duplicates); empty lists print
// "none"; vitals keep the fixed order health, food, drink, energy.
struct TextObservation {
  std::vector<std::string> visible;  // sorted multiset of entity names
  std::map<std::string, int> inventory;
  int health = 9, food = 9, drink = 9, energy = 9;
  std::set<std::string> status;  // e.g. "night", "sleeping"
};

std::string render_observation(const TextObservation& obs);
TextObservation parse_observation(const std::string& text);

// Flat object->count view of one observation: visible names contribute 1
// per instance, inventory contributes its counts, vitals contribute their
// values under their own names; overlapping names sum.
using ObjectSnapshot = std::map<std::string, int>;

ObjectSnapshot extract_objects(const TextObservation& obs);

struct StateDelta {
  std::map<std::string, int> changed;  // keys in both, nonzero difference
  std::set<std::string> appeared;      // keys only in curr
  std::set<std::string> disappeared;   // keys only in prev

  bool empty() const {
    return changed.empty() && appeared.empty() && disappeared.empty();
  }
};

StateDelta diff(const ObjectSnapshot& prev, const ObjectSnapshot& curr);

}  // namespace craftplan
