#include "craftplan/entity_kb.hpp"

#include <algorithm>
#include <cctype>

#include "craftplan/error.hpp"

namespace craftplan {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::vector<std::string> EntityKB::names() const {
  std::vector<std::string> out;
  out.reserve(entities.size());
  for (const auto& [name, _] : entities) out.push_back(name);
  return out;
}

EntityKB kb_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("kb: document must be an object");
  const json& arr = require_field(doc, "entities", "kb");
  if (!arr.is_array()) throw SchemaError("kb: 'entities' must be an array");

  EntityKB kb;
  for (const json& ej : arr) {
    if (!ej.is_object()) throw SchemaError("kb: entity entries must be objects");
    EntityRecord rec;
    rec.name = lower(require_string(ej, "name", "kb"));
    const std::string where = "kb entity '" + rec.name + "'";
    if (rec.name.empty()) throw SchemaError("kb: entity name must be non-empty");
    if (kb.entities.count(rec.name)) throw SchemaError(where + ": duplicate name");
    rec.entity_type = require_string(ej, "entity_type", where);
    rec.description = require_string(ej, "description", where);
    const json& rel = require_field(ej, "related_subgoals", where);
    if (!rel.is_array()) throw SchemaError(where + ": related_subgoals must be an array");
    for (const json& r : rel) {
      if (!r.is_string()) throw SchemaError(where + ": related_subgoals must be strings");
      rec.related_subgoals.push_back(r.get<std::string>());
    }
    std::sort(rec.related_subgoals.begin(), rec.related_subgoals.end());
    kb.entities[rec.name] = std::move(rec);
  }
  return kb;
}

EntityKB load_kb(const std::string& path) {
  return kb_from_json(load_json_file(path));
}

json kb_to_json(const EntityKB& kb) {
  json arr = json::array();
  for (const auto& [name, rec] : kb.entities) {
    arr.push_back({{"name", name},
                   {"entity_type", rec.entity_type},
                   {"description", rec.description},
                   {"related_subgoals", rec.related_subgoals}});
  }
  return json{{"entities", arr}};
}

ValidationReport validate_kb(const EntityKB& kb, const SubgoalGraph& g) {
  ValidationReport rep;
  for (const auto& [name, rec] : kb.entities) {
    for (const auto& sg : rec.related_subgoals) {
      if (!g.has_node(sg))
        rep.findings.push_back(
            {"unknown-subgoal", name,
             "entity '" + name + "' references unknown subgoal '" + sg + "'"});
    }
  }
  return rep;
}

EntityLookup lookup_entities(const EntityKB& kb,
                             const std::vector<std::string>& names) {
  EntityLookup out;
  std::set<std::string> seen;
  for (const auto& raw : names) {
    std::string n = lower(raw);
    if (!seen.insert(n).second) continue;
    auto it = kb.entities.find(n);
    if (it != kb.entities.end())
      out.found.push_back(it->second);
    else
      out.unknown.push_back(n);
  }
  std::sort(out.found.begin(), out.found.end(),
            [](const EntityRecord& a, const EntityRecord& b) { return a.name < b.name; });
  std::sort(out.unknown.begin(), out.unknown.end());
  return out;
}

std::set<std::string> extract_entity_names(const std::string& text,
                                           const EntityKB& kb) {
  std::string low = lower(text);
  // Longest-first candidate order, so the scan prefers "stone_pickaxe" over
  // "stone" at the same position.
  std::vector<std::string> names = kb.names();
  std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });

  std::set<std::string> found;
  size_t pos = 0;
  while (pos < low.size()) {
    size_t advance = 1;
    for (const auto& name : names) {
      if (low.compare(pos, name.size(), name) == 0) {
        found.insert(name);
        advance = name.size();
        break;
      }
    }
    pos += advance;
  }
  return found;
}

std::string render_entity_info(const std::vector<EntityRecord>& records) {
  if (records.empty()) return "none";
  std::string out;
  for (size_t i = 0; i < records.size(); ++i) {
    const EntityRecord& r = records[i];
    if (i) out += "\n";
    out += r.name + " (" + r.entity_type + "): " + r.description;
    if (!r.related_subgoals.empty()) {
      out += " Related subgoals: ";
      for (size_t k = 0; k < r.related_subgoals.size(); ++k) {
        if (k) out += ", ";
        out += r.related_subgoals[k];
      }
      out += ".";
    }
  }
  return out;
}

}  // namespace craftplan
