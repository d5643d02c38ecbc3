#include "craftplan/subgoal_graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

#include "craftplan/error.hpp"

namespace craftplan {

namespace {

std::vector<SubgoalId> sorted_unique(std::vector<SubgoalId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

Condition condition_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": condition must be an object");
  std::string kind = require_string(j, "kind", where);
  Condition c;
  if (kind == "subgoal_achieved") {
    c.kind = Condition::Kind::subgoal_achieved;
    c.subject = require_string(j, "subgoal", where);
  } else if (kind == "inventory_at_least") {
    c.kind = Condition::Kind::inventory_at_least;
    c.subject = require_string(j, "object", where);
    const json& n = require_field(j, "count", where);
    if (!n.is_number_integer() || n.get<int>() < 1)
      throw SchemaError(where + ": inventory count must be a positive integer");
    c.count = n.get<int>();
  } else {
    throw SchemaError(where + ": unknown condition kind '" + kind + "'");
  }
  return c;
}

json condition_to_json(const Condition& c) {
  if (c.kind == Condition::Kind::subgoal_achieved)
    return json{{"kind", "subgoal_achieved"}, {"subgoal", c.subject}};
  return json{{"kind", "inventory_at_least"},
              {"object", c.subject},
              {"count", c.count}};
}

StateChangeSpec change_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": postcondition must be an object");
  StateChangeSpec s;
  s.object = require_string(j, "object", where);
  std::string ch = require_string(j, "change", where);
  if (ch == "appear") {
    s.kind = StateChangeSpec::Kind::appear;
  } else if (ch == "disappear") {
    s.kind = StateChangeSpec::Kind::disappear;
  } else {
    s.kind = StateChangeSpec::Kind::delta;
    size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(ch, &pos);
    } catch (const std::exception&) {
      throw SchemaError(where + ": bad change '" + ch + "'");
    }
    if (pos != ch.size() || v == 0)
      throw SchemaError(where + ": bad change '" + ch + "'");
    s.amount = v;
  }
  return s;
}

json change_to_json(const StateChangeSpec& s) {
  std::string ch;
  switch (s.kind) {
    case StateChangeSpec::Kind::appear: ch = "appear"; break;
    case StateChangeSpec::Kind::disappear: ch = "disappear"; break;
    case StateChangeSpec::Kind::delta:
      ch = (s.amount > 0 ? "+" : "") + std::to_string(s.amount);
      break;
  }
  return json{{"object", s.object}, {"change", ch}};
}

}  // namespace

bool is_valid_subgoal_id(const std::string& s) {
  if (s.empty() || s[0] < 'a' || s[0] > 'z') return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

SlotKey root_slot(const SubgoalId& id) {
  return SlotKey{SlotKey::Kind::root, id, ""};
}
SlotKey and_slot(const SubgoalId& target) {
  return SlotKey{SlotKey::Kind::and_group, target, ""};
}
SlotKey or_slot(const SubgoalId& source, const SubgoalId& target) {
  return SlotKey{SlotKey::Kind::or_edge, source, target};
}

std::string slot_to_string(const SlotKey& k) {
  switch (k.kind) {
    case SlotKey::Kind::root: return "root(" + k.a + ")";
    case SlotKey::Kind::and_group: return "and(" + k.a + ")";
    case SlotKey::Kind::or_edge: return "or(" + k.a + " -> " + k.b + ")";
  }
  return "?";
}

std::vector<SubgoalId> SubgoalGraph::node_ids() const {
  std::vector<SubgoalId> out;
  out.reserve(nodes.size());
  for (const auto& [id, _] : nodes) out.push_back(id);
  return out;  // std::map iterates sorted
}

Counter& SubgoalGraph::slot(const SlotKey& k) { return slots[k]; }

const Counter* SubgoalGraph::find_slot(const SlotKey& k) const {
  auto it = slots.find(k);
  return it == slots.end() ? nullptr : &it->second;
}

json ValidationReport::to_json() const {
  json arr = json::array();
  for (const auto& f : findings)
    arr.push_back({{"code", f.code}, {"subject", f.subject}, {"message", f.message}});
  return json{{"findings", arr}, {"ok", ok()}};
}

SubgoalGraph graph_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("graph: document must be an object");
  const json& arr = require_field(doc, "subgoals", "graph");
  if (!arr.is_array()) throw SchemaError("graph: 'subgoals' must be an array");

  SubgoalGraph g;
  for (const json& nj : arr) {
    if (!nj.is_object()) throw SchemaError("graph: subgoal entries must be objects");
    SubgoalNode node;
    node.id = require_string(nj, "id", "graph");
    const std::string where = "graph subgoal '" + node.id + "'";
    if (!is_valid_subgoal_id(node.id))
      throw SchemaError(where + ": invalid id (want snake_case)");
    if (g.nodes.count(node.id)) throw SchemaError(where + ": duplicate id");
    node.description = require_string(nj, "description", where);
    for (const json& cj : require_field(nj, "preconditions", where))
      node.preconditions.push_back(condition_from_json(cj, where));
    for (const json& pj : require_field(nj, "postconditions", where))
      node.postconditions.push_back(change_from_json(pj, where));
    if (nj.contains("notes") && !nj["notes"].is_null())
      node.notes = require_string(nj, "notes", where);

    if (nj.contains("dependency") && !nj["dependency"].is_null()) {
      const json& dj = nj["dependency"];
      std::string kind = require_string(dj, "kind", where);
      const json& sj = require_field(dj, "sources", where);
      if (!sj.is_array() || sj.empty())
        throw SchemaError(where + ": dependency sources must be a non-empty array");
      std::vector<SubgoalId> sources;
      for (const json& s : sj) {
        if (!s.is_string() || !is_valid_subgoal_id(s.get<std::string>()))
          throw SchemaError(where + ": dependency sources must be subgoal ids");
        sources.push_back(s.get<std::string>());
      }
      auto uniq = sorted_unique(sources);
      if (uniq.size() != sources.size())
        throw SchemaError(where + ": duplicate dependency source");
      if (kind == "and") {
        if (uniq.size() < 2)
          throw SchemaError(where + ": AND dependency needs at least 2 sources");
        g.and_groups[node.id] = uniq;
      } else if (kind == "or") {
        g.or_edges[node.id] = uniq;
      } else {
        throw SchemaError(where + ": dependency kind must be 'and' or 'or'");
      }
    }
    g.nodes[node.id] = std::move(node);
  }
  g.roots = derive_roots(g);
  init_slots(g);
  return g;
}

SubgoalGraph load_graph(const std::string& path) {
  return graph_from_json(load_json_file(path));
}

json graph_to_json(const SubgoalGraph& g) {
  json arr = json::array();
  for (const auto& [id, node] : g.nodes) {
    json nj;
    nj["id"] = id;
    nj["description"] = node.description;
    json pre = json::array();
    for (const auto& c : node.preconditions) pre.push_back(condition_to_json(c));
    nj["preconditions"] = pre;
    json post = json::array();
    for (const auto& s : node.postconditions) post.push_back(change_to_json(s));
    nj["postconditions"] = post;
    if (auto it = g.and_groups.find(id); it != g.and_groups.end())
      nj["dependency"] = json{{"kind", "and"}, {"sources", it->second}};
    else if (auto it2 = g.or_edges.find(id); it2 != g.or_edges.end())
      nj["dependency"] = json{{"kind", "or"}, {"sources", it2->second}};
    else
      nj["dependency"] = nullptr;
    if (!node.notes.empty()) nj["notes"] = node.notes;
    arr.push_back(nj);
  }
  return json{{"subgoals", arr}};
}

std::set<SubgoalId> derive_roots(const SubgoalGraph& g) {
  std::set<SubgoalId> roots;
  for (const auto& [id, node] : g.nodes) {
    if (g.and_groups.count(id)) continue;
    bool has_subgoal_pre = false;
    for (const auto& c : node.preconditions)
      if (c.kind == Condition::Kind::subgoal_achieved) has_subgoal_pre = true;
    if (!has_subgoal_pre) roots.insert(id);
  }
  return roots;
}

void init_slots(SubgoalGraph& g) {
  for (const auto& r : g.roots) g.slots.emplace(root_slot(r), Counter{});
  for (const auto& [t, _] : g.and_groups) g.slots.emplace(and_slot(t), Counter{});
  for (const auto& [t, sources] : g.or_edges)
    for (const auto& s : sources) g.slots.emplace(or_slot(s, t), Counter{});
}

namespace {

// DFS over source->target edges; returns a cycle as "a -> b -> a" if found.
std::optional<std::string> find_cycle(const SubgoalGraph& g) {
  std::map<SubgoalId, std::vector<SubgoalId>> out_edges;
  for (const auto& [t, sources] : g.and_groups)
    for (const auto& s : sources)
      if (g.has_node(s)) out_edges[s].push_back(t);
  for (const auto& [t, sources] : g.or_edges)
    for (const auto& s : sources)
      if (g.has_node(s)) out_edges[s].push_back(t);

  std::map<SubgoalId, int> color;  // 0 white, 1 gray, 2 black
  std::vector<SubgoalId> stack;
  std::optional<std::string> cycle;

  std::function<bool(const SubgoalId&)> dfs = [&](const SubgoalId& v) {
    color[v] = 1;
    stack.push_back(v);
    for (const auto& w : out_edges[v]) {
      if (color[w] == 1) {
        std::ostringstream os;
        auto it = std::find(stack.begin(), stack.end(), w);
        for (; it != stack.end(); ++it) os << *it << " -> ";
        os << w;
        cycle = os.str();
        return true;
      }
      if (color[w] == 0 && dfs(w)) return true;
    }
    stack.pop_back();
    color[v] = 2;
    return false;
  };

  for (const auto& [id, _] : g.nodes)
    if (color[id] == 0 && dfs(id)) break;
  return cycle;
}

}  // namespace

ValidationReport validate_graph(const SubgoalGraph& g) {
  ValidationReport rep;
  auto add = [&](const std::string& code, const std::string& subject,
                 const std::string& message) {
    rep.findings.push_back({code, subject, message});
  };

  for (const auto& [target, sources] : g.and_groups) {
    if (g.or_edges.count(target))
      add("and-or-overlap", target,
          "subgoal '" + target + "' has both an AND group and OR edges");
    if (sources.size() < 2)
      add("empty-group", target,
          "AND group of '" + target + "' has fewer than 2 sources");
    for (const auto& s : sources) {
      if (!g.has_node(s))
        add("unknown-reference", s,
            "AND source '" + s + "' of '" + target + "' is not a subgoal");
      if (s == target)
        add("self-edge", target, "subgoal '" + target + "' depends on itself");
    }
  }
  for (const auto& [target, sources] : g.or_edges) {
    if (sources.empty())
      add("empty-group", target, "OR edge list of '" + target + "' is empty");
    for (const auto& s : sources) {
      if (!g.has_node(s))
        add("unknown-reference", s,
            "OR source '" + s + "' of '" + target + "' is not a subgoal");
      if (s == target)
        add("self-edge", target, "subgoal '" + target + "' depends on itself");
    }
  }

  for (const auto& [id, node] : g.nodes) {
    std::set<SubgoalId> incoming;
    if (auto it = g.and_groups.find(id); it != g.and_groups.end())
      incoming.insert(it->second.begin(), it->second.end());
    if (auto it = g.or_edges.find(id); it != g.or_edges.end())
      incoming.insert(it->second.begin(), it->second.end());
    for (const auto& c : node.preconditions) {
      if (c.kind != Condition::Kind::subgoal_achieved) continue;
      if (!g.has_node(c.subject))
        add("unknown-reference", c.subject,
            "precondition of '" + id + "' references unknown subgoal '" +
                c.subject + "'");
      else if (!incoming.count(c.subject))
        add("precondition-edge-mismatch", id,
            "precondition '" + c.subject + " achieved' of '" + id +
                "' has no matching incoming edge");
    }
  }

  if (auto cycle = find_cycle(g))
    add("cycle", *cycle, "dependency cycle: " + *cycle);

  for (const auto& [key, counter] : g.slots) {
    if (counter.planned < 0 || counter.achieved < 0 ||
        counter.achieved > counter.planned)
      add("counter-invalid", slot_to_string(key),
          "counter of " + slot_to_string(key) + " violates 0 <= achieved <= planned");
  }
  return rep;
}

std::map<SubgoalId, int> node_depths(const SubgoalGraph& g) {
  std::map<SubgoalId, int> depth;
  std::map<SubgoalId, int> state;  // 0 new, 1 visiting, 2 done

  std::function<int(const SubgoalId&)> rec = [&](const SubgoalId& v) -> int {
    if (!g.has_node(v)) throw PreconditionError("depth of unknown subgoal '" + v + "'");
    if (state[v] == 2) return depth[v];
    if (state[v] == 1) throw PreconditionError("dependency cycle through '" + v + "'");
    state[v] = 1;
    int d = 0;
    if (!g.roots.count(v)) {
      const std::vector<SubgoalId>* sources = nullptr;
      if (auto it = g.and_groups.find(v); it != g.and_groups.end())
        sources = &it->second;
      else if (auto it2 = g.or_edges.find(v); it2 != g.or_edges.end())
        sources = &it2->second;
      if (!sources || sources->empty())
        throw PreconditionError("non-root subgoal '" + v + "' has no incoming edges");
      for (const auto& s : *sources) d = std::max(d, rec(s) + 1);
    }
    state[v] = 2;
    depth[v] = d;
    return d;
  };

  for (const auto& [id, _] : g.nodes) rec(id);
  return depth;
}

bool structure_equal(const SubgoalGraph& a, const SubgoalGraph& b) {
  if (a.node_ids() != b.node_ids()) return false;
  if (a.roots != b.roots) return false;
  if (a.and_groups != b.and_groups) return false;
  return a.or_edges == b.or_edges;
}

std::vector<DetailRecord> subgoal_details(const SubgoalGraph& g,
                                          const std::vector<SubgoalId>& ids,
                                          int hops) {
  if (hops < 0) throw PreconditionError("subgoal_details: hops must be >= 0");
  for (const auto& id : ids)
    if (!g.has_node(id))
      throw PreconditionError("subgoal_details: unknown subgoal '" + id + "'");

  std::map<SubgoalId, std::vector<SubgoalId>> fwd, bwd;
  auto connect = [&](const SubgoalId& s, const SubgoalId& t) {
    fwd[s].push_back(t);
    bwd[t].push_back(s);
  };
  for (const auto& [t, sources] : g.and_groups)
    for (const auto& s : sources)
      if (g.has_node(s)) connect(s, t);
  for (const auto& [t, sources] : g.or_edges)
    for (const auto& s : sources)
      if (g.has_node(s)) connect(s, t);

  std::set<SubgoalId> selected(ids.begin(), ids.end());
  std::set<SubgoalId> frontier = selected;
  for (int h = 0; h < hops; ++h) {
    std::set<SubgoalId> next;
    for (const auto& v : frontier) {
      for (const auto& w : fwd[v])
        if (!selected.count(w)) next.insert(w);
      for (const auto& w : bwd[v])
        if (!selected.count(w)) next.insert(w);
    }
    if (next.empty()) break;
    selected.insert(next.begin(), next.end());
    frontier = std::move(next);
  }

  std::vector<DetailRecord> out;
  for (const auto& id : selected) {  // std::set iterates sorted
    const SubgoalNode& node = g.nodes.at(id);
    DetailRecord rec;
    rec.id = id;
    rec.description = node.description;
    rec.preconditions = node.preconditions;
    rec.postconditions = node.postconditions;
    rec.notes = node.notes;
    rec.forward = sorted_unique(fwd[id]);
    rec.backward = sorted_unique(bwd[id]);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string render_condition(const Condition& c) {
  if (c.kind == Condition::Kind::subgoal_achieved) return c.subject + " achieved";
  return c.subject + " >= " + std::to_string(c.count) + " in inventory";
}

std::string render_state_change(const StateChangeSpec& s) {
  switch (s.kind) {
    case StateChangeSpec::Kind::appear: return s.object + " appears";
    case StateChangeSpec::Kind::disappear: return s.object + " disappears";
    case StateChangeSpec::Kind::delta:
      return s.object + " " + (s.amount > 0 ? "+" : "") + std::to_string(s.amount);
  }
  return "?";
}

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string render_details(const std::vector<DetailRecord>& records) {
  std::vector<std::string> lines;
  for (const auto& r : records) {
    std::string line = r.id + ": " + r.description;
    std::vector<std::string> conds;
    for (const auto& c : r.preconditions) conds.push_back(render_condition(c));
    line += " Requires: " + (conds.empty() ? "none" : join(conds, ", ")) + ".";
    std::vector<std::string> effects;
    for (const auto& s : r.postconditions) effects.push_back(render_state_change(s));
    line += " Effects: " + (effects.empty() ? "none" : join(effects, ", ")) + ".";
    if (!r.backward.empty()) line += " Depends on: " + join(r.backward, ", ") + ".";
    if (!r.forward.empty()) line += " Unlocks: " + join(r.forward, ", ") + ".";
    if (!r.notes.empty()) line += " Note: " + r.notes;
    lines.push_back(line);
  }
  return lines.empty() ? "none" : join(lines, "\n");
}

}  // namespace craftplan
