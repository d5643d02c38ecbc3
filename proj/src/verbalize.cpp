#include "craftplan/verbalize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "craftplan/error.hpp"

namespace craftplan {

namespace {

std::string weight_suffix(const SubgoalGraph& g, const SlotKey& key) {
  const Counter* c = g.find_slot(key);
  auto w = c ? c->weight() : std::nullopt;
  if (!w) return " (-%)";
  long pct = std::lround(*w * 100.0);
  return " (" + std::to_string(pct) + "%)";
}

struct Entry {
  SubgoalId target;
  std::string sources;  // joined, "" for roots
  std::string text;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strip an optional trailing " (NN%)" / " (-%)" weight annotation.
std::string strip_weight(const std::string& s, int line_no) {
  std::string t = trim(s);
  if (t.empty() || t.back() != ')') return t;
  size_t open = t.rfind('(');
  if (open == std::string::npos || open == 0)
    throw ParseError("unbalanced weight annotation in '" + t + "'", line_no);
  std::string inner = t.substr(open + 1, t.size() - open - 2);
  bool ok = inner == "-%";
  if (!ok && inner.size() >= 2 && inner.back() == '%') {
    ok = true;
    for (size_t i = 0; i + 1 < inner.size(); ++i)
      if (inner[i] < '0' || inner[i] > '9') ok = false;
  }
  if (!ok)
    throw ParseError("bad weight annotation '(" + inner + ")'", line_no);
  return trim(t.substr(0, open));
}

std::string parse_id(const std::string& raw, int line_no) {
  std::string id = trim(raw);
  if (!is_valid_subgoal_id(id))
    throw ParseError("invalid subgoal id '" + id + "'", line_no);
  return id;
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t hit = s.find(sep, pos);
    if (hit == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, hit - pos));
    pos = hit + sep.size();
  }
}

}  // namespace

std::string verbalize(const SubgoalGraph& g, const VerbalizeOptions& opts) {
  ValidationReport rep = validate_graph(g);
  if (!rep.ok())
    throw PreconditionError("verbalize requires a valid graph (" +
                            rep.findings.front().message + ")");
  if (g.nodes.empty()) throw PreconditionError("verbalize: empty graph");

  std::map<SubgoalId, int> depth = node_depths(g);

  std::map<int, std::vector<Entry>> layers;
  for (const auto& r : g.roots) {
    std::string text = r;
    if (opts.with_weights) text += weight_suffix(g, root_slot(r));
    layers[0].push_back({r, "", text});
  }
  for (const auto& [target, sources] : g.and_groups) {
    int layer = 0;
    std::string joined;
    for (const auto& s : sources) {  // sources stored sorted
      layer = std::max(layer, depth.at(s) + 1);
      if (!joined.empty()) joined += " & ";
      joined += s;
    }
    std::string text = joined + " -> " + target;
    if (opts.with_weights) text += weight_suffix(g, and_slot(target));
    layers[layer].push_back({target, joined, text});
  }
  for (const auto& [target, sources] : g.or_edges) {
    for (const auto& s : sources) {
      std::string text = s + " -> " + target;
      if (opts.with_weights) text += weight_suffix(g, or_slot(s, target));
      layers[depth.at(s) + 1].push_back({target, s, text});
    }
  }

  std::ostringstream os;
  bool first_line = true;
  for (auto& [layer, entries] : layers) {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return std::tie(a.target, a.sources) < std::tie(b.target, b.sources);
    });
    if (!first_line) os << "\n";
    first_line = false;
    for (size_t i = 0; i < entries.size(); ++i) {
      if (i) os << "; ";
      os << entries[i].text;
    }
  }
  return os.str();
}

SubgoalGraph parse_verbalized(const std::string& text) {
  std::vector<std::string> lines = split(text, "\n");
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty graph text", 1);

  SubgoalGraph g;
  auto ensure_node = [&](const SubgoalId& id) {
    if (!g.nodes.count(id)) {
      SubgoalNode n;
      n.id = id;
      g.nodes[id] = std::move(n);
    }
  };

  for (size_t li = 0; li < lines.size(); ++li) {
    int line_no = static_cast<int>(li) + 1;
    std::string line = trim(lines[li]);
    if (line.empty())
      throw ParseError("blank layer line", line_no);
    for (const std::string& raw_entry : split(line, ";")) {
      std::string entry = strip_weight(trim(raw_entry), line_no);
      if (entry.empty()) throw ParseError("empty entry", line_no);
      size_t arrow = entry.find("->");
      if (li == 0) {
        if (arrow != std::string::npos)
          throw ParseError("root layer cannot contain edges", line_no);
        SubgoalId id = parse_id(entry, line_no);
        if (g.roots.count(id))
          throw ParseError("duplicate root '" + id + "'", line_no);
        g.roots.insert(id);
        ensure_node(id);
        continue;
      }
      if (arrow == std::string::npos)
        throw ParseError("expected 'sources -> target' in '" + entry + "'", line_no);
      SubgoalId target = parse_id(entry.substr(arrow + 2), line_no);
      std::string lhs = entry.substr(0, arrow);
      std::vector<SubgoalId> sources;
      for (const std::string& tok : split(lhs, "&"))
        sources.push_back(parse_id(tok, line_no));
      ensure_node(target);
      for (const auto& s : sources) ensure_node(s);

      if (sources.size() >= 2) {
        std::vector<SubgoalId> sorted = sources;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
          throw ParseError("duplicate source in AND group of '" + target + "'",
                           line_no);
        if (g.or_edges.count(target))
          throw ParseError("'" + target + "' mixes AND and OR dependencies",
                           line_no);
        auto it = g.and_groups.find(target);
        if (it != g.and_groups.end() && it->second != sorted)
          throw ParseError("conflicting AND groups for '" + target + "'", line_no);
        if (it != g.and_groups.end())
          throw ParseError("repeated AND group for '" + target + "'", line_no);
        g.and_groups[target] = sorted;
      } else {
        const SubgoalId& s = sources[0];
        if (g.and_groups.count(target))
          throw ParseError("'" + target + "' mixes AND and OR dependencies",
                           line_no);
        auto& alts = g.or_edges[target];
        if (std::find(alts.begin(), alts.end(), s) != alts.end())
          throw ParseError("duplicate edge '" + s + " -> " + target + "'", line_no);
        alts.push_back(s);
      }
    }
  }
  for (auto& [_, alts] : g.or_edges) std::sort(alts.begin(), alts.end());
  init_slots(g);
  return g;
}

}  // namespace craftplan
