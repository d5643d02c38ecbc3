#include "craftplan/observation.hpp"

#include <algorithm>
#include <sstream>

#include "craftplan/error.hpp"

namespace craftplan {

namespace {

std::string join_list(const std::vector<std::string>& parts) {
  if (parts.empty()) return "none";
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_list(const std::string& body, int line_no) {
  std::vector<std::string> out;
  if (body == "none") return out;
  std::string cur;
  std::istringstream is(body);
  while (std::getline(is, cur, ',')) {
    size_t b = cur.find_first_not_of(' ');
    size_t e = cur.find_last_not_of(' ');
    if (b == std::string::npos)
      throw ParseError("empty list item", line_no);
    out.push_back(cur.substr(b, e - b + 1));
  }
  if (body.empty() || body.back() == ',')
    throw ParseError("trailing comma", line_no);
  return out;
}

std::string expect_prefix(const std::string& line, const std::string& prefix,
                          int line_no) {
  if (line.rfind(prefix, 0) != 0)
    throw ParseError("expected '" + prefix + "...'", line_no);
  return line.substr(prefix.size());
}

int parse_count(const std::string& s, int line_no) {
  if (s.empty()) throw ParseError("missing number", line_no);
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("bad number '" + s + "'", line_no);
  }
  if (pos != s.size() || v < 0)
    throw ParseError("bad number '" + s + "'", line_no);
  return v;
}

}  // namespace

std::string render_observation(const TextObservation& obs) {
  std::ostringstream os;
  std::vector<std::string> vis = obs.visible;
  std::sort(vis.begin(), vis.end());
  os << "You see: " << join_list(vis) << "\n";

  std::vector<std::string> inv;
  for (const auto& [name, count] : obs.inventory)
    inv.push_back(name + " x" + std::to_string(count));
  os << "Inventory: " << join_list(inv) << "\n";

  os << "Vitals: health " << obs.health << ", food " << obs.food << ", drink "
     << obs.drink << ", energy " << obs.energy << "\n";

  std::vector<std::string> st(obs.status.begin(), obs.status.end());
  os << "Status: " << join_list(st);
  return os.str();
}

TextObservation parse_observation(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::string body = text;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r'))
      body.pop_back();
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }
  if (lines.size() != 4)
    throw ParseError("observation must have exactly 4 lines, got " +
                         std::to_string(lines.size()),
                     static_cast<int>(lines.size()));

  TextObservation obs;
  obs.visible = split_list(expect_prefix(lines[0], "You see: ", 1), 1);
  std::sort(obs.visible.begin(), obs.visible.end());

  for (const std::string& item : split_list(expect_prefix(lines[1], "Inventory: ", 2), 2)) {
    size_t sp = item.rfind(" x");
    if (sp == std::string::npos || sp == 0)
      throw ParseError("inventory item must be 'name xN', got '" + item + "'", 2);
    std::string name = item.substr(0, sp);
    int count = parse_count(item.substr(sp + 2), 2);
    if (obs.inventory.count(name))
      throw ParseError("duplicate inventory item '" + name + "'", 2);
    obs.inventory[name] = count;
  }

  {
    std::string body = expect_prefix(lines[2], "Vitals: ", 3);
    std::vector<std::string> parts = split_list(body, 3);
    const char* names[4] = {"health", "food", "drink", "energy"};
    int* dests[4] = {&obs.health, &obs.food, &obs.drink, &obs.energy};
    if (parts.size() != 4)
      throw ParseError("vitals must list health, food, drink, energy", 3);
    for (int i = 0; i < 4; ++i) {
      std::string want = std::string(names[i]) + " ";
      if (parts[i].rfind(want, 0) != 0)
        throw ParseError("expected vital '" + std::string(names[i]) + "'", 3);
      *dests[i] = parse_count(parts[i].substr(want.size()), 3);
    }
  }

  for (const std::string& flag : split_list(expect_prefix(lines[3], "Status: ", 4), 4))
    obs.status.insert(flag);
  return obs;
}

ObjectSnapshot extract_objects(const TextObservation& obs) {
  ObjectSnapshot snap;
  for (const auto& name : obs.visible) snap[name] += 1;
  for (const auto& [name, count] : obs.inventory) snap[name] += count;
  snap["health"] += obs.health;
  snap["food"] += obs.food;
  snap["drink"] += obs.drink;
  snap["energy"] += obs.energy;
  return snap;
}

StateDelta diff(const ObjectSnapshot& prev, const ObjectSnapshot& curr) {
  StateDelta d;
  for (const auto& [key, value] : curr) {
    auto it = prev.find(key);
    if (it == prev.end()) {
      d.appeared.insert(key);
    } else if (value != it->second) {
      d.changed[key] = value - it->second;
    }
  }
  for (const auto& [key, _] : prev)
    if (!curr.count(key)) d.disappeared.insert(key);
  return d;
}

}  // namespace craftplan
