#include "craftplan/agent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include "craftplan/error.hpp"
#include "craftplan/rng.hpp"

namespace craftplan {

namespace {

struct Cell {
  int x, y;
};

const int kDirDx[4] = {0, 0, -1, 1};  // N, S, W, E (matches move actions)
const int kDirDy[4] = {-1, 1, 0, 0};

Action move_action(int dir) { return static_cast<Action>(dir); }

Facing dir_facing(int dir) {
  static const Facing f[4] = {Facing::north, Facing::south, Facing::west,
                              Facing::east};
  return f[dir];
}

bool walkable(const GridCraft& w, int x, int y) {
  if (x < 0 || x >= w.width() || y < 0 || y >= w.height()) return false;
  if (!tile_passable(w.tile_at(x, y))) return false;
  for (const Creature& c : w.creatures())
    if (c.alive && c.x == x && c.y == y) return false;
  return true;
}

const Creature* creature_on(const GridCraft& w, int x, int y) {
  for (const Creature& c : w.creatures())
    if (c.alive && c.x == x && c.y == y) return &c;
  return nullptr;
}

// BFS from the agent over walkable cells. Returns the first move toward the
// nearest cell satisfying `goal`, or nullopt when the agent already stands
// on one (at_goal=true) or none is reachable. Neighbor order N,S,W,E pins
// ties.
std::optional<Action> bfs_step(const GridCraft& w,
                               const std::function<bool(int, int)>& goal,
                               bool* at_goal = nullptr) {
  if (at_goal) *at_goal = false;
  int ax = w.agent_x(), ay = w.agent_y();
  if (goal(ax, ay)) {
    if (at_goal) *at_goal = true;
    return std::nullopt;
  }
  std::vector<int> first_dir(w.width() * w.height(), -1);
  std::vector<bool> seen(w.width() * w.height(), false);
  auto id = [&](int x, int y) { return y * w.width() + x; };
  std::deque<Cell> queue;
  seen[id(ax, ay)] = true;
  queue.push_back({ax, ay});
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      int nx = c.x + kDirDx[d], ny = c.y + kDirDy[d];
      if (nx < 0 || nx >= w.width() || ny < 0 || ny >= w.height()) continue;
      if (seen[id(nx, ny)]) continue;
      if (!walkable(w, nx, ny)) continue;
      seen[id(nx, ny)] = true;
      int fd = first_dir[id(c.x, c.y)] == -1 ? d : first_dir[id(c.x, c.y)];
      first_dir[id(nx, ny)] = fd;
      if (goal(nx, ny)) return move_action(fd);
      queue.push_back({nx, ny});
    }
  }
  return std::nullopt;
}

// Reachable-cell flood fill (agent cell included).
std::vector<bool> reachable_cells(const GridCraft& w) {
  std::vector<bool> seen(w.width() * w.height(), false);
  auto id = [&](int x, int y) { return y * w.width() + x; };
  std::deque<Cell> queue;
  seen[id(w.agent_x(), w.agent_y())] = true;
  queue.push_back({w.agent_x(), w.agent_y()});
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      int nx = c.x + kDirDx[d], ny = c.y + kDirDy[d];
      if (nx < 0 || nx >= w.width() || ny < 0 || ny >= w.height()) continue;
      if (seen[id(nx, ny)] || !walkable(w, nx, ny)) continue;
      seen[id(nx, ny)] = true;
      queue.push_back({nx, ny});
    }
  }
  return seen;
}

int inv_count(const GridCraft& w, const std::string& item) {
  auto it = w.inventory().find(item);
  return it == w.inventory().end() ? 0 : it->second;
}

int pick_tier(const GridCraft& w) {
  if (inv_count(w, "iron_pickaxe") > 0) return 3;
  if (inv_count(w, "stone_pickaxe") > 0) return 2;
  if (inv_count(w, "wood_pickaxe") > 0) return 1;
  return 0;
}

bool tile_in(Tile t, const std::vector<Tile>& set) {
  return std::find(set.begin(), set.end(), t) != set.end();
}

bool world_has_tile(const GridCraft& w, Tile t) {
  for (int y = 0; y < w.height(); ++y)
    for (int x = 0; x < w.width(); ++x)
      if (w.tile_at(x, y) == t) return true;
  return false;
}

// Face the orthogonal neighbor in direction `d`, or act on it when already
// faced. Facing uses the move action (turn-then-move semantics).
Action face_or(const GridCraft& w, int d, Action when_faced) {
  if (w.facing() == dir_facing(d)) return when_faced;
  return move_action(d);
}

// Walk to, face, and `interact` with the nearest tile of the wanted kinds.
std::optional<Action> seek_tiles(const GridCraft& w, const std::vector<Tile>& kinds,
                                 Action when_faced = Action::interact) {
  int ax = w.agent_x(), ay = w.agent_y();
  for (int d = 0; d < 4; ++d) {
    int nx = ax + kDirDx[d], ny = ay + kDirDy[d];
    if (nx < 0 || nx >= w.width() || ny < 0 || ny >= w.height()) continue;
    if (creature_on(w, nx, ny)) continue;
    if (tile_in(w.tile_at(nx, ny), kinds)) return face_or(w, d, when_faced);
  }
  auto goal = [&](int x, int y) {
    for (int d = 0; d < 4; ++d) {
      int nx = x + kDirDx[d], ny = y + kDirDy[d];
      if (nx < 0 || nx >= w.width() || ny < 0 || ny >= w.height()) continue;
      if (creature_on(w, nx, ny)) continue;
      if (tile_in(w.tile_at(nx, ny), kinds)) return true;
    }
    return false;
  };
  return bfs_step(w, goal);
}

// Walk to and attack the nearest creature of `kind`.
std::optional<Action> seek_creature(const GridCraft& w, const std::string& kind) {
  bool exists = false;
  for (const Creature& c : w.creatures())
    if (c.alive && c.kind == kind) exists = true;
  if (!exists) return std::nullopt;

  int ax = w.agent_x(), ay = w.agent_y();
  for (int d = 0; d < 4; ++d) {
    const Creature* c = creature_on(w, ax + kDirDx[d], ay + kDirDy[d]);
    if (c && c->kind == kind) return face_or(w, d, Action::interact);
  }
  auto goal = [&](int x, int y) {
    for (int d = 0; d < 4; ++d) {
      const Creature* c = creature_on(w, x + kDirDx[d], y + kDirDy[d]);
      if (c && c->kind == kind) return true;
    }
    return false;
  };
  auto step = bfs_step(w, goal);
  if (step) return step;
  return Action::noop;  // unreachable right now; wait (creatures move)
}

bool placeable_tile(const std::string& kind, Tile t) {
  if (kind == "plant") return t == Tile::grass;
  if (kind == "stone")
    return t == Tile::grass || t == Tile::sand || t == Tile::path || t == Tile::water;
  return t == Tile::grass || t == Tile::sand || t == Tile::path;
}

// Walk somewhere a `kind` can be placed and place it. Furnaces prefer spots
// near an existing table so one cell can reach both stations.
std::optional<Action> seek_place(const GridCraft& w, const std::string& kind,
                                 Action place_action) {
  std::vector<Cell> tables;
  if (kind == "furnace") {
    for (int y = 0; y < w.height(); ++y)
      for (int x = 0; x < w.width(); ++x)
        if (w.tile_at(x, y) == Tile::table) tables.push_back({x, y});
  }
  auto target_ok = [&](int x, int y, bool near_table) {
    if (x < 0 || x >= w.width() || y < 0 || y >= w.height()) return false;
    if (creature_on(w, x, y)) return false;
    if (x == w.agent_x() && y == w.agent_y()) return false;
    if (!placeable_tile(kind, w.tile_at(x, y))) return false;
    if (near_table && !tables.empty()) {
      for (const Cell& t : tables)
        if (std::max(std::abs(x - t.x), std::abs(y - t.y)) <= 2) return true;
      return false;
    }
    return true;
  };
  for (int restrict = tables.empty() ? 0 : 1; restrict >= 0; --restrict) {
    bool near = restrict == 1;
    int ax = w.agent_x(), ay = w.agent_y();
    for (int d = 0; d < 4; ++d)
      if (target_ok(ax + kDirDx[d], ay + kDirDy[d], near))
        return face_or(w, d, place_action);
    auto goal = [&](int x, int y) {
      for (int d = 0; d < 4; ++d)
        if (target_ok(x + kDirDx[d], y + kDirDy[d], near)) return true;
      return false;
    };
    if (auto step = bfs_step(w, goal)) return step;
  }
  return std::nullopt;
}

// Walk to a cell that reaches all stations (Chebyshev 1) and craft.
std::optional<Action> seek_craft(const GridCraft& w,
                                 const std::vector<std::string>& stations,
                                 Action craft_action) {
  auto spot_ok = [&](int x, int y) {
    for (const std::string& st : stations) {
      Tile want = st == "table" ? Tile::table : Tile::furnace;
      bool found = false;
      for (int dy = -1; dy <= 1 && !found; ++dy)
        for (int dx = -1; dx <= 1 && !found; ++dx) {
          int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w.width() || ny < 0 || ny >= w.height()) continue;
          if (w.tile_at(nx, ny) == want) found = true;
        }
      if (!found) return false;
    }
    return true;
  };
  bool at_goal = false;
  auto step = bfs_step(w, spot_ok, &at_goal);
  if (at_goal) return craft_action;
  return step;
}

// The wanted ore is walled in: mine the reachable stone tile closest to it.
std::optional<Action> excavate_toward(const GridCraft& w, Tile ore) {
  std::vector<Cell> ores;
  for (int y = 0; y < w.height(); ++y)
    for (int x = 0; x < w.width(); ++x)
      if (w.tile_at(x, y) == ore) ores.push_back({x, y});
  if (ores.empty()) return std::nullopt;

  std::vector<bool> reach = reachable_cells(w);
  auto rid = [&](int x, int y) { return y * w.width() + x; };
  std::optional<Cell> best;
  long best_key = 0;
  for (int y = 0; y < w.height(); ++y) {
    for (int x = 0; x < w.width(); ++x) {
      Tile t = w.tile_at(x, y);
      if (t != Tile::stone && t != Tile::placed_stone) continue;
      bool adjacent_reach = false;
      for (int d = 0; d < 4 && !adjacent_reach; ++d) {
        int nx = x + kDirDx[d], ny = y + kDirDy[d];
        if (nx >= 0 && nx < w.width() && ny >= 0 && ny < w.height() &&
            reach[rid(nx, ny)])
          adjacent_reach = true;
      }
      if (!adjacent_reach) continue;
      long dist = 1000;
      for (const Cell& o : ores)
        dist = std::min<long>(dist, std::abs(o.x - x) + std::abs(o.y - y));
      long key = dist * 10000 + y * 100 + x;
      if (!best || key < best_key) {
        best = Cell{x, y};
        best_key = key;
      }
    }
  }
  if (!best) return std::nullopt;
  // interact with exactly that stone cell
  int ax = w.agent_x(), ay = w.agent_y();
  for (int d = 0; d < 4; ++d)
    if (ax + kDirDx[d] == best->x && ay + kDirDy[d] == best->y)
      return face_or(w, d, Action::interact);
  auto goal = [&](int x, int y) {
    for (int d = 0; d < 4; ++d)
      if (x + kDirDx[d] == best->x && y + kDirDy[d] == best->y) return true;
    return false;
  };
  return bfs_step(w, goal);
}

Action craft_action_for(const std::string& item) {
  if (item == "wood_pickaxe") return Action::craft_wood_pickaxe;
  if (item == "wood_sword") return Action::craft_wood_sword;
  if (item == "stone_pickaxe") return Action::craft_stone_pickaxe;
  if (item == "stone_sword") return Action::craft_stone_sword;
  if (item == "iron_pickaxe") return Action::craft_iron_pickaxe;
  if (item == "iron_sword") return Action::craft_iron_sword;
  throw PreconditionError("no craft action for item '" + item + "'");
}

Action place_action_for(const std::string& kind) {
  if (kind == "table") return Action::place_table;
  if (kind == "furnace") return Action::place_furnace;
  if (kind == "stone") return Action::place_stone;
  if (kind == "plant") return Action::place_plant;
  throw PreconditionError("no place action for '" + kind + "'");
}

std::string collector_for(const std::string& item) {
  if (item == "wood") return "collect_wood";
  if (item == "stone") return "collect_stone";
  if (item == "coal") return "collect_coal";
  if (item == "iron") return "collect_iron";
  if (item == "sapling") return "collect_sapling";
  return "";
}

// One primitive action toward `sg` assuming its immediate preconditions
// hold; noop otherwise. The shallow core shared by both policies.
Action shallow_step(const GridCraft& w, const std::string& sg) {
  auto or_noop = [](std::optional<Action> a) { return a.value_or(Action::noop); };

  if (sg == "collect_wood") return or_noop(seek_tiles(w, {Tile::tree}));
  if (sg == "collect_sapling") return or_noop(seek_tiles(w, {Tile::grass}));
  if (sg == "collect_water") return or_noop(seek_tiles(w, {Tile::water}));
  if (sg == "collect_stone") {
    if (pick_tier(w) < 1) return Action::noop;
    return or_noop(seek_tiles(w, {Tile::stone, Tile::placed_stone}));
  }
  if (sg == "collect_coal" || sg == "collect_iron" || sg == "collect_diamond") {
    Tile ore = sg == "collect_coal" ? Tile::coal
               : sg == "collect_iron" ? Tile::iron : Tile::diamond;
    int need = sg == "collect_coal" ? 1 : sg == "collect_iron" ? 2 : 3;
    if (pick_tier(w) < need) return Action::noop;
    if (auto a = seek_tiles(w, {ore})) return *a;
    return or_noop(excavate_toward(w, ore));
  }
  if (sg.rfind("place_", 0) == 0) {
    std::string kind = sg.substr(6);
    std::string item = kind == "table" ? "wood"
                       : kind == "plant" ? "sapling" : "stone";
    int cost = w.config().place_costs.at(kind);
    if (inv_count(w, item) < cost) return Action::noop;
    return or_noop(seek_place(w, kind, place_action_for(kind)));
  }
  if (sg.rfind("make_", 0) == 0) {
    std::string item = sg.substr(5);
    auto rit = w.config().recipes.find(item);
    if (rit == w.config().recipes.end()) return Action::noop;
    for (const std::string& st : rit->second.stations) {
      Tile t = st == "table" ? Tile::table : Tile::furnace;
      if (!world_has_tile(w, t)) return Action::noop;
    }
    for (const auto& [input, count] : rit->second.inputs)
      if (inv_count(w, input) < count) return Action::noop;
    return or_noop(seek_craft(w, rit->second.stations, craft_action_for(item)));
  }
  if (sg == "eat_cow") return or_noop(seek_creature(w, "cow"));
  if (sg == "defeat_zombie") return or_noop(seek_creature(w, "zombie"));
  if (sg == "defeat_skeleton") return or_noop(seek_creature(w, "skeleton"));
  if (sg == "eat_plant") {
    if (w.plant_ripe_exists())
      return or_noop(seek_tiles(w, {Tile::plant_ripe}));
    if (w.plant_exists()) {
      // wait beside the young plant until it ripens
      auto a = seek_tiles(w, {Tile::plant_young}, Action::noop);
      return a.value_or(Action::noop);
    }
    return Action::noop;
  }
  if (sg == "sleep") return w.is_night() ? Action::sleep : Action::noop;
  return Action::noop;
}

// Backward chaining: recurse into the first unmet prerequisite.
Action resolve(const GridCraft& w, const std::string& sg, int depth) {
  if (depth > 8) return Action::noop;

  if (sg == "collect_stone" && pick_tier(w) < 1)
    return resolve(w, "make_wood_pickaxe", depth + 1);
  if (sg == "collect_coal" && pick_tier(w) < 1)
    return resolve(w, "make_wood_pickaxe", depth + 1);
  if (sg == "collect_iron" && pick_tier(w) < 2)
    return resolve(w, "make_stone_pickaxe", depth + 1);
  if (sg == "collect_diamond" && pick_tier(w) < 3)
    return resolve(w, "make_iron_pickaxe", depth + 1);

  if (sg.rfind("place_", 0) == 0) {
    std::string kind = sg.substr(6);
    std::string item = kind == "table" ? "wood"
                       : kind == "plant" ? "sapling" : "stone";
    int cost = w.config().place_costs.at(kind);
    if (inv_count(w, item) < cost)
      return resolve(w, collector_for(item), depth + 1);
  }
  if (sg.rfind("make_", 0) == 0) {
    std::string item = sg.substr(5);
    auto rit = w.config().recipes.find(item);
    if (rit != w.config().recipes.end()) {
      for (const std::string& st : rit->second.stations) {
        Tile t = st == "table" ? Tile::table : Tile::furnace;
        if (!world_has_tile(w, t)) return resolve(w, "place_" + st, depth + 1);
      }
      for (const auto& [input, count] : rit->second.inputs)
        if (inv_count(w, input) < count)
          return resolve(w, collector_for(input), depth + 1);
    }
  }
  if (sg == "eat_plant" && !w.plant_exists() && !w.plant_ripe_exists())
    return resolve(w, "place_plant", depth + 1);

  return shallow_step(w, sg);
}

}  // namespace

// --- RandomPolicy ---

Action RandomPolicy::act(const PolicyContext& ctx) {
  (void)ctx;
  return static_cast<Action>(bounded_int(rng_, 0, kActionCount - 1));
}

// --- ScriptedPolicy ---

Action ScriptedPolicy::act(const PolicyContext& ctx) {
  // Progress by environment flags, not tracker detections: the tracker's
  // strict delta matching can miss repeats, and looping on a subgoal the
  // world already counts as done wastes the whole episode.
  const auto& unlocked = ctx.world.achievements();
  for (const auto& sg : ctx.plan) {
    auto it = unlocked.find(sg);
    if (it != unlocked.end() && it->second) continue;
    return resolve(ctx.world, sg, 0);
  }
  // Plan finished: fight back if a hostile stands in melee range, else idle.
  int ax = ctx.world.agent_x(), ay = ctx.world.agent_y();
  for (int d = 0; d < 4; ++d) {
    const Creature* c = creature_on(ctx.world, ax + kDirDx[d], ay + kDirDy[d]);
    if (c && c->kind != "cow") return face_or(ctx.world, d, Action::interact);
  }
  return Action::noop;
}

// --- TabularPolicy ---

TabularPolicy::TabularPolicy(const TabularConfig& cfg)
    : cfg_(cfg), rng_(derive_seed(cfg.seed, 0x7ab1e5ULL)) {}

int TabularPolicy::feature_state(const GridCraft& world) const {
  int wood = std::min(3, inv_count(world, "wood"));
  int table = world_has_tile(world, Tile::table) ? 1 : 0;
  return wood * 2 + table;
}

double TabularPolicy::epsilon() const {
  double frac = cfg_.eps_decay_steps <= 0
                    ? 1.0
                    : std::min(1.0, static_cast<double>(prim_steps_) /
                                        cfg_.eps_decay_steps);
  return cfg_.eps_start + frac * (cfg_.eps_end - cfg_.eps_start);
}

std::string TabularPolicy::select_target(int state,
                                         const std::vector<std::string>& targets,
                                         double eps) {
  if (targets.empty()) throw PreconditionError("select_target: no targets");
  if (unit_real(rng_) < eps)
    return targets[bounded_int(rng_, 0, static_cast<int>(targets.size()) - 1)];
  std::string best = targets.front();
  double best_q = -1e300;
  for (const auto& t : targets) {  // lexicographic order breaks ties
    auto it = q_.find({state, t});
    double q = it == q_.end() ? 0.0 : it->second;
    if (q > best_q) {
      best_q = q;
      best = t;
    }
  }
  return best;
}

std::vector<Action> TabularPolicy::compile_macro(const GridCraft& world,
                                                 const std::string& target) const {
  GridCraft sim = world;  // exact copy, own RNG stream included
  std::vector<Action> actions;
  for (int i = 0; i < cfg_.macro_budget; ++i) {
    if (sim.done()) break;
    Action a = shallow_step(sim, target);
    if (a == Action::noop && i == 0) return {Action::noop};
    actions.push_back(a);
    StepOutcome out = sim.step(a);
    if (std::find(out.unlocked.begin(), out.unlocked.end(), target) !=
        out.unlocked.end())
      break;
    if (a == Action::noop) break;  // stuck; stop early
  }
  if (actions.empty()) actions.push_back(Action::noop);
  return actions;
}

Action TabularPolicy::act(const PolicyContext& ctx) {
  if (macro_active_ && macro_pos_ >= macro_.size())
    finish_macro(ctx.world, false);
  if (!macro_active_) {
    macro_state_ = feature_state(ctx.world);
    const std::vector<std::string>& targets = GridCraft::achievement_names();
    macro_target_ = select_target(macro_state_, targets, epsilon());
    macro_ = compile_macro(ctx.world, macro_target_);
    macro_pos_ = 0;
    macro_reward_ = 0.0;
    macro_len_ = 0;
    macro_active_ = true;
  }
  return macro_[macro_pos_];
}

void TabularPolicy::observe(double reward, bool done) {
  if (!macro_active_) return;
  macro_reward_ += std::pow(cfg_.gamma, macro_len_) * reward;
  macro_len_ += 1;
  macro_pos_ += 1;
  prim_steps_ += 1;
  if (done) {
    td_update(macro_state_, macro_target_, macro_reward_, 0.0);  // terminal
    macro_active_ = false;
    macro_.clear();
    macro_pos_ = 0;
  }
}

void TabularPolicy::td_update(int state, const std::string& target,
                              double g_return, double bootstrap) {
  double& q = q_[{state, target}];
  q += cfg_.lr * (g_return + bootstrap - q);
}

void TabularPolicy::finish_macro(const GridCraft& world, bool done) {
  double best_next = 0.0;
  if (!done) {
    int s1 = feature_state(world);
    for (const auto& t : GridCraft::achievement_names()) {
      auto it = q_.find({s1, t});
      if (it != q_.end()) best_next = std::max(best_next, it->second);
    }
  }
  td_update(macro_state_, macro_target_, macro_reward_,
            std::pow(cfg_.gamma, macro_len_) * best_next);
  macro_active_ = false;
  macro_.clear();
  macro_pos_ = 0;
}

void TabularPolicy::begin_episode() {
  macro_active_ = false;
  macro_.clear();
  macro_pos_ = 0;
}

std::unique_ptr<Policy> make_policy(const std::string& kind, uint64_t seed,
                                    const TabularConfig& tab_cfg) {
  if (kind == "scripted") return std::make_unique<ScriptedPolicy>();
  if (kind == "random") return std::make_unique<RandomPolicy>(seed);
  if (kind == "tabular") {
    TabularConfig cfg = tab_cfg;
    cfg.seed = seed;
    return std::make_unique<TabularPolicy>(cfg);
  }
  throw SchemaError("unknown policy '" + kind + "'");
}

}  // namespace craftplan
