#include "craftplan/gridcraft.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "craftplan/error.hpp"
#include "craftplan/rng.hpp"

namespace craftplan {

namespace {

const char* kTileNames[] = {
    "grass", "sand", "path", "water", "tree", "stone", "coal", "iron",
    "diamond", "table", "furnace", "plant_young", "plant_ripe", "placed_stone"};

struct PlaceSpec {
  std::string cost_item;
  Tile tile;
  bool on_water;   // may target water (placing stone fills it)
  bool grass_only;
};

const std::map<std::string, PlaceSpec>& place_specs() {
  static const std::map<std::string, PlaceSpec> specs = {
      {"table", {"wood", Tile::table, false, false}},
      {"furnace", {"stone", Tile::furnace, false, false}},
      {"stone", {"stone", Tile::placed_stone, true, false}},
      {"plant", {"sapling", Tile::plant_young, false, true}},
  };
  return specs;
}

// Minimum pickaxe tier per ore tile.
int mine_tier(Tile t) {
  switch (t) {
    case Tile::stone:
    case Tile::placed_stone:
    case Tile::coal: return 1;
    case Tile::iron: return 2;
    case Tile::diamond: return 3;
    default: return 0;
  }
}

}  // namespace

std::string tile_name(Tile t) { return kTileNames[static_cast<int>(t)]; }

bool tile_passable(Tile t) {
  return t == Tile::grass || t == Tile::sand || t == Tile::path;
}

std::string tile_visible_name(Tile t) {
  switch (t) {
    case Tile::grass:
    case Tile::sand:
    case Tile::path: return "";
    case Tile::plant_young:
    case Tile::plant_ripe: return "plant";
    default: return tile_name(t);
  }
}

std::string action_name(Action a) {
  static const char* names[] = {
      "move_north", "move_south", "move_west", "move_east", "interact",
      "place_table", "place_furnace", "place_stone", "place_plant",
      "craft_wood_pickaxe", "craft_wood_sword", "craft_stone_pickaxe",
      "craft_stone_sword", "craft_iron_pickaxe", "craft_iron_sword",
      "sleep", "noop"};
  return names[static_cast<int>(a)];
}

Action action_from_string(const std::string& s) {
  for (int i = 0; i < kActionCount; ++i)
    if (action_name(static_cast<Action>(i)) == s) return static_cast<Action>(i);
  throw SchemaError("unknown action '" + s + "'");
}

WorldConfig WorldConfig::defaults() {
  WorldConfig c;
  c.recipes = {
      {"wood_pickaxe", {{{"wood", 1}}, {"table"}}},
      {"wood_sword", {{{"wood", 1}}, {"table"}}},
      {"stone_pickaxe", {{{"wood", 1}, {"stone", 1}}, {"table"}}},
      {"stone_sword", {{{"wood", 1}, {"stone", 1}}, {"table"}}},
      {"iron_pickaxe", {{{"wood", 1}, {"coal", 1}, {"iron", 1}}, {"table", "furnace"}}},
      {"iron_sword", {{{"wood", 1}, {"coal", 1}, {"iron", 1}}, {"table", "furnace"}}},
  };
  c.place_costs = {{"table", 2}, {"furnace", 2}, {"stone", 1}, {"plant", 1}};
  return c;
}

WorldConfig world_config_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("world: config must be an object");
  WorldConfig c = WorldConfig::defaults();
  auto get_int = [&](const char* key, int& dest) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer())
      throw SchemaError(std::string("world: ") + key + " must be an integer");
    dest = j[key].get<int>();
  };
  get_int("width", c.width);
  get_int("height", c.height);
  get_int("view_width", c.view_width);
  get_int("view_height", c.view_height);
  get_int("episode_cap", c.episode_cap);
  get_int("day_length", c.day_length);
  get_int("night_start", c.night_start);
  get_int("tree_count", c.tree_count);
  get_int("coal_count", c.coal_count);
  get_int("iron_count", c.iron_count);
  get_int("diamond_count", c.diamond_count);
  get_int("cow_count", c.cow_count);
  get_int("skeleton_count", c.skeleton_count);
  get_int("zombie_cap", c.zombie_cap);
  get_int("plant_ripen_steps", c.plant_ripen_steps);
  get_int("food_decay_every", c.food_decay_every);
  get_int("drink_decay_every", c.drink_decay_every);
  get_int("energy_decay_every", c.energy_decay_every);
  get_int("regen_every", c.regen_every);
  get_int("food_from_cow", c.food_from_cow);
  get_int("food_from_plant", c.food_from_plant);
  get_int("hostile_attack", c.hostile_attack);
  get_int("hostile_aggro_radius", c.hostile_aggro_radius);
  if (j.contains("sapling_prob")) {
    if (!j["sapling_prob"].is_number())
      throw SchemaError("world: sapling_prob must be a number");
    c.sapling_prob = j["sapling_prob"].get<double>();
  }
  if (j.contains("creature_hp"))
    c.creature_hp = j["creature_hp"].get<std::map<std::string, int>>();
  if (j.contains("sword_damage"))
    c.sword_damage = j["sword_damage"].get<std::map<std::string, int>>();
  if (j.contains("place_costs"))
    c.place_costs = j["place_costs"].get<std::map<std::string, int>>();
  if (j.contains("recipes")) {
    c.recipes.clear();
    for (const auto& [item, rj] : j["recipes"].items()) {
      Recipe r;
      r.inputs = require_field(rj, "inputs", "recipe").get<std::map<std::string, int>>();
      r.stations = require_field(rj, "stations", "recipe").get<std::vector<std::string>>();
      c.recipes[item] = std::move(r);
    }
  }
  return c;
}

json world_config_to_json(const WorldConfig& c) {
  json j;
  j["width"] = c.width;
  j["height"] = c.height;
  j["view_width"] = c.view_width;
  j["view_height"] = c.view_height;
  j["episode_cap"] = c.episode_cap;
  j["day_length"] = c.day_length;
  j["night_start"] = c.night_start;
  j["tree_count"] = c.tree_count;
  j["coal_count"] = c.coal_count;
  j["iron_count"] = c.iron_count;
  j["diamond_count"] = c.diamond_count;
  j["cow_count"] = c.cow_count;
  j["skeleton_count"] = c.skeleton_count;
  j["zombie_cap"] = c.zombie_cap;
  j["sapling_prob"] = c.sapling_prob;
  j["plant_ripen_steps"] = c.plant_ripen_steps;
  j["food_decay_every"] = c.food_decay_every;
  j["drink_decay_every"] = c.drink_decay_every;
  j["energy_decay_every"] = c.energy_decay_every;
  j["regen_every"] = c.regen_every;
  j["creature_hp"] = c.creature_hp;
  j["sword_damage"] = c.sword_damage;
  j["food_from_cow"] = c.food_from_cow;
  j["food_from_plant"] = c.food_from_plant;
  j["hostile_attack"] = c.hostile_attack;
  j["hostile_aggro_radius"] = c.hostile_aggro_radius;
  json recipes;
  for (const auto& [item, r] : c.recipes)
    recipes[item] = {{"inputs", r.inputs}, {"stations", r.stations}};
  j["recipes"] = recipes;
  j["place_costs"] = c.place_costs;
  return j;
}

const std::vector<std::string>& GridCraft::achievement_names() {
  static const std::vector<std::string> names = {
      "collect_coal", "collect_diamond", "collect_iron", "collect_sapling",
      "collect_stone", "collect_water", "collect_wood", "defeat_skeleton",
      "defeat_zombie", "eat_cow", "eat_plant", "make_iron_pickaxe",
      "make_iron_sword", "make_stone_pickaxe", "make_stone_sword",
      "make_wood_pickaxe", "make_wood_sword", "place_furnace", "place_plant",
      "place_stone", "place_table", "sleep"};
  return names;
}

GridCraft::GridCraft(const WorldConfig& cfg) : cfg_(cfg) { validate_config(); }

void GridCraft::validate_config() const {
  const WorldConfig& c = cfg_;
  if (c.width < 12 || c.height < 8)
    throw SchemaError("world config: grid too small (need at least 12x8)");
  if (c.view_width < 1 || c.view_height < 1 || c.view_width > c.width ||
      c.view_height > c.height || c.view_width % 2 == 0 || c.view_height % 2 == 0)
    throw SchemaError("world config: view must be odd-sized and fit the grid");
  if (c.episode_cap < 1) throw SchemaError("world config: episode_cap must be >= 1");
  if (c.day_length < 2 || c.night_start < 1 || c.night_start >= c.day_length)
    throw SchemaError("world config: need 0 < night_start < day_length");
  if (c.sapling_prob < 0.0 || c.sapling_prob > 1.0)
    throw SchemaError("world config: sapling_prob must be in [0,1]");
  if (c.coal_count > c.height || c.iron_count > c.height ||
      c.diamond_count > c.height)
    throw SchemaError("world config: ore counts exceed mountain column height");
  int lake = (c.width / 4) * (c.height / 4);
  int band = 4 * c.height;
  int free_cells = c.width * c.height - lake - band;
  int wanted = c.tree_count + c.cow_count + c.skeleton_count + 8;
  if (c.tree_count < 0 || c.cow_count < 0 || c.skeleton_count < 0 ||
      c.zombie_cap < 0)
    throw SchemaError("world config: negative entity counts");
  if (wanted > free_cells)
    throw SchemaError("world config: grid too small for configured densities");
  for (const auto& [name, hp] : c.creature_hp)
    if (hp < 1) throw SchemaError("world config: creature hp must be >= 1 for " + name);
}

TextObservation GridCraft::reset(uint64_t seed) {
  generate_world(seed);
  was_reset_ = true;
  return observe();
}

void GridCraft::generate_world(uint64_t seed) {
  rng_.seed(derive_seed(seed, 0x600dde5ULL));
  grid_.assign(cfg_.width * cfg_.height, Tile::grass);
  plant_age_.clear();
  creatures_.clear();
  inventory_.clear();
  achievements_.clear();
  for (const auto& name : achievement_names()) achievements_[name] = false;
  health_ = food_ = drink_ = energy_ = 9;
  sleeping_ = false;
  step_ = 0;
  done_ = false;

  // lake, with a sand shore
  int lake_w = cfg_.width / 4, lake_h = cfg_.height / 4;
  for (int y = 0; y < lake_h; ++y)
    for (int x = 0; x < lake_w; ++x) grid_[idx(x, y)] = Tile::water;
  for (int y = 0; y <= lake_h; ++y)
    if (in_bounds(lake_w, y)) grid_[idx(lake_w, y)] = Tile::sand;
  for (int x = 0; x <= lake_w; ++x)
    if (in_bounds(x, lake_h)) grid_[idx(x, lake_h)] = Tile::sand;

  // mountain band on the right edge, ores buried by depth
  int band_x = cfg_.width - 4;
  for (int y = 0; y < cfg_.height; ++y)
    for (int x = band_x; x < cfg_.width; ++x) grid_[idx(x, y)] = Tile::stone;
  auto sprinkle_ore = [&](int col, int count, Tile ore) {
    std::set<int> rows;
    int guard = 0;
    while (static_cast<int>(rows.size()) < count && guard++ < 1000) {
      int y = bounded_int(rng_, 0, cfg_.height - 1);
      if (rows.insert(y).second) grid_[idx(col, y)] = ore;
    }
  };
  sprinkle_ore(band_x, cfg_.coal_count, Tile::coal);
  sprinkle_ore(band_x + 1, cfg_.iron_count, Tile::iron);
  sprinkle_ore(band_x + 2, cfg_.diamond_count, Tile::diamond);

  agent_x_ = cfg_.width / 2 - 2;
  agent_y_ = cfg_.height / 2;
  grid_[idx(agent_x_, agent_y_)] = Tile::grass;
  facing_ = Facing::south;

  auto random_grass_cell = [&](int min_x) -> std::optional<std::pair<int, int>> {
    for (int guard = 0; guard < 2000; ++guard) {
      int x = bounded_int(rng_, 0, cfg_.width - 1);
      int y = bounded_int(rng_, 0, cfg_.height - 1);
      if (x < min_x) continue;
      if (grid_[idx(x, y)] != Tile::grass) continue;
      if (x == agent_x_ && y == agent_y_) continue;
      if (creature_at(x, y)) continue;
      return std::make_pair(x, y);
    }
    return std::nullopt;
  };

  for (int i = 0; i < cfg_.tree_count; ++i)
    if (auto cell = random_grass_cell(0)) grid_[idx(cell->first, cell->second)] = Tile::tree;
  for (int i = 0; i < cfg_.cow_count; ++i)
    if (auto cell = random_grass_cell(0))
      creatures_.push_back({"cow", cell->first, cell->second,
                            cfg_.creature_hp.at("cow"), true});
  // skeletons guard the mountain approach
  for (int i = 0; i < cfg_.skeleton_count; ++i)
    if (auto cell = random_grass_cell(band_x - 3))
      creatures_.push_back({"skeleton", cell->first, cell->second,
                            cfg_.creature_hp.at("skeleton"), true});
}

bool GridCraft::is_night() const {
  return (step_ % cfg_.day_length) >= cfg_.night_start;
}

Tile GridCraft::tile_at(int x, int y) const {
  if (!in_bounds(x, y)) throw PreconditionError("tile_at: out of bounds");
  return grid_[idx(x, y)];
}

std::optional<int> GridCraft::creature_at(int x, int y) const {
  for (size_t i = 0; i < creatures_.size(); ++i)
    if (creatures_[i].alive && creatures_[i].x == x && creatures_[i].y == y)
      return static_cast<int>(i);
  return std::nullopt;
}

void GridCraft::faced_cell(int& tx, int& ty) const {
  tx = agent_x_;
  ty = agent_y_;
  switch (facing_) {
    case Facing::north: --ty; break;
    case Facing::south: ++ty; break;
    case Facing::west: --tx; break;
    case Facing::east: ++tx; break;
  }
}

int GridCraft::best_sword_damage() const {
  int best = cfg_.sword_damage.at("");
  for (const auto& [sword, dmg] : cfg_.sword_damage) {
    if (sword.empty()) continue;
    auto it = inventory_.find(sword);
    if (it != inventory_.end() && it->second > 0) best = std::max(best, dmg);
  }
  return best;
}

bool GridCraft::stations_in_reach(const std::vector<std::string>& stations) const {
  for (const std::string& st : stations) {
    Tile want;
    if (st == "table")
      want = Tile::table;
    else if (st == "furnace")
      want = Tile::furnace;
    else
      throw SchemaError("unknown station '" + st + "' in recipe");
    bool found = false;
    for (int dy = -1; dy <= 1 && !found; ++dy)
      for (int dx = -1; dx <= 1 && !found; ++dx) {
        int x = agent_x_ + dx, y = agent_y_ + dy;
        if (in_bounds(x, y) && grid_[idx(x, y)] == want) found = true;
      }
    if (!found) return false;
  }
  return true;
}

void GridCraft::unlock(const std::string& name, std::vector<std::string>& unlocked) {
  auto it = achievements_.find(name);
  if (it == achievements_.end())
    throw PreconditionError("unknown achievement '" + name + "'");
  if (!it->second) {
    it->second = true;
    unlocked.push_back(name);
  }
}

void GridCraft::do_move(Action a) {
  Facing dir;
  switch (a) {
    case Action::move_north: dir = Facing::north; break;
    case Action::move_south: dir = Facing::south; break;
    case Action::move_west: dir = Facing::west; break;
    case Action::move_east: dir = Facing::east; break;
    default: return;
  }
  // moving in an unfaced direction turns first; a second press moves
  if (facing_ != dir) {
    facing_ = dir;
    return;
  }
  int tx, ty;
  faced_cell(tx, ty);
  if (!in_bounds(tx, ty)) return;
  if (!tile_passable(grid_[idx(tx, ty)])) return;
  if (creature_at(tx, ty)) return;
  agent_x_ = tx;
  agent_y_ = ty;
}

void GridCraft::do_interact(std::vector<std::string>& unlocked) {
  int tx, ty;
  faced_cell(tx, ty);
  if (!in_bounds(tx, ty)) return;

  if (auto ci = creature_at(tx, ty)) {
    Creature& c = creatures_[*ci];
    c.hp -= best_sword_damage();
    if (c.hp <= 0) {
      c.alive = false;
      if (c.kind == "cow") {
        food_ = std::min(9, food_ + cfg_.food_from_cow);
        unlock("eat_cow", unlocked);
      } else if (c.kind == "zombie") {
        unlock("defeat_zombie", unlocked);
      } else if (c.kind == "skeleton") {
        unlock("defeat_skeleton", unlocked);
      }
    }
    return;
  }

  Tile t = grid_[idx(tx, ty)];
  int pick_tier = 0;
  if (inventory_.count("wood_pickaxe")) pick_tier = 1;
  if (inventory_.count("stone_pickaxe")) pick_tier = 2;
  if (inventory_.count("iron_pickaxe")) pick_tier = 3;

  switch (t) {
    case Tile::tree:
      inventory_["wood"] += 1;
      unlock("collect_wood", unlocked);
      break;
    case Tile::water:
      drink_ = std::min(9, drink_ + 1);
      unlock("collect_water", unlocked);
      break;
    case Tile::grass: {
      double r = unit_real(rng_);
      if (r < cfg_.sapling_prob) {
        inventory_["sapling"] += 1;
        unlock("collect_sapling", unlocked);
      }
      break;
    }
    case Tile::plant_ripe:
      food_ = std::min(9, food_ + cfg_.food_from_plant);
      grid_[idx(tx, ty)] = Tile::grass;
      plant_age_.erase(idx(tx, ty));
      unlock("eat_plant", unlocked);
      break;
    case Tile::stone:
    case Tile::placed_stone:
      if (pick_tier >= mine_tier(t)) {
        inventory_["stone"] += 1;
        grid_[idx(tx, ty)] = Tile::path;
        unlock("collect_stone", unlocked);
      }
      break;
    case Tile::coal:
      if (pick_tier >= mine_tier(t)) {
        inventory_["coal"] += 1;
        grid_[idx(tx, ty)] = Tile::path;
        unlock("collect_coal", unlocked);
      }
      break;
    case Tile::iron:
      if (pick_tier >= mine_tier(t)) {
        inventory_["iron"] += 1;
        grid_[idx(tx, ty)] = Tile::path;
        unlock("collect_iron", unlocked);
      }
      break;
    case Tile::diamond:
      if (pick_tier >= mine_tier(t)) {
        inventory_["diamond"] += 1;
        grid_[idx(tx, ty)] = Tile::path;
        unlock("collect_diamond", unlocked);
      }
      break;
    default:
      break;  // sand, path, stations, young plants: nothing happens
  }
}

void GridCraft::do_place(Action a, std::vector<std::string>& unlocked) {
  std::string kind;
  switch (a) {
    case Action::place_table: kind = "table"; break;
    case Action::place_furnace: kind = "furnace"; break;
    case Action::place_stone: kind = "stone"; break;
    case Action::place_plant: kind = "plant"; break;
    default: return;
  }
  const PlaceSpec& spec = place_specs().at(kind);
  int cost = cfg_.place_costs.at(kind);
  auto it = inventory_.find(spec.cost_item);
  if (it == inventory_.end() || it->second < cost) return;

  int tx, ty;
  faced_cell(tx, ty);
  if (!in_bounds(tx, ty) || creature_at(tx, ty)) return;
  Tile t = grid_[idx(tx, ty)];
  bool ok = spec.grass_only
                ? t == Tile::grass
                : (tile_passable(t) || (spec.on_water && t == Tile::water));
  if (!ok) return;

  it->second -= cost;
  if (it->second == 0) inventory_.erase(it);
  grid_[idx(tx, ty)] = spec.tile;
  if (spec.tile == Tile::plant_young) plant_age_[idx(tx, ty)] = 0;
  unlock("place_" + kind, unlocked);
}

void GridCraft::do_craft(Action a, std::vector<std::string>& unlocked) {
  std::string item;
  switch (a) {
    case Action::craft_wood_pickaxe: item = "wood_pickaxe"; break;
    case Action::craft_wood_sword: item = "wood_sword"; break;
    case Action::craft_stone_pickaxe: item = "stone_pickaxe"; break;
    case Action::craft_stone_sword: item = "stone_sword"; break;
    case Action::craft_iron_pickaxe: item = "iron_pickaxe"; break;
    case Action::craft_iron_sword: item = "iron_sword"; break;
    default: return;
  }
  auto rit = cfg_.recipes.find(item);
  if (rit == cfg_.recipes.end()) return;
  const Recipe& recipe = rit->second;
  if (!stations_in_reach(recipe.stations)) return;
  for (const auto& [input, count] : recipe.inputs) {
    auto it = inventory_.find(input);
    if (it == inventory_.end() || it->second < count) return;
  }
  for (const auto& [input, count] : recipe.inputs) {
    auto it = inventory_.find(input);
    it->second -= count;
    if (it->second == 0) inventory_.erase(it);
  }
  inventory_[item] += 1;
  unlock("make_" + item, unlocked);
}

void GridCraft::creatures_act() {
  for (Creature& c : creatures_) {
    if (!c.alive) continue;
    bool hostile = c.kind != "cow";
    int dx = agent_x_ - c.x, dy = agent_y_ - c.y;
    int cheb = std::max(std::abs(dx), std::abs(dy));

    auto try_move = [&](int nx, int ny) {
      if (!in_bounds(nx, ny)) return false;
      if (!tile_passable(grid_[idx(nx, ny)])) return false;
      if (nx == agent_x_ && ny == agent_y_) return false;
      if (creature_at(nx, ny)) return false;
      c.x = nx;
      c.y = ny;
      return true;
    };

    // hostiles hunt at night only; by day they wander like cows
    if (hostile && is_night() && cheb <= cfg_.hostile_aggro_radius) {
      if (std::abs(dx) + std::abs(dy) == 1) {
        health_ -= cfg_.hostile_attack;
        sleeping_ = false;  // being hit wakes the agent
        continue;
      }
      // step along the dominant axis, then the other
      int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
      int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
      if (std::abs(dx) >= std::abs(dy)) {
        if (sx == 0 || !try_move(c.x + sx, c.y))
          if (sy != 0) try_move(c.x, c.y + sy);
      } else {
        if (sy == 0 || !try_move(c.x, c.y + sy))
          if (sx != 0) try_move(c.x + sx, c.y);
      }
      continue;
    }

    // idle wander (cows always, hostiles out of aggro range)
    double r = unit_real(rng_);
    if (r < 0.5) {
      int dir = bounded_int(rng_, 0, 3);
      static const int off[4][2] = {{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
      try_move(c.x + off[dir][0], c.y + off[dir][1]);
    }
  }
  creatures_.erase(std::remove_if(creatures_.begin(), creatures_.end(),
                                  [](const Creature& c) { return !c.alive; }),
                   creatures_.end());
}

void GridCraft::spawn_zombies() {
  int zombies = 0;
  for (const Creature& c : creatures_)
    if (c.alive && c.kind == "zombie") ++zombies;
  while (zombies < cfg_.zombie_cap) {
    bool placed = false;
    for (int guard = 0; guard < 50 && !placed; ++guard) {
      int x = bounded_int(rng_, 0, cfg_.width - 1);
      int y = bounded_int(rng_, 0, cfg_.height - 1);
      int cheb = std::max(std::abs(x - agent_x_), std::abs(y - agent_y_));
      if (cheb < 4) continue;
      if (grid_[idx(x, y)] != Tile::grass || creature_at(x, y)) continue;
      creatures_.push_back({"zombie", x, y, cfg_.creature_hp.at("zombie"), true});
      placed = true;
    }
    ++zombies;
    if (!placed) break;
  }
}

void GridCraft::vitals_tick() {
  auto decay = [&](int& vital, int every) {
    if (every > 0 && step_ % every == 0) {
      if (vital > 0)
        vital -= 1;
      else
        health_ -= 1;  // starvation
    }
  };
  decay(food_, cfg_.food_decay_every);
  decay(drink_, cfg_.drink_decay_every);
  if (!sleeping_) decay(energy_, cfg_.energy_decay_every);
  if (cfg_.regen_every > 0 && step_ % cfg_.regen_every == 0 && health_ < 9 &&
      health_ > 0 && food_ > 0 && drink_ > 0 && energy_ > 0)
    health_ += 1;
}

StepOutcome GridCraft::step(Action a) {
  if (!was_reset_) throw PreconditionError("step before reset");
  if (done_) throw PreconditionError("step after episode end");

  StepOutcome out;
  int health_before = health_;

  if (a != Action::sleep && a != Action::noop) sleeping_ = false;
  switch (a) {
    case Action::move_north:
    case Action::move_south:
    case Action::move_west:
    case Action::move_east:
      do_move(a);
      break;
    case Action::interact:
      do_interact(out.unlocked);
      break;
    case Action::place_table:
    case Action::place_furnace:
    case Action::place_stone:
    case Action::place_plant:
      do_place(a, out.unlocked);
      break;
    case Action::craft_wood_pickaxe:
    case Action::craft_wood_sword:
    case Action::craft_stone_pickaxe:
    case Action::craft_stone_sword:
    case Action::craft_iron_pickaxe:
    case Action::craft_iron_sword:
      do_craft(a, out.unlocked);
      break;
    case Action::sleep:
      if (is_night()) {
        sleeping_ = true;
        energy_ = std::min(9, energy_ + 1);
        unlock("sleep", out.unlocked);
      } else {
        sleeping_ = false;
      }
      break;
    case Action::noop:
      break;
  }

  creatures_act();

  bool was_night = is_night();
  step_ += 1;
  if (is_night() && !was_night) spawn_zombies();
  if (!is_night() && was_night) sleeping_ = false;

  for (auto& [cell, age] : plant_age_) {
    age += 1;
    if (age >= cfg_.plant_ripen_steps && grid_[cell] == Tile::plant_young)
      grid_[cell] = Tile::plant_ripe;
  }

  vitals_tick();
  health_ = std::max(0, std::min(9, health_));
  if (health_ == 0) done_ = true;
  if (step_ >= cfg_.episode_cap) done_ = true;

  out.reward = static_cast<double>(out.unlocked.size()) +
               0.1 * static_cast<double>(health_ - health_before);
  out.done = done_;
  out.obs = observe();
  return out;
}

bool GridCraft::plant_ripe_exists() const {
  for (Tile t : grid_)
    if (t == Tile::plant_ripe) return true;
  return false;
}

bool GridCraft::plant_exists() const {
  for (Tile t : grid_)
    if (t == Tile::plant_young || t == Tile::plant_ripe) return true;
  return false;
}

TextObservation GridCraft::observe() const {
  TextObservation obs;
  int hw = cfg_.view_width / 2, hh = cfg_.view_height / 2;
  for (int y = agent_y_ - hh; y <= agent_y_ + hh; ++y) {
    for (int x = agent_x_ - hw; x <= agent_x_ + hw; ++x) {
      if (!in_bounds(x, y)) continue;
      std::string name = tile_visible_name(grid_[idx(x, y)]);
      if (!name.empty()) obs.visible.push_back(name);
    }
  }
  for (const Creature& c : creatures_) {
    if (!c.alive) continue;
    if (std::abs(c.x - agent_x_) <= hw && std::abs(c.y - agent_y_) <= hh)
      obs.visible.push_back(c.kind);
  }
  std::sort(obs.visible.begin(), obs.visible.end());
  obs.inventory = inventory_;
  obs.health = health_;
  obs.food = food_;
  obs.drink = drink_;
  obs.energy = energy_;
  if (is_night()) obs.status.insert("night");
  if (sleeping_) obs.status.insert("sleeping");
  return obs;
}

std::string GridCraft::render_map() const {
  if (!was_reset_) throw PreconditionError("render_map before reset");
  static const char glyphs[] = {'.', ',', ':', '~', 'T', '#', 'c', 'i',
                                'd', 't', 'f', 'p', 'P', 'S'};
  std::ostringstream os;
  for (int y = 0; y < cfg_.height; ++y) {
    for (int x = 0; x < cfg_.width; ++x) {
      char g = glyphs[static_cast<int>(grid_[idx(x, y)])];
      if (auto ci = creature_at(x, y))
        g = std::toupper(creatures_[*ci].kind[0]);
      if (x == agent_x_ && y == agent_y_) g = '@';
      os << g;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace craftplan
