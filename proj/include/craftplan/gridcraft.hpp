#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "craftplan/json_util.hpp"
#include "craftplan/observation.hpp"

namespace craftplan {

enum class Tile : uint8_t {
  grass, sand, path, water, tree, stone, coal, iron, diamond,
  table, furnace, plant_young, plant_ripe, placed_stone,
};

std::string tile_name(Tile t);
bool tile_passable(Tile t);
// Name shown in "You see" (plants of both ages read "plant"); empty for
// plain terrain, which the observation omits.
std::string tile_visible_name(Tile t);

enum class Action : uint8_t {
  move_north, move_south, move_west, move_east,
  interact,
  place_table, place_furnace, place_stone, place_plant,
  craft_wood_pickaxe, craft_wood_sword, craft_stone_pickaxe,
  craft_stone_sword, craft_iron_pickaxe, craft_iron_sword,
  sleep, noop,
};
inline constexpr int kActionCount = 17;

std::string action_name(Action a);
Action action_from_string(const std::string& s);

struct Recipe {
  std::map<std::string, int> inputs;      // item -> count consumed
  std::vector<std::string> stations;      // required within reach
};

struct WorldConfig {
  int width = 16, height = 16;
  int view_width = 7, view_height = 5;
  int episode_cap = 500;
  int day_length = 100;
  int night_start = 60;  // step phase at which night begins
  // generation densities
  int tree_count = 8;
  int coal_count = 3, iron_count = 2, diamond_count = 1;
  int cow_count = 2, skeleton_count = 2;
  int zombie_cap = 2;
  double sapling_prob = 1.0;  // grass interact yields a sapling
  int plant_ripen_steps = 45;
  // vitals schedule (steps between ticks)
  int food_decay_every = 35, drink_decay_every = 30, energy_decay_every = 40;
  int regen_every = 25;
  // combat
  std::map<std::string, int> creature_hp = {
      {"cow", 3}, {"zombie", 5}, {"skeleton", 3}};
  std::map<std::string, int> sword_damage = {
      {"", 1}, {"wood_sword", 2}, {"stone_sword", 3}, {"iron_sword", 5}};
  int food_from_cow = 6, food_from_plant = 4;
  int hostile_attack = 1;
  int hostile_aggro_radius = 3;  // Chebyshev; random walk beyond it
  // crafting / placement
  std::map<std::string, Recipe> recipes;   // craft target item -> recipe
  std::map<std::string, int> place_costs;  // table/furnace/stone/plant

  static WorldConfig defaults();
};

WorldConfig world_config_from_json(const json& j);
json world_config_to_json(const WorldConfig& c);

struct Creature {
  std::string kind;
  int x = 0, y = 0;
  int hp = 1;
  bool alive = true;
};

enum class Facing : uint8_t { north, south, west, east };

struct StepOutcome {
  TextObservation obs;
  double reward = 0.0;
  bool done = false;
  std::vector<std::string> unlocked;  // achievements newly set this step
};

// Deterministic crafting gridworld. All randomness flows through the state's
// own engine, so (seed, action sequence) fixes the trajectory exactly.
class GridCraft {
 public:
  explicit GridCraft(const WorldConfig& cfg);

  TextObservation reset(uint64_t seed);
  StepOutcome step(Action a);
  std::string render_map() const;  // ASCII map, debugging aid

  const std::map<std::string, bool>& achievements() const { return achievements_; }
  const std::map<std::string, int>& inventory() const { return inventory_; }
  bool done() const { return done_; }
  int step_count() const { return step_; }
  bool is_night() const;

  // World introspection for policies (the text observation has no geometry).
  Tile tile_at(int x, int y) const;
  int width() const { return cfg_.width; }
  int height() const { return cfg_.height; }
  int agent_x() const { return agent_x_; }
  int agent_y() const { return agent_y_; }
  Facing facing() const { return facing_; }
  const std::vector<Creature>& creatures() const { return creatures_; }
  const WorldConfig& config() const { return cfg_; }
  int vitals_health() const { return health_; }
  int vitals_food() const { return food_; }
  int vitals_drink() const { return drink_; }
  int vitals_energy() const { return energy_; }
  bool plant_ripe_exists() const;
  bool plant_exists() const;

  // The canonical achievement list (22 names, matching the graph fixture).
  static const std::vector<std::string>& achievement_names();

 private:
  WorldConfig cfg_;
  std::vector<Tile> grid_;
  std::map<int, int> plant_age_;  // tile index -> steps since planted
  int agent_x_ = 0, agent_y_ = 0;
  Facing facing_ = Facing::south;
  std::map<std::string, int> inventory_;
  int health_ = 9, food_ = 9, drink_ = 9, energy_ = 9;
  bool sleeping_ = false;
  std::vector<Creature> creatures_;
  std::map<std::string, bool> achievements_;
  int step_ = 0;
  bool done_ = false;
  bool was_reset_ = false;
  std::mt19937_64 rng_;

  int idx(int x, int y) const { return y * cfg_.width + x; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < cfg_.width && y >= 0 && y < cfg_.height;
  }
  void generate_world(uint64_t seed);
  void validate_config() const;
  std::optional<int> creature_at(int x, int y) const;
  void faced_cell(int& tx, int& ty) const;
  void do_move(Action a);
  void do_interact(std::vector<std::string>& unlocked);
  void do_place(Action a, std::vector<std::string>& unlocked);
  void do_craft(Action a, std::vector<std::string>& unlocked);
  void creatures_act();
  void vitals_tick();
  void spawn_zombies();
  void unlock(const std::string& name, std::vector<std::string>& unlocked);
  TextObservation observe() const;
  int best_sword_damage() const;
  bool stations_in_reach(const std::vector<std::string>& stations) const;
};

}  // namespace craftplan
