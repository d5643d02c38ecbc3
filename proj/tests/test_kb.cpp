#include "craftplan/entity_kb.hpp"
#include "craftplan/error.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace craftplan;
using testutil::fixture;

TEST_CASE("fixture kb loads and is closed against the fixture graph") {
  EntityKB kb = load_kb(fixture("crafter_kb.json"));
  SubgoalGraph g = load_graph(fixture("crafter_graph.json"));
  CHECK(kb.entities.size() == 22);
  CHECK(validate_kb(kb, g).ok());

  auto names = kb.names();
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK(kb.has("zombie"));
  CHECK(kb.has("wood_pickaxe"));
  CHECK_FALSE(kb.has("creeper"));

  const EntityRecord& tree = kb.entities.at("tree");
  CHECK(tree.entity_type == "terrain");
  CHECK(std::is_sorted(tree.related_subgoals.begin(), tree.related_subgoals.end()));
}

TEST_CASE("kb json round trip") {
  EntityKB kb = load_kb(fixture("crafter_kb.json"));
  EntityKB back = kb_from_json(kb_to_json(kb));
  CHECK(canonical_dump(kb_to_json(kb)) == canonical_dump(kb_to_json(back)));
}

TEST_CASE("entity names normalize to lowercase") {
  json doc = {{"entities",
               {{{"name", "Tree"},
                 {"entity_type", "terrain"},
                 {"description", "d"},
                 {"related_subgoals", json::array()}}}}};
  EntityKB kb = kb_from_json(doc);
  CHECK(kb.has("tree"));
  CHECK_FALSE(kb.entities.count("Tree"));

  // duplicate after normalization
  doc["entities"].push_back(doc["entities"][0]);
  doc["entities"][1]["name"] = "TREE";
  CHECK_THROWS_AS(kb_from_json(doc), SchemaError);
}

TEST_CASE("kb schema errors") {
  CHECK_THROWS_AS(kb_from_json(json::array()), SchemaError);
  CHECK_THROWS_AS(kb_from_json(json{{"entities", "nope"}}), SchemaError);
  json missing = {{"entities", {{{"name", "x"}, {"entity_type", "tool"}}}}};
  CHECK_THROWS_AS(kb_from_json(missing), SchemaError);
  json bad_rel = {{"entities",
                   {{{"name", "x"},
                     {"entity_type", "tool"},
                     {"description", "d"},
                     {"related_subgoals", {1, 2}}}}}};
  CHECK_THROWS_AS(kb_from_json(bad_rel), SchemaError);
}

TEST_CASE("related-subgoal closure failures become findings") {
  EntityKB kb = load_kb(fixture("crafter_kb.json"));
  SubgoalGraph g = load_graph(fixture("crafter_graph.json"));
  kb.entities.at("cow").related_subgoals.push_back("ride_cow");
  ValidationReport rep = validate_kb(kb, g);
  REQUIRE(rep.findings.size() == 1);
  CHECK(rep.findings[0].code == "unknown-subgoal");
  CHECK(rep.findings[0].subject == "cow");
  CHECK(rep.findings[0].message.find("ride_cow") != std::string::npos);
}

TEST_CASE("lookups dedupe case-insensitively and sort both halves") {
  EntityKB kb = load_kb(fixture("crafter_kb.json"));
  EntityLookup lu =
      lookup_entities(kb, {"Zombie", "tree", "zombie", "gold", "Axolotl"});
  REQUIRE(lu.found.size() == 2);
  CHECK(lu.found[0].name == "tree");
  CHECK(lu.found[1].name == "zombie");
  CHECK(lu.unknown == std::vector<std::string>{"axolotl", "gold"});
}

TEST_CASE("entity scan prefers the longest match and consumes its span") {
  EntityKB kb = load_kb(fixture("crafter_kb.json"));

  auto hits = extract_entity_names("You see: stone_pickaxe", kb);
  CHECK(hits == std::set<std::string>{"stone_pickaxe"});

  hits = extract_entity_names("a stone_pickaxe resting on stone", kb);
  CHECK(hits == std::set<std::string>{"stone", "stone_pickaxe"});

  hits = extract_entity_names("You see: cow, tree, tree\nInventory: none", kb);
  CHECK(hits == std::set<std::string>{"cow", "tree"});

  CHECK(extract_entity_names("nothing relevant here", kb).empty());
  CHECK(extract_entity_names("ZOMBIE AHEAD", kb) ==
        std::set<std::string>{"zombie"});
}

TEST_CASE("entity info renders one line per record") {
  EntityKB kb = load_kb(fixture("crafter_kb.json"));
  EntityLookup lu = lookup_entities(kb, {"tree", "cow"});
  std::string text = render_entity_info(lu.found);
  auto nl = text.find('\n');
  REQUIRE(nl != std::string::npos);
  CHECK(text.substr(0, 5) == "cow (");
  CHECK(text.substr(nl + 1, 6) == "tree (");
  CHECK(text.find("Related subgoals: ") != std::string::npos);
  CHECK(render_entity_info({}) == "none");
}
