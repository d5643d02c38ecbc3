#include <sstream>

#include "craftplan/error.hpp"
#include "craftplan/verbalize.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace craftplan;
using testutil::fixture;

namespace {

std::vector<std::string> rstripped_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
      line.pop_back();
    out.push_back(line);
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

}  // namespace

TEST_CASE("fixture graph verbalizes to the reference text") {
  SubgoalGraph g = load_graph(fixture("crafter_graph.json"));
  std::string got = verbalize(g);
  std::string want = read_text_file(fixture("appendix_graph.txt"));
  CHECK(rstripped_lines(got) == rstripped_lines(want));

  // layer membership spot checks
  auto lines = rstripped_lines(got);
  REQUIRE(lines.size() == 8);
  CHECK(lines[0] ==
        "collect_sapling; collect_water; collect_wood; defeat_skeleton; "
        "defeat_zombie; eat_cow; sleep");
  CHECK(lines[2].find("collect_wood & place_table -> make_wood_pickaxe") !=
        std::string::npos);
  CHECK(lines[7].find("make_iron_pickaxe -> collect_diamond") != std::string::npos);
}

TEST_CASE("weight suffixes render per slot and round to whole percent") {
  SubgoalGraph g = load_graph(fixture("crafter_graph.json"));

  std::string fresh = verbalize(g, {.with_weights = true});
  for (const auto& line : rstripped_lines(fresh))
    CHECK(line.find("(-%)") != std::string::npos);
  // every entry is annotated: entries and suffixes come in equal numbers
  size_t entries = 1, suffixes = 0;
  for (size_t i = 0; i + 1 < fresh.size(); ++i) {
    if (fresh.compare(i, 2, "; ") == 0) ++entries;
    if (fresh[i] == '\n') ++entries;
  }
  for (size_t pos = fresh.find("(-%)"); pos != std::string::npos;
       pos = fresh.find("(-%)", pos + 1))
    ++suffixes;
  CHECK(entries == suffixes);

  g.slot(root_slot("collect_wood")).planned = 2;
  g.slot(root_slot("collect_wood")).achieved = 1;
  g.slot(and_slot("make_wood_pickaxe")).planned = 3;
  g.slot(and_slot("make_wood_pickaxe")).achieved = 2;
  g.slot(or_slot("collect_wood", "place_table")).planned = 3;
  g.slot(or_slot("collect_wood", "place_table")).achieved = 1;
  std::string weighted = verbalize(g, {.with_weights = true});
  CHECK(weighted.find("collect_wood (50%)") != std::string::npos);
  CHECK(weighted.find("collect_wood & place_table -> make_wood_pickaxe (67%)") !=
        std::string::npos);  // 2/3 rounds up
  CHECK(weighted.find("collect_wood -> place_table (33%)") != std::string::npos);
  CHECK(weighted.find("collect_water (-%)") != std::string::npos);

  // unweighted rendering never shows percentages
  CHECK(verbalize(g).find('%') == std::string::npos);
}

TEST_CASE("parse inverts verbalize on the fixture graph") {
  SubgoalGraph g = load_graph(fixture("crafter_graph.json"));
  CHECK(structure_equal(g, parse_verbalized(verbalize(g))));
  // weight annotations are tolerated and ignored
  CHECK(structure_equal(g, parse_verbalized(verbalize(g, {.with_weights = true}))));
}

TEST_CASE("single-root graphs and invalid graphs") {
  SubgoalGraph g;
  SubgoalNode n;
  n.id = "alone";
  g.nodes["alone"] = n;
  g.roots = derive_roots(g);
  init_slots(g);
  CHECK(verbalize(g) == "alone");
  CHECK(structure_equal(g, parse_verbalized("alone")));

  SubgoalGraph empty;
  CHECK_THROWS_AS(verbalize(empty), PreconditionError);

  SubgoalGraph cyclic;
  for (const char* id : {"a", "b"}) {
    SubgoalNode node;
    node.id = id;
    cyclic.nodes[id] = node;
  }
  cyclic.or_edges["a"] = {"b"};
  cyclic.or_edges["b"] = {"a"};
  cyclic.roots = derive_roots(cyclic);
  CHECK_THROWS_AS(verbalize(cyclic), PreconditionError);
}

TEST_CASE("grammar violations carry the offending line number") {
  auto line_of = [](const std::string& text) {
    try {
      parse_verbalized(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };

  SUBCASE("edge on the root layer") {
    CHECK(line_of("a -> b") == 1);
  }
  SUBCASE("bare id below the root layer") {
    CHECK(line_of("a\nb") == 2);
  }
  SUBCASE("blank interior line") {
    CHECK(line_of("a\n\na -> b") == 2);
  }
  SUBCASE("empty text") {
    CHECK(line_of("") == 1);
    CHECK(line_of("\n\n") == 1);
  }
  SUBCASE("duplicate root") {
    CHECK(line_of("a; a") == 1);
  }
  SUBCASE("invalid id") {
    CHECK(line_of("a\na -> B") == 2);
    CHECK(line_of("a\n-> b") == 2);
  }
  SUBCASE("duplicate AND source") {
    CHECK(line_of("a\na & a -> b") == 2);
  }
  SUBCASE("AND and OR mixed on one target") {
    CHECK(line_of("a; b\na & b -> c; a -> c") == 2);
    CHECK(line_of("a; b\na -> c; a & b -> c") == 2);
  }
  SUBCASE("repeated AND group") {
    CHECK(line_of("a; b\na & b -> c; a & b -> c") == 2);
  }
  SUBCASE("duplicate OR edge") {
    CHECK(line_of("a\na -> b; a -> b") == 2);
  }
  SUBCASE("bad weight annotation") {
    CHECK(line_of("a (12)") == 1);
    CHECK(line_of("a (x%)") == 1);
  }
  SUBCASE("empty entry from a doubled separator") {
    CHECK(line_of("a; ; b") == 1);
  }
}

TEST_CASE("random DAGs survive a verbalize/parse round trip") {
  std::mt19937_64 rng(20240817ULL);
  for (int i = 0; i < 100; ++i) {
    SubgoalGraph g = testutil::random_dag(rng);
    CAPTURE(i);
    REQUIRE(validate_graph(g).ok());
    bool weighted = i % 2 == 0;
    SubgoalGraph back = parse_verbalized(verbalize(g, {.with_weights = weighted}));
    CHECK(structure_equal(g, back));
    CHECK(validate_graph(back).ok());
  }
}
