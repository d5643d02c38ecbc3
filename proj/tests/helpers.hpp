#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "craftplan/json_util.hpp"
#include "craftplan/rng.hpp"
#include "craftplan/subgoal_graph.hpp"

namespace craftplan::testutil {

inline std::string fixture(const std::string& rel) {
  return std::string(FIXTURE_DIR) + "/" + rel;
}

// Fresh scratch directory under the system temp dir. Leaks on purpose: test
// artifacts are useful when a run fails, and the OS cleans /tmp anyway.
inline std::string scratch_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("craftplan_" + tag + "_" + std::to_string(::getpid()) + "_" +
              std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir.string();
}

// Random valid AND/OR DAG: node i may only depend on nodes < i, node 0 is
// always a root, AND and OR dependencies never mix on one target. OR targets
// keep a matching subgoal-achieved precondition ~half the time, so some stay
// roots (both cases are legal and must round-trip).
inline SubgoalGraph random_dag(std::mt19937_64& rng) {
  SubgoalGraph g;
  int n = bounded_int(rng, 1, 40);
  std::vector<SubgoalId> ids;
  for (int i = 0; i < n; ++i) ids.push_back("sg_" + std::to_string(i));

  for (int i = 0; i < n; ++i) {
    SubgoalNode node;
    node.id = ids[i];
    node.description = "node " + std::to_string(i);
    int kind = i == 0 ? 0 : bounded_int(rng, 0, 2);  // 0 root, 1 OR, 2 AND
    if (kind == 2 && i < 2) kind = 1;
    if (kind == 1) {
      int alts = bounded_int(rng, 1, std::min(3, i));
      std::vector<SubgoalId> pool(ids.begin(), ids.begin() + i);
      std::shuffle(pool.begin(), pool.end(), rng);
      std::vector<SubgoalId> sources(pool.begin(), pool.begin() + alts);
      std::sort(sources.begin(), sources.end());
      g.or_edges[node.id] = sources;
      if (bounded_int(rng, 0, 1) == 0) {
        Condition c;
        c.kind = Condition::Kind::subgoal_achieved;
        c.subject = sources[bounded_int(rng, 0, alts - 1)];
        node.preconditions.push_back(c);
      }
    } else if (kind == 2) {
      int k = bounded_int(rng, 2, std::min(4, i));
      std::vector<SubgoalId> pool(ids.begin(), ids.begin() + i);
      std::shuffle(pool.begin(), pool.end(), rng);
      std::vector<SubgoalId> sources(pool.begin(), pool.begin() + k);
      std::sort(sources.begin(), sources.end());
      g.and_groups[node.id] = sources;
    }
    g.nodes[node.id] = std::move(node);
  }
  g.roots = derive_roots(g);
  init_slots(g);
  // sprinkle counter history so weighted rendering has something to show
  for (auto& [key, counter] : g.slots) {
    counter.planned = bounded_int(rng, 0, 5);
    counter.achieved =
        counter.planned == 0 ? 0 : bounded_int(rng, 0, static_cast<int>(counter.planned));
  }
  return g;
}

}  // namespace craftplan::testutil
