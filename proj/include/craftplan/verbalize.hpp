#pragma once

#include <string>

#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

struct VerbalizeOptions {
  // Append " (NN%)" (rounded percent) to each root/edge entry, or " (-%)"
  // when the slot has never been planned.
  bool with_weights = false;
};

// Graph-to-text: one line per depth layer; layer 0 lists roots; an AND group
// renders "a & b -> x" at max(source depth)+1; each OR edge renders
// "a -> x" at depth(source)+1; entries sort by (target, sources) and join
// with "; ". Requires a semantically valid graph.
std::string verbalize(const SubgoalGraph& g, const VerbalizeOptions& opts = {});

// Inverse on structure: rebuild node ids, edges and the root set from the
// layered text. Weight suffixes are tolerated and ignored. Grammar
// violations throw ParseError with the 1-based line number.
SubgoalGraph parse_verbalized(const std::string& text);

}  // namespace craftplan
