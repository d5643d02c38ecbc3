#pragma once

#include <string>
#include <vector>

#include "craftplan/entity_kb.hpp"
#include "craftplan/llm_gateway.hpp"
#include "craftplan/planner.hpp"
#include "craftplan/subgoal_graph.hpp"

namespace craftplan {

struct ExtractResult {
  SubgoalGraph graph;
  EntityKB kb;
  ValidationReport report;  // findings over both drafts
  json graph_draft;         // exactly what the backend returned, canonicalized
  json kb_draft;
};

// Two-pass bootstrap: pass 1 asks for the subgoal-graph JSON from the
// documents, pass 2 asks for the entity KB given the draft graph. Drafts are
// written as-is and then validated; findings do not abort. Empty `documents`
// is a precondition error.
ExtractResult extract_knowledge(const std::vector<std::string>& documents,
                                LlmGateway& gateway,
                                const PromptLibrary& prompts);

}  // namespace craftplan
