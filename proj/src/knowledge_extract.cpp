#include "craftplan/knowledge_extract.hpp"

#include "craftplan/error.hpp"

namespace craftplan {

namespace {

json parse_draft(const std::string& raw, const std::string& pass) {
  // Tolerate a fenced code block around the JSON; everything else is strict.
  std::string body = raw;
  size_t a = body.find("```");
  if (a != std::string::npos) {
    size_t open = body.find('\n', a);
    size_t b = body.rfind("```");
    if (open == std::string::npos || b <= open)
      throw ParseError(pass + ": unterminated code fence in response");
    body = body.substr(open + 1, b - open - 1);
  }
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(pass + ": response is not valid JSON: " + e.what());
  }
}

}  // namespace

ExtractResult extract_knowledge(const std::vector<std::string>& documents,
                                LlmGateway& gateway,
                                const PromptLibrary& prompts) {
  if (documents.empty())
    throw PreconditionError("extract_knowledge: no documents given");
  for (const std::string& doc : documents)
    if (doc.empty())
      throw PreconditionError("extract_knowledge: empty document");

  std::string joined;
  for (size_t i = 0; i < documents.size(); ++i) {
    if (i) joined += "\n\n---\n\n";
    joined += documents[i];
  }

  ExtractResult res;

  std::string sys1 = prompts.render("extract_subgoals_system", {});
  std::string usr1 =
      prompts.render("extract_subgoals_user", {{"documents", joined}});
  res.graph_draft = parse_draft(gateway.complete(Role::extractor, sys1, usr1),
                                "extract pass 1");
  res.graph = graph_from_json(res.graph_draft);

  std::string sys2 = prompts.render("extract_kb_system", {});
  std::string usr2 = prompts.render(
      "extract_kb_user",
      {{"documents", joined}, {"subgoal_json", canonical_dump(res.graph_draft)}});
  res.kb_draft = parse_draft(gateway.complete(Role::extractor, sys2, usr2),
                             "extract pass 2");
  res.kb = kb_from_json(res.kb_draft);

  res.report = validate_graph(res.graph);
  ValidationReport krep = validate_kb(res.kb, res.graph);
  res.report.findings.insert(res.report.findings.end(), krep.findings.begin(),
                             krep.findings.end());
  return res;
}

}  // namespace craftplan
