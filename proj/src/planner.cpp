#include "craftplan/planner.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <functional>
#include <sstream>

#include "craftplan/error.hpp"
#include "craftplan/verbalize.hpp"

namespace craftplan {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t hit = s.find(',', pos);
    if (hit == std::string::npos) {
      out.push_back(trim(s.substr(pos)));
      return out;
    }
    out.push_back(trim(s.substr(pos, hit - pos)));
    pos = hit + 1;
  }
}

// --- strict Label<content> block scanning ---

size_t skip_ws(const std::string& s, size_t pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  return pos;
}

std::string read_block(const std::string& text, size_t& pos,
                       const std::string& label) {
  pos = skip_ws(text, pos);
  if (pos >= text.size())
    throw ParseError("expected " + label + "<...>, found end of text");
  if (text.compare(pos, label.size(), label) != 0 ||
      pos + label.size() >= text.size() || text[pos + label.size()] != '<')
    throw ParseError("expected " + label + "<...> at offset " +
                     std::to_string(pos));
  size_t open = pos + label.size() + 1;
  size_t close = text.find('>', open);
  if (close == std::string::npos)
    throw ParseError("missing '>' for " + label);
  pos = close + 1;
  return text.substr(open, close - open);
}

void expect_end(const std::string& text, size_t pos) {
  pos = skip_ws(text, pos);
  if (pos < text.size())
    throw ParseError("unexpected trailing text at offset " + std::to_string(pos));
}

std::vector<SubgoalId> parse_plan_ids(const std::string& content,
                                      const std::string& label) {
  std::vector<SubgoalId> ids;
  for (const std::string& tok : split_commas(content)) {
    if (!is_valid_subgoal_id(tok))
      throw ParseError(label + ": invalid subgoal id '" + tok + "'");
    ids.push_back(tok);
  }
  if (ids.size() != 3)
    throw ParseError(label + ": expected 3 subgoals, got " +
                     std::to_string(ids.size()));
  std::vector<SubgoalId> uniq = ids;
  std::sort(uniq.begin(), uniq.end());
  if (std::adjacent_find(uniq.begin(), uniq.end()) != uniq.end())
    throw ParseError(label + ": duplicate subgoal inside the plan");
  return ids;
}

const std::vector<std::string>& actor_labels() {
  static const std::vector<std::string> labels = {"PlanA", "PlanB", "PlanC"};
  return labels;
}

}  // namespace

std::string provenance_to_string(PlanProvenance p) {
  switch (p) {
    case PlanProvenance::adopted_top_ranked: return "adopted_top_ranked";
    case PlanProvenance::refined: return "refined";
    case PlanProvenance::fallback: return "fallback";
  }
  return "?";
}

// --- templates ---

PromptLibrary PromptLibrary::from_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw SchemaError("prompt directory '" + dir + "' does not exist");
  PromptLibrary lib;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    lib.files_[entry.path().stem().string()] = read_text_file(entry.path().string());
  }
  if (lib.files_.empty())
    throw SchemaError("prompt directory '" + dir + "' has no .txt templates");
  return lib;
}

PromptLibrary PromptLibrary::from_map(std::map<std::string, std::string> files) {
  PromptLibrary lib;
  lib.files_ = std::move(files);
  return lib;
}

std::string render_template(const std::string& body,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(body.size());
  size_t pos = 0;
  while (pos < body.size()) {
    char c = body[pos];
    if (c != '{') {
      out += c;
      ++pos;
      continue;
    }
    size_t close = body.find('}', pos + 1);
    if (close == std::string::npos)
      throw Error("template: unbalanced '{' at offset " + std::to_string(pos));
    std::string name = trim(body.substr(pos + 1, close - pos - 1));
    auto it = values.find(name);
    if (it == values.end())
      throw Error("template: unknown placeholder '{" + name + "}'");
    out += it->second;
    pos = close + 1;
  }
  return out;
}

std::string PromptLibrary::render(
    const std::string& name,
    const std::map<std::string, std::string>& values) const {
  auto it = files_.find(name);
  if (it == files_.end()) throw Error("unknown template '" + name + "'");
  try {
    return render_template(it->second, values);
  } catch (const Error& e) {
    throw Error(std::string(e.what()) + " (template '" + name + "')");
  }
}

// --- parsers ---

std::vector<CandidatePlan> parse_actor_output(const std::string& text) {
  std::vector<CandidatePlan> plans;
  size_t pos = 0;
  for (const std::string& label : actor_labels()) {
    CandidatePlan plan;
    plan.label = label;
    plan.subgoals = parse_plan_ids(read_block(text, pos, label), label);
    plan.reason = trim(read_block(text, pos, "Reason" + label.substr(4)));
    if (plan.reason.empty())
      throw ParseError("Reason" + label.substr(4) + ": empty rationale");
    plans.push_back(std::move(plan));
  }
  expect_end(text, pos);
  return plans;
}

CriticFeedback parse_critic_output(const std::string& text,
                                   const std::vector<std::string>& labels) {
  if (labels.empty())
    throw PreconditionError("parse_critic_output: no candidate labels");
  CriticFeedback fb;
  size_t pos = 0;
  for (const std::string& label : labels) {
    std::string content = trim(read_block(text, pos, label + "_feedback"));
    if (content.empty())
      throw ParseError(label + "_feedback: empty feedback");
    fb.feedback[label] = content;
  }
  std::vector<std::string> ranked = split_commas(read_block(text, pos, "Ranking"));
  if (ranked.size() != labels.size())
    throw ParseError("Ranking: expected " + std::to_string(labels.size()) +
                     " labels, got " + std::to_string(ranked.size()));
  std::set<std::string> seen;
  for (const std::string& r : ranked) {
    if (std::find(labels.begin(), labels.end(), r) == labels.end())
      throw ParseError("Ranking: unknown plan label '" + r + "'");
    if (!seen.insert(r).second)
      throw ParseError("Ranking: duplicate plan label '" + r + "'");
  }
  fb.ranking = ranked;

  std::string flag = trim(read_block(text, pos, "Need_Modify"));
  std::transform(flag.begin(), flag.end(), flag.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (flag == "yes")
    fb.need_modify = true;
  else if (flag == "no")
    fb.need_modify = false;
  else
    throw ParseError("Need_Modify: expected yes or no, got '" + flag + "'");
  expect_end(text, pos);
  return fb;
}

RefinerOutput parse_refiner_output(const std::string& text) {
  RefinerOutput out;
  size_t pos = skip_ws(text, 0);
  if (text.compare(pos, 9, "Analysis<") == 0) {
    out.analysis = trim(read_block(text, pos, "Analysis"));
  }
  out.final_plan = parse_plan_ids(read_block(text, pos, "Final_Plan"), "Final_Plan");
  expect_end(text, pos);
  return out;
}

// --- context ---

PlanningContext build_context(const TextObservation& obs,
                              const SubgoalGraph& g, const EntityKB& kb,
                              const std::set<SubgoalId>& achieved) {
  PlanningContext ctx;
  ctx.graph = &g;
  ctx.kb = &kb;
  ctx.achieved = achieved;
  ctx.text_obs = render_observation(obs);

  std::set<std::string> names = extract_entity_names(ctx.text_obs, kb);
  EntityLookup lookup =
      lookup_entities(kb, std::vector<std::string>(names.begin(), names.end()));
  ctx.entity_info = render_entity_info(lookup.found);

  for (const auto& id : g.node_ids()) {
    ctx.available.push_back(id);
    if (!achieved.count(id)) ctx.unachieved.push_back(id);
  }
  ctx.graph_text = verbalize(g, VerbalizeOptions{.with_weights = true});
  return ctx;
}

// --- pipeline ---

bool plan_is_valid(const std::vector<SubgoalId>& plan,
                   const std::vector<SubgoalId>& available) {
  if (plan.size() != 3) return false;
  std::set<SubgoalId> uniq(plan.begin(), plan.end());
  if (uniq.size() != 3) return false;
  std::set<SubgoalId> pool(available.begin(), available.end());
  for (const auto& id : plan)
    if (!pool.count(id)) return false;
  return true;
}

std::vector<SubgoalId> frontier_plan(const PlanningContext& ctx) {
  if (!ctx.graph) throw PreconditionError("frontier_plan: context has no graph");
  const SubgoalGraph& g = *ctx.graph;
  if (ctx.available.size() < 3)
    throw PreconditionError("frontier_plan: need at least 3 available subgoals");

  std::map<SubgoalId, int> depth = node_depths(g);
  auto by_depth = [&](const SubgoalId& a, const SubgoalId& b) {
    int da = depth.count(a) ? depth.at(a) : 0;
    int db = depth.count(b) ? depth.at(b) : 0;
    return std::tie(da, a) < std::tie(db, b);
  };

  auto prereqs_met = [&](const SubgoalId& id) {
    if (g.roots.count(id)) return true;
    if (auto it = g.and_groups.find(id); it != g.and_groups.end()) {
      for (const auto& s : it->second)
        if (!ctx.achieved.count(s)) return false;
      return true;
    }
    if (auto it = g.or_edges.find(id); it != g.or_edges.end()) {
      for (const auto& s : it->second)
        if (ctx.achieved.count(s)) return true;
      return false;
    }
    return true;
  };

  std::vector<SubgoalId> pending, ready;
  for (const auto& id : ctx.available) {
    if (ctx.achieved.count(id)) continue;
    pending.push_back(id);
    if (prereqs_met(id)) ready.push_back(id);
  }
  std::sort(ready.begin(), ready.end(), by_depth);
  std::sort(pending.begin(), pending.end(), by_depth);

  std::vector<SubgoalId> plan;
  std::set<SubgoalId> used;
  auto take_from = [&](const std::vector<SubgoalId>& pool) {
    for (const auto& id : pool) {
      if (plan.size() == 3) return;
      if (used.insert(id).second) plan.push_back(id);
    }
  };
  take_from(ready);
  take_from(pending);
  std::vector<SubgoalId> rest = ctx.available;
  std::sort(rest.begin(), rest.end(), by_depth);
  take_from(rest);
  return plan;
}

std::string render_candidates(const std::vector<CandidatePlan>& plans) {
  std::vector<std::string> lines;
  for (const auto& p : plans)
    lines.push_back(p.label + ": " + join(p.subgoals, ", ") +
                    " (reason: " + p.reason + ")");
  return join(lines, "\n");
}

std::string render_feedback(const CriticFeedback& fb) {
  std::vector<std::string> lines;
  for (const auto& [label, text] : fb.feedback)
    lines.push_back(label + "_feedback: " + text);
  lines.push_back("Ranking: " + join(fb.ranking, ", "));
  lines.push_back(std::string("Need_Modify: ") + (fb.need_modify ? "yes" : "no"));
  return join(lines, "\n");
}

json PlanTrace::to_json() const {
  json stages_j = json::array();
  for (const auto& st : stages) {
    json attempts_j = json::array();
    for (const auto& at : st.attempts) {
      json aj;
      aj["fingerprint"] = at.fingerprint;
      aj["parse_ok"] = at.parse_ok;
      aj["response"] = at.raw_response;
      if (!at.error.empty()) aj["error"] = at.error;
      attempts_j.push_back(aj);
    }
    stages_j.push_back({{"role", role_to_string(st.role)},
                        {"attempts", attempts_j},
                        {"succeeded", st.succeeded}});
  }
  json j;
  j["stages"] = stages_j;
  json cands = json::array();
  for (const auto& c : candidates)
    cands.push_back({{"label", c.label}, {"subgoals", c.subgoals}, {"reason", c.reason}});
  j["candidates"] = cands;
  if (feedback) {
    j["ranking"] = feedback->ranking;
    j["need_modify"] = feedback->need_modify;
  }
  if (!fallback_reason.empty()) j["fallback_reason"] = fallback_reason;
  j["llm_calls"] = llm_calls;
  return j;
}

namespace {

// One pipeline stage with retries: ask, parse, re-ask on failure. Returns
// the parsed payload via `parse` or nullopt after exhaustion.
template <typename T>
std::optional<T> run_stage(LlmGateway& gateway, Role role,
                           const std::string& system_prompt,
                           const std::string& user_prompt, int retries,
                           PlanTrace& trace,
                           const std::function<T(const std::string&)>& parse,
                           std::string* raw_out = nullptr) {
  StageTrace st;
  st.role = role;
  std::optional<T> result;
  for (int attempt = 0; attempt <= retries && !result; ++attempt) {
    StageAttempt at;
    at.fingerprint = request_fingerprint(role, user_prompt);
    try {
      at.raw_response = gateway.complete(role, system_prompt, user_prompt);
      T parsed = parse(at.raw_response);
      at.parse_ok = true;
      result = std::move(parsed);
      if (raw_out) *raw_out = at.raw_response;
    } catch (const Error& e) {
      at.error = e.what();
    }
    st.attempts.push_back(std::move(at));
  }
  st.succeeded = result.has_value();
  if (st.succeeded) trace.llm_calls += 1;
  trace.stages.push_back(std::move(st));
  return result;
}

}  // namespace

PlanResult generate_plan(const PlanningContext& ctx, LlmGateway& gateway,
                         const PromptLibrary& prompts,
                         const PlannerOptions& opts) {
  if (!ctx.graph) throw PreconditionError("generate_plan: context has no graph");
  if (ctx.available.size() < 3)
    throw PreconditionError("generate_plan: need at least 3 available subgoals");

  PlanResult res;
  const std::string graph_desc = prompts.render(
      "graph_grammar", {{"graph_text", ctx.graph_text}});
  std::map<std::string, std::string> values = {
      {"text_obs", ctx.text_obs},
      {"entity_info", ctx.entity_info},
      {"unachieved", join(ctx.unachieved, ", ")},
      {"subgoal_set", join(ctx.available, ", ")},
      {"graph_text", ctx.graph_text},
      {"Graph description", graph_desc},
  };

  auto finish_fallback = [&](const std::string& reason) {
    res.trace.fallback_reason = reason;
    res.plan.subgoals = frontier_plan(ctx);
    res.plan.provenance = PlanProvenance::fallback;
    return res;
  };

  // Ladder part 1: adopt the best-ranked (or first) valid candidate.
  auto adopt_ranked = [&](const std::vector<std::string>& order, size_t from,
                          const std::string& reason) -> std::optional<PlanResult> {
    for (size_t i = from; i < order.size(); ++i) {
      auto it = std::find_if(
          res.trace.candidates.begin(), res.trace.candidates.end(),
          [&](const CandidatePlan& c) { return c.label == order[i]; });
      if (it == res.trace.candidates.end()) continue;
      if (!plan_is_valid(it->subgoals, ctx.available)) continue;
      res.trace.fallback_reason = reason + "; adopted " + it->label;
      res.plan.subgoals = it->subgoals;
      res.plan.provenance = PlanProvenance::fallback;
      return res;
    }
    return std::nullopt;
  };

  // --- actor ---
  std::string actor_raw;
  auto candidates = run_stage<std::vector<CandidatePlan>>(
      gateway, Role::actor, prompts.render("actor_system", values),
      prompts.render("actor_user", values), opts.retries, res.trace,
      [](const std::string& raw) { return parse_actor_output(raw); },
      &actor_raw);
  if (!candidates)
    return finish_fallback("actor stage exhausted retries");
  res.trace.candidates = *candidates;

  // --- critic ---
  std::vector<SubgoalId> mentioned;
  for (const auto& c : *candidates)
    for (const auto& id : c.subgoals)
      if (ctx.graph->has_node(id)) mentioned.push_back(id);
  std::sort(mentioned.begin(), mentioned.end());
  mentioned.erase(std::unique(mentioned.begin(), mentioned.end()), mentioned.end());
  std::map<std::string, std::string> critic_values = values;
  critic_values["actor_output"] = actor_raw;
  critic_values["subgoal_details_text"] =
      render_details(subgoal_details(*ctx.graph, mentioned, 0));

  std::vector<std::string> labels;
  for (const auto& c : *candidates) labels.push_back(c.label);
  auto feedback = run_stage<CriticFeedback>(
      gateway, Role::critic, prompts.render("critic_system", values),
      prompts.render("critic_user", critic_values), opts.retries, res.trace,
      [&](const std::string& raw) { return parse_critic_output(raw, labels); });
  if (!feedback) {
    if (auto adopted = adopt_ranked(labels, 0, "critic stage exhausted retries"))
      return *adopted;
    return finish_fallback("critic stage exhausted retries; no valid candidate");
  }
  res.trace.feedback = *feedback;

  // --- flag short-circuit: adopt the top-ranked plan ---
  if (!feedback->need_modify) {
    const std::string& top = feedback->ranking.front();
    auto it = std::find_if(
        candidates->begin(), candidates->end(),
        [&](const CandidatePlan& c) { return c.label == top; });
    if (it != candidates->end() && plan_is_valid(it->subgoals, ctx.available)) {
      res.plan.subgoals = it->subgoals;
      res.plan.provenance = PlanProvenance::adopted_top_ranked;
      return res;
    }
    if (auto adopted = adopt_ranked(feedback->ranking, 1,
                                    "top-ranked plan failed validation"))
      return *adopted;
    return finish_fallback("top-ranked plan failed validation; no valid candidate");
  }

  // --- refiner ---
  std::map<std::string, std::string> refiner_values = values;
  refiner_values["candidate_plans"] = render_candidates(*candidates);
  refiner_values["critic_feedback"] = render_feedback(*feedback);
  auto refined = run_stage<RefinerOutput>(
      gateway, Role::refiner, prompts.render("refiner_system", values),
      prompts.render("refiner_user", refiner_values), opts.retries, res.trace,
      [&](const std::string& raw) {
        RefinerOutput out = parse_refiner_output(raw);
        if (!plan_is_valid(out.final_plan, ctx.available))
          throw ParseError("Final_Plan: subgoals outside the available set");
        return out;
      });
  if (refined) {
    res.plan.subgoals = refined->final_plan;
    res.plan.provenance = PlanProvenance::refined;
    return res;
  }
  if (auto adopted = adopt_ranked(feedback->ranking, 0,
                                  "refiner stage exhausted retries"))
    return *adopted;
  return finish_fallback("refiner stage exhausted retries; no valid candidate");
}

}  // namespace craftplan
