#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "craftplan/error.hpp"
#include "craftplan/harness.hpp"
#include "craftplan/knowledge_extract.hpp"
#include "craftplan/verbalize.hpp"

namespace fs = std::filesystem;
using namespace craftplan;

namespace {

// Apply "--backend kind[:path]" on top of a loaded config. The path names the
// mock rule table or the replay transcript; http keeps the configured wiring.
void apply_backend_override(RunConfig& cfg, const std::string& spec) {
  std::string kind = spec, path;
  size_t colon = spec.find(':');
  if (colon != std::string::npos) {
    kind = spec.substr(0, colon);
    path = spec.substr(colon + 1);
  }
  if (kind == "mock") {
    cfg.llm.kind = BackendConfig::Kind::mock;
    if (!path.empty()) cfg.llm.script_path = path;
    if (cfg.llm.script_path.empty())
      throw PreconditionError("--backend mock needs a rule table path");
  } else if (kind == "replay") {
    cfg.llm.kind = BackendConfig::Kind::replay;
    if (!path.empty()) cfg.llm.transcript_path = path;
    if (cfg.llm.transcript_path.empty())
      throw PreconditionError("--backend replay needs a transcript path");
  } else if (kind == "http") {
    cfg.llm.kind = BackendConfig::Kind::http;
    if (!path.empty()) cfg.llm.endpoint = path;
    if (cfg.llm.endpoint.empty())
      throw PreconditionError("--backend http needs an endpoint");
  } else {
    throw PreconditionError("unknown backend kind: " + kind);
  }
}

int print_findings(const ValidationReport& report) {
  if (report.ok()) {
    std::cout << "ok: no findings\n";
    return 0;
  }
  for (const auto& f : report.findings)
    std::cout << f.code << ": " << f.message << "\n";
  std::cout << report.findings.size() << " finding(s)\n";
  return 1;
}

std::set<SubgoalId> parse_id_list(const std::string& csv) {
  std::set<SubgoalId> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t a = item.find_first_not_of(" \t");
    size_t b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    out.insert(item.substr(a, b - a + 1));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"craftplan: subgoal-graph guided planning on a crafting gridworld"};
  app.require_subcommand(1);

  std::string config_path, graph_path, kb_path, obs_path, achieved_csv;
  std::string backend_spec, out_path, out_dir;
  std::vector<std::string> doc_paths, runlog_paths;
  uint64_t seed = 0;
  bool seed_set = false, weighted = false;
  long steps = 0;
  std::string policy;

  CLI::App* c_validate = app.add_subcommand("validate", "check a graph and KB");
  c_validate->add_option("--config", config_path, "run config (paths pulled from it)");
  c_validate->add_option("--graph", graph_path, "subgoal graph JSON");
  c_validate->add_option("--kb", kb_path, "entity KB JSON");

  CLI::App* c_verbalize = app.add_subcommand("verbalize", "print the graph grammar text");
  c_verbalize->add_option("--graph", graph_path, "subgoal graph JSON")->required();
  c_verbalize->add_flag("--weights", weighted, "append success-rate suffixes");

  CLI::App* c_plan = app.add_subcommand("plan", "run the planning pipeline once");
  c_plan->add_option("--config", config_path, "run config")->required();
  c_plan->add_option("--obs", obs_path, "observation text file")->required();
  c_plan->add_option("--achieved", achieved_csv, "comma-separated achieved subgoals");
  c_plan->add_option("--backend", backend_spec, "override: kind[:path]");
  c_plan->add_option("--out", out_dir, "directory for the transcript");

  CLI::App* c_run = app.add_subcommand("run", "full experiment loop");
  c_run->add_option("--config", config_path, "run config")->required();
  c_run->add_option("--seed", seed, "seed override")->trigger_on_parse()
      ->each([&](const std::string&) { seed_set = true; });
  c_run->add_option("--steps", steps, "max primitive steps override");
  c_run->add_option("--policy", policy, "policy override (scripted|random|tabular)");
  c_run->add_option("--backend", backend_spec, "override: kind[:path]");
  c_run->add_option("--out", out_dir, "output directory override");

  CLI::App* c_summarize = app.add_subcommand("summarize", "aggregate run logs");
  c_summarize->add_option("runlogs", runlog_paths, "runlog.jsonl paths")->required();
  c_summarize->add_option("--out", out_path, "also write the summary JSON here");

  CLI::App* c_extract = app.add_subcommand("extract", "bootstrap graph and KB from documents");
  c_extract->add_option("--config", config_path, "run config (llm + prompts)")->required();
  c_extract->add_option("--doc", doc_paths, "manual/document text file")->required();
  c_extract->add_option("--backend", backend_spec, "override: kind[:path]");
  c_extract->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_validate) {
      if (!config_path.empty()) {
        RunConfig cfg = load_run_config(config_path);
        graph_path = cfg.graph_path;
        kb_path = cfg.kb_path;
      }
      if (graph_path.empty())
        throw PreconditionError("validate needs --graph or --config");
      SubgoalGraph g = load_graph(graph_path);
      ValidationReport report = validate_graph(g);
      if (!kb_path.empty()) {
        ValidationReport krep = validate_kb(load_kb(kb_path), g);
        report.findings.insert(report.findings.end(), krep.findings.begin(),
                               krep.findings.end());
      }
      return print_findings(report);
    }

    if (*c_verbalize) {
      SubgoalGraph g = load_graph(graph_path);
      std::cout << verbalize(g, {weighted}) << "\n";
      return 0;
    }

    if (*c_plan) {
      RunConfig cfg = load_run_config(config_path);
      if (!backend_spec.empty()) apply_backend_override(cfg, backend_spec);
      SubgoalGraph g = load_graph(cfg.graph_path);
      EntityKB kb = load_kb(cfg.kb_path);
      PromptLibrary prompts = PromptLibrary::from_directory(cfg.prompt_dir);
      TextObservation obs = parse_observation(read_text_file(obs_path));
      std::string transcript;
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        transcript = (fs::path(out_dir) / "transcript.jsonl").string();
      }
      LlmGateway gateway(cfg.llm, transcript);
      PlanningContext ctx =
          build_context(obs, g, kb, parse_id_list(achieved_csv));
      PlanResult res = generate_plan(ctx, gateway, prompts, cfg.planner);
      json out;
      out["plan"] = res.plan.subgoals;
      out["provenance"] = provenance_to_string(res.plan.provenance);
      out["trace"] = res.trace.to_json();
      std::cout << canonical_dump(out);
      return 0;
    }

    if (*c_run) {
      RunConfig cfg = load_run_config(config_path);
      if (seed_set) cfg.seed = seed;
      if (steps > 0) cfg.max_steps = steps;
      if (!policy.empty()) cfg.policy = policy;
      if (!backend_spec.empty()) apply_backend_override(cfg, backend_spec);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      RunResult res = run_experiment(cfg);
      std::cout << canonical_dump(res.metrics);
      if (!cfg.out_dir.empty())
        std::cerr << "wrote " << (fs::path(cfg.out_dir) / "runlog.jsonl").string()
                  << "\n";
      return 0;
    }

    if (*c_summarize) {
      json summary = summarize_files(runlog_paths);
      std::cout << render_summary_table(summary);
      if (!out_path.empty()) write_json_file(out_path, summary);
      return 0;
    }

    if (*c_extract) {
      RunConfig cfg = load_run_config(config_path);
      if (!backend_spec.empty()) apply_backend_override(cfg, backend_spec);
      std::vector<std::string> docs;
      for (const std::string& p : doc_paths) docs.push_back(read_text_file(p));
      PromptLibrary prompts = PromptLibrary::from_directory(cfg.prompt_dir);
      fs::create_directories(out_dir);
      LlmGateway gateway(cfg.llm,
                         (fs::path(out_dir) / "transcript.jsonl").string());
      ExtractResult res = extract_knowledge(docs, gateway, prompts);
      write_json_file((fs::path(out_dir) / "subgoal_graph.json").string(),
                      res.graph_draft);
      write_json_file((fs::path(out_dir) / "entity_kb.json").string(),
                      res.kb_draft);
      write_json_file((fs::path(out_dir) / "extract_report.json").string(),
                      res.report.to_json());
      return print_findings(res.report);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
