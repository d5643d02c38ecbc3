#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "craftplan/error.hpp"
#include "craftplan/harness.hpp"
#include "craftplan/knowledge_extract.hpp"
#include "craftplan/verbalize.hpp"

namespace py = pybind11;
using namespace craftplan;

// JSON crosses the boundary as strings; the python package decodes them.
// Keeps the binding surface small and the wire format identical to the CLI.

PYBIND11_MODULE(_core, m) {
  m.doc() = "craftplan core bindings";

  py::register_exception<Error>(m, "CraftplanError");

  py::class_<SubgoalGraph>(m, "Graph")
      .def_static("from_file", &load_graph, py::arg("path"))
      .def_static(
          "from_json",
          [](const std::string& text) { return graph_from_json(json::parse(text)); },
          py::arg("text"))
      .def_static("from_verbalized", &parse_verbalized, py::arg("text"))
      .def("node_ids", &SubgoalGraph::node_ids)
      .def("to_json", [](const SubgoalGraph& g) { return canonical_dump(graph_to_json(g)); })
      .def("verbalize",
           [](const SubgoalGraph& g, bool weights) {
             return verbalize(g, {weights});
           },
           py::arg("weights") = false)
      .def("validate",
           [](const SubgoalGraph& g) { return canonical_dump(validate_graph(g).to_json()); })
      .def("depths", [](const SubgoalGraph& g) { return node_depths(g); });

  py::class_<GridCraft>(m, "GridCraft")
      .def(py::init([](const std::string& config_json) {
             WorldConfig cfg = config_json.empty()
                                   ? WorldConfig::defaults()
                                   : world_config_from_json(json::parse(config_json));
             return GridCraft(cfg);
           }),
           py::arg("config_json") = std::string())
      .def("reset",
           [](GridCraft& env, uint64_t seed) { return render_observation(env.reset(seed)); },
           py::arg("seed"))
      .def("step",
           [](GridCraft& env, const std::string& action) {
             StepOutcome out = env.step(action_from_string(action));
             return py::make_tuple(render_observation(out.obs), out.reward,
                                   out.done, out.unlocked);
           },
           py::arg("action"))
      .def("achievements", [](const GridCraft& env) { return env.achievements(); })
      .def_static("action_names", [] {
        std::vector<std::string> names;
        for (int a = 0; a < kActionCount; ++a)
          names.push_back(action_name(static_cast<Action>(a)));
        return names;
      })
      .def_static("achievement_names", &GridCraft::achievement_names);

  m.def("score", &score, py::arg("success_rates"));
  m.def(
      "fingerprint",
      [](const std::string& role, const std::string& user_prompt) {
        return request_fingerprint(role_from_string(role), user_prompt);
      },
      py::arg("role"), py::arg("user_prompt"));
  m.def(
      "run",
      [](const std::string& config_path, long seed, long steps,
         const std::string& out_dir) {
        RunConfig cfg = load_run_config(config_path);
        if (seed >= 0) cfg.seed = static_cast<uint64_t>(seed);
        if (steps > 0) cfg.max_steps = steps;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        return canonical_dump(run_experiment(cfg).metrics);
      },
      py::arg("config_path"), py::arg("seed") = -1, py::arg("steps") = -1,
      py::arg("out_dir") = std::string(),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "summarize",
      [](const std::vector<std::string>& paths) {
        return canonical_dump(summarize_files(paths));
      },
      py::arg("runlog_paths"));
}
