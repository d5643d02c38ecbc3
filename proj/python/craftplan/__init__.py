"""Python surface for the craftplan core.

JSON crosses the extension boundary as strings; these helpers decode it so
callers get plain dicts and lists.
"""

import json as _json

from . import _core
from ._core import CraftplanError, Graph, GridCraft, fingerprint, score

__all__ = [
    "CraftplanError",
    "Graph",
    "GridCraft",
    "fingerprint",
    "graph_dict",
    "graph_findings",
    "load_graph",
    "run",
    "score",
    "summarize",
]


def load_graph(path):
    return Graph.from_file(str(path))


def graph_dict(graph):
    return _json.loads(graph.to_json())


def graph_findings(graph):
    return _json.loads(graph.validate())["findings"]


def run(config_path, seed=-1, steps=-1, out_dir=""):
    return _json.loads(_core.run(str(config_path), seed, steps, str(out_dir)))


def summarize(runlog_paths):
    return _json.loads(_core.summarize([str(p) for p in runlog_paths]))
