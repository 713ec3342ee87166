"""Bayesian networks as JSON, compiled to let-terms.

Expected shape::

    {
      "variables": [{"name": "rain"}, {"name": "wet"}],
      "nodes": [
        {"var": "rain", "parents": [], "cpt": [[0.2, 0.8]]},
        {"var": "wet", "parents": ["rain"], "cpt": [[0.9, 0.1], [0.05, 0.95]]}
      ],
      "query": ["wet"]
    }

Every variable is two-state; rows of a node's table are listed per parent
assignment, first parent most significant, true before false, and each row is
[P(true), P(false)]. The compiled term defines each variable in topological
order (ties broken by file order) as `M_<var>(parents...)` and outputs the
query tuple.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .errors import (
    CptShapeMismatch,
    CyclicNetwork,
    NetworkFormatError,
    UnknownQueryVariable,
)
from .parser import SourceProgram
from .syntax import (
    BOOL,
    LetTerm,
    MatApp,
    PLeaf,
    PPair,
    Pattern,
    StochasticMatrix,
    Variable,
)

_NAME_RE = re.compile(r"[a-z_][A-Za-z0-9_']*\Z")


def network_to_program(data: dict) -> SourceProgram:
    if not isinstance(data, dict):
        raise NetworkFormatError("top level must be an object")
    names = _read_variables(data)
    nodes = _read_nodes(data, names)
    order = _topo_order(nodes)
    query = _read_query(data, names)

    matrices: dict[str, StochasticMatrix] = {}
    defs = []
    for name in order:
        parents, cpt = nodes[name]
        entries = np.array(cpt, dtype=float)
        stochastic = bool(np.abs(entries.sum(axis=1) - 1.0).max(initial=0.0) <= 1e-9)
        m = StochasticMatrix(f"M_{name}", (BOOL,) * len(parents), BOOL, entries, stochastic)
        matrices[m.name] = m
        args = tuple(Variable(p, BOOL) for p in parents)
        defs.append((PLeaf(Variable(name, BOOL)), MatApp(m, args)))

    out: Pattern = PLeaf(Variable(query[-1], BOOL))
    for q in reversed(query[:-1]):
        out = PPair(PLeaf(Variable(q, BOOL)), out)
    return SourceProgram(matrices, {}, LetTerm(tuple(defs), out))


def load_network(path: str | Path) -> SourceProgram:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise NetworkFormatError(f"not valid JSON: {err}") from err
    return network_to_program(data)


def _read_variables(data: dict) -> list[str]:
    if not isinstance(data.get("variables"), list) or not data["variables"]:
        raise NetworkFormatError("missing or empty 'variables' list")
    names: list[str] = []
    for entry in data["variables"]:
        if not isinstance(entry, dict) or "name" not in entry:
            raise NetworkFormatError(f"variable entry {entry!r} lacks a name")
        if entry.get("states", 2) != 2:
            raise NetworkFormatError(f"variable {entry['name']}: only two states supported")
        name = entry["name"]
        if not isinstance(name, str) or not _NAME_RE.match(name):
            raise NetworkFormatError(f"bad variable name {name!r}")
        if name in names:
            raise NetworkFormatError(f"variable {name} listed twice")
        names.append(name)
    return names


def _read_nodes(data: dict, names: list[str]) -> dict[str, tuple[list[str], list]]:
    if not isinstance(data.get("nodes"), list):
        raise NetworkFormatError("missing 'nodes' list")
    nodes: dict[str, tuple[list[str], list]] = {}
    for entry in data["nodes"]:
        if not isinstance(entry, dict) or "var" not in entry:
            raise NetworkFormatError(f"node entry {entry!r} lacks a var")
        name = entry["var"]
        if name not in names:
            raise NetworkFormatError(f"node for undeclared variable {name!r}")
        if name in nodes:
            raise NetworkFormatError(f"variable {name} has two nodes")
        parents = entry.get("parents", [])
        if not isinstance(parents, list) or any(p not in names for p in parents):
            raise NetworkFormatError(f"node {name}: bad parents {parents!r}")
        if len(set(parents)) != len(parents):
            raise NetworkFormatError(f"node {name}: repeated parent")
        cpt = entry.get("cpt")
        if not isinstance(cpt, list) or len(cpt) != 2 ** len(parents):
            raise CptShapeMismatch(
                f"node {name}: expected {2 ** len(parents)} rows, got "
                f"{len(cpt) if isinstance(cpt, list) else cpt!r}"
            )
        for row in cpt:
            if not isinstance(row, list) or len(row) != 2:
                raise CptShapeMismatch(f"node {name}: each row needs two probabilities")
        nodes[name] = (parents, cpt)
    for name in names:
        if name not in nodes:
            raise NetworkFormatError(f"variable {name} has no node")
    return nodes


def _topo_order(nodes: dict[str, tuple[list[str], list]]) -> list[str]:
    placed: set[str] = set()
    order: list[str] = []
    pending = list(nodes)
    while pending:
        ready = next(
            (n for n in pending if all(p in placed for p in nodes[n][0])), None
        )
        if ready is None:
            raise CyclicNetwork(f"cycle through {', '.join(sorted(pending))}")
        pending.remove(ready)
        placed.add(ready)
        order.append(ready)
    return order


def _read_query(data: dict, names: list[str]) -> list[str]:
    query = data.get("query")
    if not isinstance(query, list) or not query:
        raise NetworkFormatError("missing or empty 'query' list")
    for q in query:
        if q not in names:
            raise UnknownQueryVariable(f"query variable {q!r} is not declared")
    if len(set(query)) != len(query):
        raise NetworkFormatError("query lists a variable twice")
    return query
