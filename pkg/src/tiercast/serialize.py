"""Versioned JSON serialization for topologies, instances, and solutions.

Schemas carry a ``schema`` tag (e.g. ``instance/v1``). Arrays serialize as
nested lists; sparse structures (allocations, sharing groups) as index
tuples. Dumps are deterministic: sorted keys, fixed separators.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .problem import Instance, Solution
from .scenario import Topology

TOPOLOGY_SCHEMA = "topology/v1"
INSTANCE_SCHEMA = "instance/v1"
SOLUTION_SCHEMA = "solution/v1"


class SchemaError(ValueError):
    """Payload does not match the expected schema tag or shape."""


def _dump(obj: dict, path) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    )


def _load(path, expected_schema: str) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema") != expected_schema:
        raise SchemaError(
            f"expected schema {expected_schema!r}, got {data.get('schema')!r}"
        )
    return data


def topology_to_dict(topology: Topology) -> dict:
    return {
        "schema": TOPOLOGY_SCHEMA,
        "cell_positions": topology.cell_positions.tolist(),
        "user_positions": topology.user_positions.tolist(),
        "map_radius": topology.map_radius,
    }


def topology_from_dict(data: dict) -> Topology:
    return Topology(
        cell_positions=np.asarray(data["cell_positions"], dtype=float),
        user_positions=np.asarray(data["user_positions"], dtype=float),
        map_radius=float(data["map_radius"]),
    )


def instance_to_dict(instance: Instance) -> dict:
    sharing = None
    if instance.sharing is not None:
        sharing = [
            [j, k, sorted(int(i) for i in users)]
            for j, groups in sorted(instance.sharing.items())
            for k, users in sorted(groups.items())
        ]
    return {
        "schema": INSTANCE_SCHEMA,
        "n_users": instance.n_users,
        "n_cells": instance.n_cells,
        "n_views": instance.n_views,
        "w": instance.w.tolist(),
        "rb_budget": instance.rb_budget.tolist(),
        "rb_basic": instance.rb_basic.tolist(),
        "rb_enhanced": instance.rb_enhanced.tolist(),
        "sharing": sharing,
    }


def instance_from_dict(data: dict) -> Instance:
    sharing = None
    if data.get("sharing") is not None:
        sharing = {}
        for j, k, users in data["sharing"]:
            sharing.setdefault(int(j), {})[int(k)] = frozenset(int(i) for i in users)
    return Instance(
        n_users=int(data["n_users"]),
        n_cells=int(data["n_cells"]),
        n_views=int(data["n_views"]),
        w=np.asarray(data["w"], dtype=np.int8),
        rb_budget=np.asarray(data["rb_budget"], dtype=np.int64),
        rb_basic=np.asarray(data["rb_basic"], dtype=np.int64),
        rb_enhanced=np.asarray(data["rb_enhanced"], dtype=np.int64),
        sharing=sharing,
    )


def solution_to_dict(solution: Solution) -> dict:
    return {
        "schema": SOLUTION_SCHEMA,
        "assoc": solution.assoc.tolist(),
        "alloc": [
            [int(i), int(k), float(y)]
            for (i, k), y in sorted(solution.alloc.items())
        ],
    }


def solution_from_dict(data: dict) -> Solution:
    return Solution(
        assoc=np.asarray(data["assoc"], dtype=np.int64),
        alloc={(int(i), int(k)): float(y) for i, k, y in data["alloc"]},
    )


def save_topology(topology: Topology, path) -> None:
    _dump(topology_to_dict(topology), path)


def load_topology(path) -> Topology:
    return topology_from_dict(_load(path, TOPOLOGY_SCHEMA))


def save_instance(instance: Instance, path) -> None:
    _dump(instance_to_dict(instance), path)


def load_instance(path) -> Instance:
    return instance_from_dict(_load(path, INSTANCE_SCHEMA))


def save_solution(solution: Solution, path) -> None:
    _dump(solution_to_dict(solution), path)


def load_solution(path) -> Solution:
    return solution_from_dict(_load(path, SOLUTION_SCHEMA))
