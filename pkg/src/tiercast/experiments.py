"""Experiment configuration, named presets, and seeded instance building.

Each figure-reproduction preset pins one sweep axis over Table-style default
settings: small scale is 50 users / 10 cells / 5 views, large scale is
500 / 100 / 20, with 50,000 RBs per cell, 2 Mb basic and enhanced views, and
a 1,000 m map. The master seed may be overridden with the ``TIERCAST_SEED``
environment variable.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams
from .problem import Instance, MULTICAST, UNICAST
from .scenario import (
    Topology,
    build_instance,
    generate_demands,
    generate_sharing_groups,
    generate_topology,
    place_caches,
)

CONFIG_SCHEMA = "config/v1"
SEED_ENV_VAR = "TIERCAST_SEED"

SWEEP_PARAMS = (
    "none",
    "n_views",
    "n_cells",
    "n_users",
    "eva_p",
    "cache_capacity",
)


@dataclass
class ExperimentConfig:
    """One experiment: scenario counts, physics, solver list, sweep, seeds."""

    scenario: str = "hotspot"  # cell placement; users are always uniform
    n_users: int = 50
    n_cells: int = 10
    n_views: int = 5
    cache_capacity: int | None = None  # default ceil(n_views / 2)
    views_per_user: int | None = None  # default n_views (every user wants all)
    popularity_skew: float = 0.8
    rb_budget: int = 50_000
    basic_size: float = 2e6
    view_size: float = 2e6
    map_radius: float = 1000.0
    hotspot_sigma: float = 200.0
    # Experiment default: orthogonal spectrum across cells. Ten cells at
    # 50,000 RB/s of 180 kHz x 0.5 ms each occupy 45 MHz of the 100 MHz
    # system band, so the small-scale deployment needs no co-channel reuse.
    channel: ChannelParams = field(
        default_factory=lambda: ChannelParams(interference_scale=0.0)
    )
    solvers: list[str] = field(default_factory=lambda: ["bb", "elva", "eva", "sinr"])
    eva_p: float = 1.0
    elva_T: float | None = None
    node_budget: int | None = 1_000_000
    bruteforce_cap: int = 10**6
    modes: list[str] = field(default_factory=lambda: [UNICAST])
    sharing_fraction: float = 0.0
    sweep_param: str = "none"
    sweep_values: list = field(default_factory=lambda: [None])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    master_seed: int = 0
    preset: str = ""

    def __post_init__(self):
        if self.sweep_param not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep_param {self.sweep_param!r}")
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        for mode in self.modes:
            if mode not in (UNICAST, MULTICAST):
                raise ValueError(f"unknown mode {mode!r}")
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            self.master_seed = int(env_seed)

    def at_sweep_value(self, value) -> "ExperimentConfig":
        """Resolve one sweep point into a concrete configuration."""
        cfg = dataclasses.replace(self)
        cfg.sweep_param = "none"
        cfg.sweep_values = [None]
        if self.sweep_param != "none":
            setattr(cfg, self.sweep_param, value)
        return cfg

    @property
    def effective_cache_capacity(self) -> int:
        if self.cache_capacity is not None:
            return self.cache_capacity
        return math.ceil(self.n_views / 2)

    @property
    def effective_views_per_user(self) -> int:
        if self.views_per_user is not None:
            return min(self.views_per_user, self.n_views)
        return self.n_views

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["schema"] = CONFIG_SCHEMA
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        schema = data.pop("schema", CONFIG_SCHEMA)
        if schema != CONFIG_SCHEMA:
            raise ValueError(f"expected schema {CONFIG_SCHEMA!r}, got {schema!r}")
        channel = data.get("channel")
        if isinstance(channel, dict):
            data["channel"] = ChannelParams(**channel)
        return cls(**data)


def derive_seed(base: int, stream: int) -> int:
    """Independent child seed for one generation stage of one replication."""
    return int(np.random.SeedSequence((base, stream)).generate_state(1)[0])


def build_experiment_instance(
    config: ExperimentConfig, seed: int
) -> tuple[Instance, Topology]:
    """Generate the full instance for one replication seed."""
    base = config.master_seed + seed
    topology = generate_topology(
        config.scenario,
        config.n_cells,
        config.n_users,
        map_radius=config.map_radius,
        hotspot_sigma=config.hotspot_sigma,
        seed=derive_seed(base, 0),
    )
    demands = generate_demands(
        config.n_users,
        config.n_views,
        config.effective_views_per_user,
        popularity_skew=config.popularity_skew,
        seed=derive_seed(base, 1),
    )
    placement = place_caches(
        demands, topology, config.effective_cache_capacity, seed=derive_seed(base, 2)
    )
    sharing = None
    if config.sharing_fraction > 0:
        sharing = generate_sharing_groups(
            config.n_users,
            config.n_cells,
            config.n_views,
            config.sharing_fraction,
            seed=derive_seed(base, 3),
        )
    instance = build_instance(
        topology,
        demands,
        placement,
        config.channel,
        rb_budget=config.rb_budget,
        basic_size=config.basic_size,
        view_sizes=config.view_size,
        sharing=sharing,
        seed=derive_seed(base, 4),
    )
    return instance, topology


def _small(**kwargs) -> ExperimentConfig:
    return ExperimentConfig(**kwargs)


PRESETS = {
    "fig3": lambda: _small(
        preset="fig3", sweep_param="n_views", sweep_values=[1, 2, 3, 4, 5]
    ),
    "fig4": lambda: _small(
        preset="fig4",
        sweep_param="n_views",
        sweep_values=[1, 2, 3, 4, 5],
        modes=[UNICAST, MULTICAST],
        sharing_fraction=1.0,
        solvers=["elva", "eva", "sinr"],
    ),
    "fig6": lambda: _small(
        preset="fig6",
        sweep_param="n_cells",
        sweep_values=[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    ),
    "fig7": lambda: _small(
        preset="fig7", sweep_param="n_users", sweep_values=[10, 20, 30, 40, 50]
    ),
    "fig8": lambda: _small(
        preset="fig8",
        sweep_param="eva_p",
        sweep_values=[1, 2, 3, 4, 5],
        solvers=["eva"],
    ),
    "fig9": lambda: _small(
        preset="fig9",
        n_views=10,
        views_per_user=2,
        sweep_param="cache_capacity",
        sweep_values=[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    ),
    "fig10": lambda: _small(
        preset="fig10",
        n_users=500,
        n_cells=100,
        n_views=20,
        solvers=["elva", "eva", "sinr"],
        seeds=[0, 1, 2],
    ),
}


def preset_config(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def run_solver(name: str, instance: Instance, config: ExperimentConfig, mode: str):
    """Dispatch one solver by name with the config's parameters."""
    from . import solvers

    if name == "bb":
        return solvers.solve_bb(instance, node_budget=config.node_budget, mode=mode)
    if name == "elva":
        return solvers.solve_elva(instance, T=config.elva_T, mode=mode)
    if name == "eva":
        return solvers.solve_eva(instance, p=config.eva_p, mode=mode)
    if name == "sinr":
        return solvers.solve_sinr(instance, mode=mode)
    if name == "bruteforce":
        return solvers.solve_bruteforce(instance, cap=config.bruteforce_cap, mode=mode)
    raise ValueError(f"unknown solver {name!r}")


SWEEP_CSV_COLUMNS = (
    "preset",
    "sweep_param",
    "sweep_value",
    "seed",
    "mode",
    "solver",
    "objective",
    "gap",
    "jain",
    "mean_utilization",
    "feasible",
    "wall_time",
    "status",
)


def run_sweep(config: ExperimentConfig):
    """Yield one result row per (sweep value, seed, mode, solver).

    Rows are plain dicts keyed by SWEEP_CSV_COLUMNS, emitted in deterministic
    order. Per-cell failures are recorded in the row's status and the sweep
    continues.
    """
    from .metrics import summarize
    from .problem import is_feasible

    for value in config.sweep_values:
        point = config.at_sweep_value(value)
        for seed in config.seeds:
            try:
                instance, _ = build_experiment_instance(point, seed)
            except Exception as exc:  # recorded per row, sweep continues
                for mode in config.modes:
                    for solver in point.solvers:
                        yield {
                            "preset": config.preset,
                            "sweep_param": config.sweep_param,
                            "sweep_value": value,
                            "seed": seed,
                            "mode": mode,
                            "solver": solver,
                            "objective": "",
                            "gap": "",
                            "jain": "",
                            "mean_utilization": "",
                            "feasible": "",
                            "wall_time": "",
                            "status": f"generation failed: {exc}",
                        }
                continue
            for mode in config.modes:
                results = {}
                errors = {}
                for solver in point.solvers:
                    try:
                        results[solver] = run_solver(solver, instance, point, mode)
                    except Exception as exc:
                        errors[solver] = str(exc)
                summary = summarize(instance, results, mode) if results else None
                for solver in point.solvers:
                    if solver in errors:
                        yield {
                            "preset": config.preset,
                            "sweep_param": config.sweep_param,
                            "sweep_value": value,
                            "seed": seed,
                            "mode": mode,
                            "solver": solver,
                            "objective": "",
                            "gap": "",
                            "jain": "",
                            "mean_utilization": "",
                            "feasible": "",
                            "wall_time": "",
                            "status": errors[solver],
                        }
                        continue
                    solution, report = results[solver]
                    row = summary.row(solver)
                    feasible = is_feasible(instance, solution, mode).feasible
                    yield {
                        "preset": config.preset,
                        "sweep_param": config.sweep_param,
                        "sweep_value": value,
                        "seed": seed,
                        "mode": mode,
                        "solver": solver,
                        "objective": report.objective,
                        "gap": row.gap,
                        "jain": "" if row.jain is None else row.jain,
                        "mean_utilization": row.mean_utilization,
                        "feasible": feasible,
                        "wall_time": report.wall_time,
                        "status": "ok",
                    }
