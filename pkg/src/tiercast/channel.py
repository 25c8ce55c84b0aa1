"""Wireless propagation, SINR/rate computation, and resource-block cost tables.

Distances are in meters, powers in watts, per-link losses in dB. A resource
block (RB) is ``rb_bandwidth`` Hz wide and lasts ``rb_duration`` seconds, so a
link carrying ``r`` bit/s delivers ``rb_duration * r`` bits per RB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Per-link RB cost used when a link's rate underflows to zero. Far above any
# realistic cell budget, so such links are never worth selecting.
UNREACHABLE_RBS = 2**40


class UnreachableUserError(ValueError):
    """A link (or every link of a user) supports zero rate."""


class InstanceConstructionError(ValueError):
    """Instance inputs cannot yield a usable cost table."""


@dataclass(frozen=True)
class ChannelParams:
    """Propagation and radio constants.

    The path-loss slope/intercept defaults follow a WINNER-II urban NLOS
    parameterization: loss(d) = a*log10(d) + b + c*log10(fc/5) + X, with X a
    per-link shadow-fading draw in dB.
    """

    a: float = 36.8          # dB per decade of distance
    b: float = 43.8          # dB intercept
    c: float = 20.0          # dB frequency coefficient
    fc: float = 5.0          # carrier frequency, GHz
    shadow_sigma: float = 0.0  # shadow fading std dev, dB (0 disables)
    tx_power: float = 1.0    # watts
    noise_psd: float = -174.0  # dBm/Hz
    rb_bandwidth: float = 180e3  # Hz per RB
    rb_duration: float = 0.5e-3  # seconds per RB
    # Fraction of co-channel overlap between cells: 1 means every other cell
    # interferes at full power on every RB; 0 models fully orthogonal
    # spectrum allocation across cells.
    interference_scale: float = 1.0

    def __post_init__(self):
        if self.fc <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.rb_bandwidth <= 0 or self.rb_duration <= 0:
            raise ValueError("RB dimensions must be positive")
        if self.tx_power <= 0:
            raise ValueError("tx_power must be positive")
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be nonnegative")

    @property
    def noise_watts(self) -> float:
        """Total noise power over one RB bandwidth, in watts."""
        return 10.0 ** ((self.noise_psd - 30.0) / 10.0) * self.rb_bandwidth


@dataclass(frozen=True)
class RbCostTables:
    """Integer RB costs: ``basic[i, j]`` and ``enhanced[i, j, k]``.

    Every entry is >= 1; links with zero rate carry ``UNREACHABLE_RBS``.
    """

    basic: np.ndarray     # (M, S) int64
    enhanced: np.ndarray  # (M, S, E) int64

    def __post_init__(self):
        if (self.basic < 1).any() or (self.enhanced < 1).any():
            raise ValueError("RB costs must be >= 1")


def path_loss_db(d: float, params: ChannelParams, shadow_draw: float = 0.0) -> float:
    """Path loss in dB at distance ``d`` meters, including a shadow draw in dB."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return (
        params.a * math.log10(d)
        + params.b
        + params.c * math.log10(params.fc / 5.0)
        + shadow_draw
    )


def channel_gain(d: float, params: ChannelParams, shadow_draw: float = 0.0) -> float:
    """Linear channel gain 10^(-loss/10)."""
    return 10.0 ** (-path_loss_db(d, params, shadow_draw) / 10.0)


def sinr(
    user_pos: np.ndarray,
    serving_cell: int,
    cell_positions: np.ndarray,
    params: ChannelParams,
    shadow_field: np.ndarray | None = None,
) -> float:
    """SINR (linear) from ``serving_cell`` to a user, all other cells interfering.

    ``shadow_field`` holds one dB draw per cell link for this user; omit for
    zero shadowing. Every non-serving cell transmits at full power.
    """
    cell_positions = np.asarray(cell_positions, dtype=float)
    n_cells = cell_positions.shape[0]
    if not 0 <= serving_cell < n_cells:
        raise ValueError(f"serving_cell {serving_cell} out of range")
    if shadow_field is None:
        shadow_field = np.zeros(n_cells)

    dists = np.linalg.norm(cell_positions - np.asarray(user_pos, dtype=float), axis=1)
    if (dists <= 0).any():
        raise ValueError("user collocated with a cell (zero distance)")

    gains = np.array(
        [channel_gain(dists[j], params, shadow_field[j]) for j in range(n_cells)]
    )
    signal = params.tx_power * gains[serving_cell]
    interference = params.tx_power * (gains.sum() - gains[serving_cell])
    return signal / (params.noise_watts + params.interference_scale * interference)


def rate_per_rb(sinr_linear: float, params: ChannelParams) -> float:
    """Bits deliverable in one RB at the given linear SINR."""
    if sinr_linear < 0:
        raise ValueError("sinr must be nonnegative")
    return params.rb_duration * params.rb_bandwidth * math.log2(1.0 + sinr_linear)


def rbs_for_payload(payload_bits: float, bits_per_rb: float) -> int:
    """RBs needed for a payload: ceil(payload / bits_per_rb), at least 1."""
    if payload_bits <= 0:
        raise ValueError("payload must be positive")
    if bits_per_rb <= 0:
        raise UnreachableUserError("link supports zero rate")
    return max(1, math.ceil(payload_bits / bits_per_rb))


def link_bits_per_rb(
    cell_positions: np.ndarray,
    user_positions: np.ndarray,
    params: ChannelParams,
    shadow: np.ndarray,
) -> np.ndarray:
    """Bits per RB for every (user, cell) link, vectorized.

    Equivalent to composing sinr() and rate_per_rb() link by link.
    """
    cell_positions = np.asarray(cell_positions, dtype=float)
    user_positions = np.asarray(user_positions, dtype=float)
    dists = np.linalg.norm(
        user_positions[:, None, :] - cell_positions[None, :, :], axis=2
    )
    if (dists <= 0).any():
        raise ValueError("user collocated with a cell (zero distance)")
    loss = (
        params.a * np.log10(dists)
        + params.b
        + params.c * math.log10(params.fc / 5.0)
        + shadow
    )
    gains = 10.0 ** (-loss / 10.0)
    rx = params.tx_power * gains
    total = rx.sum(axis=1, keepdims=True)
    s = rx / (params.noise_watts + params.interference_scale * (total - rx))
    return params.rb_duration * params.rb_bandwidth * np.log2(1.0 + s)


def build_rb_tables(
    cell_positions: np.ndarray,
    user_positions: np.ndarray,
    params: ChannelParams,
    basic_size: float,
    view_sizes: np.ndarray,
    seed: int = 0,
) -> RbCostTables:
    """Fill per-link RB cost tables for the basic view and each enhanced view.

    Shadow fading is drawn once per (user, cell) link from N(0, shadow_sigma).
    Raises InstanceConstructionError if some user has zero rate to every cell.
    """
    view_sizes = np.asarray(view_sizes, dtype=float)
    n_users = np.asarray(user_positions).shape[0]
    n_cells = np.asarray(cell_positions).shape[0]
    n_views = view_sizes.shape[0]
    if n_users == 0 or n_cells == 0 or n_views == 0:
        raise InstanceConstructionError("topology and view list must be nonempty")
    if basic_size <= 0 or (view_sizes <= 0).any():
        raise ValueError("payload sizes must be positive")

    rng = np.random.default_rng(seed)
    shadow = rng.normal(0.0, params.shadow_sigma, size=(n_users, n_cells))
    bits = link_bits_per_rb(cell_positions, user_positions, params, shadow)

    dead = bits <= 0.0
    if dead.all(axis=1).any():
        i = int(np.flatnonzero(dead.all(axis=1))[0])
        raise InstanceConstructionError(f"user {i} has zero rate to every cell")

    with np.errstate(divide="ignore"):
        basic = np.clip(np.ceil(basic_size / bits), 1, UNREACHABLE_RBS)
        enhanced = np.clip(
            np.ceil(view_sizes[None, None, :] / bits[:, :, None]), 1, UNREACHABLE_RBS
        )
    basic = np.where(dead, UNREACHABLE_RBS, basic).astype(np.int64)
    enhanced = np.where(dead[:, :, None], UNREACHABLE_RBS, enhanced).astype(np.int64)
    return RbCostTables(basic=basic, enhanced=enhanced)
