"""Packet-forwarding game with a reputation constraint on cooperative nodes.

Two node classes interact pairwise: doves forward packets with probability
``s_d`` (good-reputation source) or ``s_h`` (bad-reputation source) and must
keep a non-negative expected reputation drift; hawks never forward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# feasibility slack for the grid oracle
DRIFT_TOL = 1e-12


class NonViableRegimeError(ValueError):
    """Raised when lambda <= 1, where forwarding can never pay off."""


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class GameParams:
    """Model constants.

    ``lam`` is the benefit of a relayed packet per unit of energy spent.
    ``delta_g`` defaults to ``delta_r``; it only matters when ``s_d < 1``.
    """

    lam: float
    delta_r: float
    delta_b: float
    delta_g: Optional[float] = None

    def __post_init__(self):
        if self.delta_g is None:
            object.__setattr__(self, "delta_g", self.delta_r)
        for name in ("lam", "delta_r", "delta_g", "delta_b"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if self.delta_b > self.delta_g:
            raise ValueError(
                f"delta_b ({self.delta_b}) must not exceed delta_g ({self.delta_g})"
            )

    @property
    def viable(self) -> bool:
        return self.lam > 1

    def require_viable(self) -> None:
        if not self.viable:
            raise NonViableRegimeError(
                f"non-viable regime (lambda <= 1): lambda={self.lam}"
            )


@dataclass(frozen=True)
class DoveStrategy:
    s_d: float
    s_h: float

    def __post_init__(self):
        _check_prob("s_d", self.s_d)
        _check_prob("s_h", self.s_h)


@dataclass(frozen=True)
class PayoffMatrix:
    """Row player's payoffs over {C, NC} x {C, NC}."""

    entries: np.ndarray = field(repr=True)

    STRATEGIES = ("C", "NC")

    def __getitem__(self, key):
        row, col = key
        if isinstance(row, str):
            row = self.STRATEGIES.index(row)
        if isinstance(col, str):
            col = self.STRATEGIES.index(col)
        return float(self.entries[row, col])


@dataclass(frozen=True)
class PopulationState:
    p: float

    def __post_init__(self):
        _check_share(self.p)

    @property
    def hawk_share(self) -> float:
        return 1.0 - self.p


def _check_prob(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


def _check_share(p: float) -> None:
    _check_prob("p", p)


def payoff_matrix(params: GameParams) -> PayoffMatrix:
    lam = params.lam
    return PayoffMatrix(np.array([[lam - 1.0, -1.0], [lam, 0.0]]))


def dove_utility(params: GameParams, strat: DoveStrategy, p: float) -> float:
    """Expected payoff of a dove: relayed packets from doves minus energy spent on hawks."""
    _check_share(p)
    return (params.lam - 1.0) * p * strat.s_d - strat.s_h * (1.0 - p)


def hawk_utility(params: GameParams, s_h: float, p: float) -> float:
    _check_share(p)
    _check_prob("s_h", s_h)
    return params.lam * p * s_h


def mean_utility(params: GameParams, strat: DoveStrategy, p: float) -> float:
    return p * dove_utility(params, strat, p) + (1.0 - p) * hawk_utility(params, strat.s_h, p)


def reputation_drift(params: GameParams, strat: DoveStrategy, p: float) -> float:
    """Expected per-decision reputation change of a dove; the constraint is drift >= 0."""
    _check_share(p)
    s_d, s_h = strat.s_d, strat.s_h
    good = s_d * params.delta_r - (1.0 - s_d) * params.delta_g
    bad = s_h * params.delta_r - (1.0 - s_h) * params.delta_b
    return p * good + (1.0 - p) * bad


def s_h_cutoff(params: GameParams) -> float:
    """Dove share at and above which doves need not serve hawks at all."""
    return params.delta_b / (params.delta_b + params.delta_r)


def optimal_s_h(params: GameParams, p: float) -> float:
    """Smallest s_h keeping the drift non-negative when s_d = 1."""
    _check_share(p)
    if p >= s_h_cutoff(params):
        # covers p == 1, where the closed form divides by zero
        return 0.0
    db, dr = params.delta_b, params.delta_r
    value = ((1.0 - p) * db - p * dr) / ((db + dr) * (1.0 - p))
    return max(value, 0.0)


def optimal_dove_strategy(params: GameParams, p: float) -> DoveStrategy:
    """Closed-form utility maximizer under the reputation constraint.

    With lambda > 1 the dove utility grows with ``s_d``, so ``s_d = 1`` and
    ``s_h`` is pushed down until the constraint binds.
    """
    params.require_viable()
    return DoveStrategy(1.0, optimal_s_h(params, p))


def brute_force_dove_strategy(params: GameParams, p: float, grid_steps: int) -> DoveStrategy:
    """Exhaustive grid search over (s_d, s_h) in {0, 1/g, ..., 1}^2.

    Among maximizers the smallest ``s_h`` wins, then the largest ``s_d``.
    """
    if grid_steps < 2:
        raise ValueError(f"grid_steps must be >= 2, got {grid_steps}")
    _check_share(p)
    g = np.linspace(0.0, 1.0, grid_steps + 1)
    dr, dg, db = params.delta_r, params.delta_g, params.delta_b

    # both objective and constraint are separable: row term (s_d) + column term (s_h)
    drift = np.add.outer(p * (g * dr - (1.0 - g) * dg), (1.0 - p) * (g * dr - (1.0 - g) * db))
    utility = np.add.outer((params.lam - 1.0) * p * g, -g * (1.0 - p))
    utility[drift < -DRIFT_TOL] = -np.inf

    best = utility.max()
    if not np.isfinite(best):
        raise InfeasibleError("no grid point satisfies the reputation constraint")
    winners = utility >= best - 1e-12
    j = int(np.argmax(winners.any(axis=0)))  # smallest s_h column holding a maximizer
    i = len(g) - 1 - int(np.argmax(winners[::-1, j]))  # largest s_d within it
    return DoveStrategy(float(g[i]), float(g[j]))
