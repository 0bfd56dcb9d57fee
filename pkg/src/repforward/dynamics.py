"""Replicator dynamics, equilibria and ESS checks for the dove/hawk forwarding game."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .game import (
    DoveStrategy,
    GameParams,
    dove_utility,
    hawk_utility,
    mean_utility,
    optimal_s_h,
)

CONVERGENCE_TOL = 1e-10
METHODS = ("euler", "rk4")
MODES = ("constrained", "baseline")

DEFAULT_Q_GRID = tuple(round(0.05 * k, 10) for k in range(1, 21))
DEFAULT_EPS_GRID = tuple(round(0.005 * k, 10) for k in range(1, 200))


@dataclass
class Trajectory:
    """Fixed-step solution of the replicator ODE plus per-sample utilities.

    ``s_h`` holds the dove's hawk-forwarding probability in force at each
    sample: the optimum in constrained mode, 1 in baseline mode.
    """

    times: np.ndarray
    p: np.ndarray
    u_dove: np.ndarray
    u_hawk: np.ndarray
    u_mean: np.ndarray
    s_h: np.ndarray
    mode: str = "constrained"
    method: str = "rk4"
    converged: bool = False
    t_converged: Optional[float] = None

    def __len__(self):
        return len(self.times)

    @property
    def final_p(self) -> float:
        return float(self.p[-1])

    def p_at(self, t: float) -> float:
        """Sample nearest to time ``t``."""
        idx = int(np.clip(np.searchsorted(self.times, t), 0, len(self.times) - 1))
        if idx > 0 and abs(self.times[idx - 1] - t) <= abs(self.times[idx] - t):
            idx -= 1
        return float(self.p[idx])

    def rows(self):
        for k in range(len(self.times)):
            yield (
                float(self.times[k]),
                float(self.p[k]),
                float(self.u_dove[k]),
                float(self.u_hawk[k]),
                float(self.u_mean[k]),
                float(self.s_h[k]),
            )


@dataclass
class EquilibriumReport:
    params: GameParams
    p_T: float
    fixed_points: List[float]
    ess_points: List[float]
    mixed_ne: float
    barriers: Dict[float, str] = field(default_factory=dict)

    def invasion_barrier(self, p_star: float, q: float) -> float:
        """Analytic barrier of an ESS against mutant profile ``q``."""
        if p_star == 1.0:
            return 1.0
        if p_star == 0.0:
            if q <= 0:
                return 1.0
            prm = self.params
            return min(prm.delta_b / (prm.delta_r * q * (prm.lam - 1.0)), 1.0)
        raise ValueError(f"{p_star} is not an ESS of this game")


@dataclass
class EssProbe:
    resident: float
    mutant: float
    epsilon: float
    payoff_gap: float

    @property
    def mixed_profile(self) -> float:
        return (1.0 - self.epsilon) * self.resident + self.epsilon * self.mutant


@dataclass
class EssVerdict:
    p_star: float
    is_ess: bool
    # per mutant q: largest sampled epsilon below which every sampled gap is > 0
    # (None if the smallest sampled epsilon already fails)
    barriers: Dict[float, Optional[float]]
    probes: List[EssProbe] = field(repr=False, default_factory=list)

    @property
    def barrier_infimum(self) -> Optional[float]:
        values = list(self.barriers.values())
        if not values or any(v is None for v in values):
            return None
        return min(values)


def general_replicator_rhs(utilities: Sequence[float], shares: Sequence[float]) -> np.ndarray:
    u = np.asarray(utilities, dtype=float)
    x = np.asarray(shares, dtype=float)
    if u.shape != x.shape:
        raise ValueError(f"length mismatch: {u.shape} utilities vs {x.shape} shares")
    if np.any(x < 0) or abs(x.sum() - 1.0) > 1e-9:
        raise ValueError("shares must be a probability vector")
    return x * (u - x @ u)


def forwarding_replicator_rhs(params: GameParams, p: float) -> float:
    """Dove-share growth rate with doves playing the constrained optimum at ``p``."""
    params.require_viable()
    s = optimal_s_h(params, p)
    return p * (1.0 - p) * (p * (params.lam - 1.0) * (1.0 - s) - s)


def baseline_replicator_rhs(params: GameParams, p: float) -> float:
    # s_d = s_h = 1: hawks out-earn doves by exactly 1 at every p
    return p * (1.0 - p) * (
        dove_utility(params, _ALWAYS_FORWARD, p) - hawk_utility(params, 1.0, p)
    )


_ALWAYS_FORWARD = DoveStrategy(1.0, 1.0)


def _step(rhs: Callable[[float], float], p: float, dt: float, method: str) -> float:
    if method == "euler":
        nxt = p + dt * rhs(p)
    else:
        # stages are clamped too: the rhs is only defined on [0, 1]
        k1 = rhs(p)
        k2 = rhs(_clamp(p + 0.5 * dt * k1))
        k3 = rhs(_clamp(p + 0.5 * dt * k2))
        k4 = rhs(_clamp(p + dt * k3))
        nxt = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _clamp(nxt)


def _clamp(p: float) -> float:
    return min(max(p, 0.0), 1.0)


def _validate_run(p0: float, dt: float, horizon: float, method: str) -> int:
    if not (0.0 <= p0 <= 1.0):
        raise ValueError(f"p0 must lie in [0, 1], got {p0!r}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not horizon >= dt:
        raise ValueError(f"horizon ({horizon!r}) must be at least dt ({dt!r})")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return int(round(horizon / dt))


def _run(params, p0, dt, horizon, method, rhs, strategy_at, mode) -> Trajectory:
    n_steps = _validate_run(p0, dt, horizon, method)
    times = dt * np.arange(n_steps + 1)
    p = np.empty(n_steps + 1)
    p[0] = p0
    converged, t_conv = False, None
    for k in range(n_steps):
        if not converged and abs(rhs(p[k])) < CONVERGENCE_TOL:
            converged, t_conv = True, float(times[k])
        p[k + 1] = _step(rhs, p[k], dt, method)
    if not converged and abs(rhs(p[-1])) < CONVERGENCE_TOL:
        converged, t_conv = True, float(times[-1])

    u_dove = np.empty_like(p)
    u_hawk = np.empty_like(p)
    u_mean = np.empty_like(p)
    s_h = np.empty_like(p)
    for k, pk in enumerate(p):
        strat = strategy_at(pk)
        u_dove[k] = dove_utility(params, strat, pk)
        u_hawk[k] = hawk_utility(params, strat.s_h, pk)
        u_mean[k] = mean_utility(params, strat, pk)
        s_h[k] = strat.s_h
    return Trajectory(times, p, u_dove, u_hawk, u_mean, s_h, mode, method, converged, t_conv)


def integrate(params: GameParams, p0: float, dt: float = 0.01, horizon: float = 50.0,
              method: str = "rk4") -> Trajectory:
    params.require_viable()
    return _run(
        params, p0, dt, horizon, method,
        rhs=lambda p: forwarding_replicator_rhs(params, p),
        strategy_at=lambda p: DoveStrategy(1.0, optimal_s_h(params, p)),
        mode="constrained",
    )


def integrate_baseline(params: GameParams, p0: float, dt: float = 0.01, horizon: float = 50.0,
                       method: str = "rk4") -> Trajectory:
    """Same dynamics with doves forwarding everything (s_d = s_h = 1)."""
    return _run(
        params, p0, dt, horizon, method,
        rhs=lambda p: baseline_replicator_rhs(params, p),
        strategy_at=lambda p: _ALWAYS_FORWARD,
        mode="baseline",
    )


def run_mode(params: GameParams, mode: str, p0: float, dt: float = 0.01,
             horizon: float = 50.0, method: str = "rk4") -> Trajectory:
    if mode == "constrained":
        return integrate(params, p0, dt, horizon, method)
    if mode == "baseline":
        return integrate_baseline(params, p0, dt, horizon, method)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def threshold_pT(params: GameParams) -> float:
    """Interior mixed equilibrium separating the two basins."""
    params.require_viable()
    return params.delta_b / (params.delta_b + params.lam * params.delta_r)


def equilibrium_report(params: GameParams) -> EquilibriumReport:
    p_T = threshold_pT(params)
    barriers = {
        0.0: "min{delta_b / (delta_r * q * (lambda - 1)), 1}",
        1.0: "1",
    }
    return EquilibriumReport(
        params=params,
        p_T=p_T,
        fixed_points=[0.0, p_T, 1.0],
        ess_points=[0.0, 1.0],
        mixed_ne=p_T,
        barriers=barriers,
    )


def payoff_gap(params: GameParams, p_star: float, q: float, eps: float) -> float:
    """U(p*, x) - U(q, x) at x = (1 - eps) p* + eps q.

    Mean payoff is bilinear in (own profile, population profile), so the gap
    factors as (p* - q) * (x (lambda - 1)(1 - s) - s), with ``s`` frozen at
    the resident's optimal s_h.
    """
    s = optimal_s_h(params, p_star)
    x = (1.0 - eps) * p_star + eps * q
    return (p_star - q) * (x * (params.lam - 1.0) * (1.0 - s) - s)


def classify_ess(params: GameParams, p_star: float,
                 q_grid: Sequence[float] = DEFAULT_Q_GRID,
                 eps_grid: Sequence[float] = DEFAULT_EPS_GRID) -> EssVerdict:
    """Sample the ESS inequality over mutant profiles and invasion fractions.

    The empirical barrier for a mutant is the largest sampled epsilon such
    that every sampled epsilon up to it keeps the resident strictly ahead. If
    no sampled epsilon fails, the barrier is reported as 1.
    """
    if len(q_grid) == 0 or len(eps_grid) == 0:
        raise ValueError("q_grid and eps_grid must be non-empty")
    eps_sorted = sorted(eps_grid)
    if eps_sorted[0] <= 0 or eps_sorted[-1] >= 1:
        raise ValueError("epsilon samples must lie in (0, 1)")
    if any(not (0 <= q <= 1) for q in q_grid):
        raise ValueError("mutant profiles must lie in [0, 1]")

    probes: List[EssProbe] = []
    barriers: Dict[float, Optional[float]] = {}
    for q in q_grid:
        if abs(q - p_star) < 1e-12:
            continue
        barrier: Optional[float] = None
        broken = False
        for eps in eps_sorted:
            gap = payoff_gap(params, p_star, q, eps)
            probes.append(EssProbe(p_star, q, eps, gap))
            if broken:
                continue
            if gap > 0:
                barrier = eps
            else:
                broken = True
        barriers[q] = 1.0 if not broken else barrier
    is_ess = bool(barriers) and all(b is not None for b in barriers.values())
    return EssVerdict(p_star, is_ess, barriers, probes)


def basin_prediction(params: GameParams, p0: float) -> float:
    p_T = threshold_pT(params)
    if p0 < p_T:
        return 0.0
    if p0 > p_T:
        return 1.0
    return p_T
