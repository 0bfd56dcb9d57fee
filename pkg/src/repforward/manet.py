"""Agent-based packet forwarding on a random geometric graph.

Nodes are placed uniformly at random and linked when within transmission
range. Each round, every node with pending packets asks one random neighbour
to relay; doves answer according to the source's reputation sign, hawks
always refuse, and the relay's reputation is updated accordingly. The dove
share of the population follows a replicator trajectory epoch by epoch.
"""

from __future__ import annotations

import math
from statistics import NormalDist
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import run_mode
from .game import DoveStrategy, GameParams, optimal_dove_strategy


class NodeClass(str, Enum):
    DOVE = "dove"
    HAWK = "hawk"


@dataclass(frozen=True)
class TopologyConfig:
    n_nodes: int = 50
    area_width: float = 1000.0
    area_height: float = 1000.0
    tx_range: float = 150.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_nodes < 2:
            raise ValueError(f"n_nodes must be >= 2, got {self.n_nodes}")
        if self.area_width <= 0 or self.area_height <= 0:
            raise ValueError("area dimensions must be positive")
        if self.tx_range <= 0:
            raise ValueError("tx_range must be positive")
        if not (0 <= self.rng_seed < 2**64):
            raise ValueError("rng_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Epoch ``k`` samples the replicator trajectory at ``k * horizon / epochs``.
    When ``fixed_p`` is set, classes are assigned once from it and never
    change (no trajectory is integrated). With ``keep_reputation_on_flip``
    a node switching class keeps its reputation; by default it restarts at
    the new class's initial value. ``repair_reputation`` makes doves with
    non-positive reputation forward unconditionally.
    """

    packets_per_node: int = 10
    epochs: int = 200
    rounds_per_epoch: int = 10
    strategy_mode: str = "constrained"
    p0: float = 0.7
    dt: float = 0.01
    horizon: float = 50.0
    method: str = "rk4"
    fixed_p: Optional[float] = None
    keep_reputation_on_flip: bool = False
    repair_reputation: bool = True

    def __post_init__(self):
        for name in ("packets_per_node", "epochs", "rounds_per_epoch"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.strategy_mode not in ("constrained", "baseline"):
            raise ValueError(f"unknown strategy_mode {self.strategy_mode!r}")
        if not (0.0 <= self.p0 <= 1.0):
            raise ValueError(f"p0 must lie in [0, 1], got {self.p0!r}")
        if self.fixed_p is not None and not (0.0 <= self.fixed_p <= 1.0):
            raise ValueError(f"fixed_p must lie in [0, 1], got {self.fixed_p!r}")

    @property
    def epoch_span(self) -> float:
        return self.horizon / self.epochs


@dataclass
class NodeState:
    id: int
    position: Tuple[float, float]
    node_class: NodeClass
    reputation: float = 0.0
    pending_packets: int = 0
    forwarded_count: int = 0
    refused_count: int = 0
    delivered_count: int = 0

    @property
    def is_dove(self) -> bool:
        return self.node_class is NodeClass.DOVE


@dataclass
class Topology:
    positions: np.ndarray
    tx_range: float
    neighbors: List[np.ndarray]

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def isolated(self) -> List[int]:
        return [i for i, nb in enumerate(self.neighbors) if len(nb) == 0]

    def adjacency_matrix(self) -> np.ndarray:
        adj = np.zeros((self.n_nodes, self.n_nodes), dtype=bool)
        for i, nb in enumerate(self.neighbors):
            adj[i, nb] = True
        return adj


@dataclass
class RoundRecord:
    """Per-epoch aggregate.

    ``p`` is the dove share actually played (``n_doves / n_nodes``);
    ``p_trajectory`` is the replicator value it was rounded from.
    ``requests`` counts requests that reached a relay; isolated nodes'
    attempts land in ``unreachable`` instead, so
    ``forwards + refusals + unreachable == attempts``.
    """

    epoch: int
    t: float
    p_trajectory: float
    n_doves: int
    n_nodes: int
    s_d: float
    s_h: float
    requests: int = 0
    forwards: int = 0
    refusals: int = 0
    unreachable: int = 0
    cumulative_forwarded: int = 0
    mean_dove_reputation: float = math.nan
    mean_hawk_reputation: float = math.nan
    dove_decisions: int = 0
    dove_rep_change_sum: float = 0.0
    dove_rep_change_sq_sum: float = 0.0

    @property
    def p(self) -> float:
        return self.n_doves / self.n_nodes

    @property
    def attempts(self) -> int:
        return self.requests + self.unreachable

    @property
    def normalized_forwarded(self) -> float:
        return self.forwards / self.requests if self.requests else 0.0


@dataclass
class SimulationResult:
    records: List[RoundRecord]
    nodes: List[NodeState]
    topology: Topology
    trajectory: object = field(default=None, repr=False)

    @property
    def normalized_forwarded(self) -> np.ndarray:
        return np.array([r.normalized_forwarded for r in self.records])

    @property
    def p_series(self) -> np.ndarray:
        return np.array([r.p for r in self.records])

    @property
    def p_trajectory_series(self) -> np.ndarray:
        return np.array([r.p_trajectory for r in self.records])


def build_topology(positions, tx_range: float) -> Topology:
    pos = np.asarray(positions, dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    adj = dist <= tx_range
    np.fill_diagonal(adj, False)
    neighbors = [np.flatnonzero(row) for row in adj]
    return Topology(pos, tx_range, neighbors)


def generate_topology(cfg: TopologyConfig, rng: Optional[np.random.Generator] = None) -> Topology:
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    xs = rng.uniform(0.0, cfg.area_width, cfg.n_nodes)
    ys = rng.uniform(0.0, cfg.area_height, cfg.n_nodes)
    return build_topology(np.column_stack([xs, ys]), cfg.tx_range)


def reputation_update(R_i: float, d_i: int, R_j: float, params: GameParams) -> float:
    """Relay ``i``'s reputation after deciding ``d_i`` on source ``j``'s packet.

    A source with ``R_j <= 0`` counts as badly reputed.
    """
    if d_i:
        return R_i + params.delta_r
    penalty = params.delta_g if R_j > 0 else params.delta_b
    return R_i - penalty


def relay_decision(relay: NodeState, source_reputation: float, strat: DoveStrategy,
                   rng: np.random.Generator, repair: bool = False) -> bool:
    """True to forward.

    With ``repair``, a dove whose own reputation is not positive forwards
    everything until it is back above zero.
    """
    if not relay.is_dove:
        return False
    if repair and relay.reputation <= 0:
        return True
    prob = strat.s_d if source_reputation > 0 else strat.s_h
    return bool(rng.random() < prob)


def largest_remainder(shares: Sequence[float], total: int) -> List[int]:
    """Integer apportionment of ``total`` by ``shares``; ties go to the lower index."""
    quotas = [s * total for s in shares]
    counts = [math.floor(q) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(shares)), key=lambda k: (-(quotas[k] - counts[k]), k))
    for k in order[:leftover]:
        counts[k] += 1
    return counts


def dove_count(p: float, n_nodes: int) -> int:
    """Two-class largest remainder; the hawk quota is taken as the exact complement."""
    quota = p * n_nodes
    return largest_remainder([quota / n_nodes, (n_nodes - quota) / n_nodes], n_nodes)[0]


def initial_reputation(node_class: NodeClass, params: GameParams) -> float:
    return params.delta_r if node_class is NodeClass.DOVE else -params.delta_b


def assign_classes(nodes: List[NodeState], n_doves: int, rng: np.random.Generator,
                   params: Optional[GameParams] = None) -> List[NodeState]:
    """Flip the fewest nodes needed so exactly ``n_doves`` are doves.

    If ``params`` is given, flipped nodes restart at their new class's
    initial reputation. Returns the flipped nodes.
    """
    doves = [n for n in nodes if n.is_dove]
    hawks = [n for n in nodes if not n.is_dove]
    change = n_doves - len(doves)
    if change > 0:
        flipped = [hawks[k] for k in rng.choice(len(hawks), size=change, replace=False)]
        new_class = NodeClass.DOVE
    elif change < 0:
        flipped = [doves[k] for k in rng.choice(len(doves), size=-change, replace=False)]
        new_class = NodeClass.HAWK
    else:
        return []
    for node in flipped:
        node.node_class = new_class
        if params is not None:
            node.reputation = initial_reputation(new_class, params)
    return flipped


def run_epoch(nodes: List[NodeState], topology: Topology, p: float, strat: DoveStrategy,
              cfg: SimConfig, params: GameParams, rng: np.random.Generator,
              epoch: int = 0, t: float = 0.0) -> RoundRecord:
    """Play ``cfg.rounds_per_epoch`` request rounds with classes as they stand."""
    n_doves = sum(1 for n in nodes if n.is_dove)
    record = RoundRecord(epoch, t, p, n_doves, len(nodes), strat.s_d, strat.s_h)
    for node in nodes:
        node.pending_packets = cfg.packets_per_node

    for _ in range(cfg.rounds_per_epoch):
        for i in rng.permutation(len(nodes)):
            source = nodes[i]
            if source.pending_packets == 0:
                continue
            nb = topology.neighbors[i]
            if len(nb) == 0:
                record.unreachable += 1
                continue
            relay = nodes[nb[rng.integers(len(nb))]]
            record.requests += 1
            forward = relay_decision(relay, source.reputation, strat, rng, cfg.repair_reputation)
            before = relay.reputation
            relay.reputation = reputation_update(before, int(forward), source.reputation, params)
            if relay.is_dove:
                change = relay.reputation - before
                record.dove_decisions += 1
                record.dove_rep_change_sum += change
                record.dove_rep_change_sq_sum += change * change
            if forward:
                record.forwards += 1
                relay.forwarded_count += 1
                source.delivered_count += 1
                source.pending_packets -= 1
            else:
                record.refusals += 1
                relay.refused_count += 1

    doves = [n.reputation for n in nodes if n.is_dove]
    hawks = [n.reputation for n in nodes if not n.is_dove]
    record.mean_dove_reputation = float(np.mean(doves)) if doves else math.nan
    record.mean_hawk_reputation = float(np.mean(hawks)) if hawks else math.nan
    return record


def run_simulation(topo_cfg: TopologyConfig, sim_cfg: SimConfig, params: GameParams) -> SimulationResult:
    """Drive the node population along the replicator trajectory.

    A single generator seeded from ``topo_cfg.rng_seed`` feeds placement,
    class assignment and every relay decision, so runs are reproducible.
    The dove strategy at each epoch is optimised for the realised dove share.
    """
    rng = np.random.default_rng(topo_cfg.rng_seed)
    topology = generate_topology(topo_cfg, rng)
    n = topo_cfg.n_nodes

    trajectory = None
    if sim_cfg.fixed_p is None:
        trajectory = run_mode(params, sim_cfg.strategy_mode, sim_cfg.p0,
                              sim_cfg.dt, sim_cfg.horizon, sim_cfg.method)
        p_first = trajectory.p_at(0.0)
    else:
        p_first = sim_cfg.fixed_p

    n_doves = dove_count(p_first, n)
    dove_ids = set(rng.permutation(n)[:n_doves].tolist())
    nodes = []
    for i in range(n):
        cls = NodeClass.DOVE if i in dove_ids else NodeClass.HAWK
        nodes.append(NodeState(i, (float(topology.positions[i, 0]), float(topology.positions[i, 1])),
                               cls, initial_reputation(cls, params)))

    records: List[RoundRecord] = []
    cumulative = 0
    for epoch in range(sim_cfg.epochs):
        t = epoch * sim_cfg.epoch_span
        if trajectory is not None:
            p = trajectory.p_at(t)
            assign_classes(nodes, dove_count(p, n), rng,
                           None if sim_cfg.keep_reputation_on_flip else params)
        else:
            p = sim_cfg.fixed_p
        doves_now = sum(1 for node in nodes if node.is_dove)
        strat = _strategy_for(params, sim_cfg.strategy_mode, doves_now / n)
        record = run_epoch(nodes, topology, p, strat, sim_cfg, params, rng, epoch, t)
        cumulative += record.forwards
        record.cumulative_forwarded = cumulative
        records.append(record)
    return SimulationResult(records, nodes, topology, trajectory)


def _strategy_for(params: GameParams, mode: str, share: float) -> DoveStrategy:
    if mode == "baseline":
        return DoveStrategy(1.0, 1.0)
    return optimal_dove_strategy(params, share)


def dove_drift_summary(records: Sequence[RoundRecord], confidence: float = 0.99):
    """Mean per-decision dove reputation change and its normal-approximation half-width."""
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    n = sum(r.dove_decisions for r in records)
    if n < 2:
        raise ValueError("need at least two dove decisions")
    total = sum(r.dove_rep_change_sum for r in records)
    total_sq = sum(r.dove_rep_change_sq_sum for r in records)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / (n - 1)
    return mean, z * math.sqrt(var / n), n
