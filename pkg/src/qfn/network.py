"""Quantum network topologies, hop routing, and the EPR/query ledger.

Processors are a coordinator ``"c"`` plus workers ``1..N``.  Teleporting one
qubit between processors at hop distance ``k`` consumes ``k`` elementary EPR
pairs (entanglement swapping along the shortest path, deterministic and
lossless).  The ledger records oracle queries per worker, state-preparation
calls, and EPR pairs per event class.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

TOPOLOGY_KINDS = ("single_hop", "star", "line", "ring", "tree", "mesh")

EPR_CLASSES = (
    "boundary_distribution",
    "result_return",
    "reflection_ancilla",
    "control_distribution",
)

COORD = "c"


@dataclass(frozen=True)
class NetworkModel:
    """Connected processor graph with precomputed hop distances."""

    kind: str
    num_workers: int
    edges: tuple           # undirected (a, b) pairs over {"c", 1..N}
    stretch: int = 1

    def __post_init__(self):
        object.__setattr__(self, "_dist", _all_pairs_hops(self.nodes, self.edges))

    @property
    def nodes(self):
        return (COORD,) + tuple(range(1, self.num_workers + 1))

    def dist(self, a, b) -> int:
        if a == b:
            return 0
        return self._dist[a][b] * self.stretch

    def coordinator_distances(self):
        return tuple(self.dist(COORD, n) for n in range(1, self.num_workers + 1))

    def diameter(self) -> int:
        """Coordinator-centric diameter: farthest worker in hops."""
        return max(self.coordinator_distances())

    def is_uniform_distance(self) -> bool:
        d = self.coordinator_distances()
        return len(set(d)) == 1


def _all_pairs_hops(nodes, edges):
    adj = {n: [] for n in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    for n in adj:
        adj[n].sort(key=str)  # deterministic expansion order
    dist = {}
    for src in nodes:
        d = {src: 0}
        dq = deque([src])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if v not in d:
                    d[v] = d[u] + 1
                    dq.append(v)
        if len(d) != len(nodes):
            raise ValueError("network graph must be connected")
        dist[src] = d
    return dist


def make_topology(kind: str, num_workers: int, stretch: int = 1) -> NetworkModel:
    """Build one of the canonical coordinator-worker topologies.

    ``stretch`` multiplies every edge's hop length (edge subdivision), which
    scales all coordinator-worker distances uniformly.
    """
    if kind not in TOPOLOGY_KINDS:
        raise ValueError(f"unknown topology {kind!r}; pick one of {TOPOLOGY_KINDS}")
    if num_workers < 1:
        raise ValueError("need at least one worker")
    w = list(range(1, num_workers + 1))
    if kind in ("star", "single_hop"):
        edges = [(COORD, n) for n in w]
    elif kind == "line":
        chain = [COORD] + w
        edges = list(zip(chain, chain[1:]))
    elif kind == "ring":
        cyc = [COORD] + w
        edges = list(zip(cyc, cyc[1:])) + [(cyc[-1], COORD)]
        if num_workers == 1:
            edges = [(COORD, 1)]
    elif kind == "tree":
        # complete binary tree in heap order, coordinator at the root
        order = [COORD] + w
        edges = []
        for i in range(1, len(order)):
            edges.append((order[(i - 1) // 2], order[i]))
    elif kind == "mesh":
        # two-row grid, coordinator at cell (0, 1): short hop sums
        total = num_workers + 1
        cols = math.ceil(total / 2)
        cells = [(r, c) for r in (0, 1) for c in range(cols)][:total]
        coord_cell = (0, 1) if cols > 1 else (0, 0)
        if coord_cell not in cells:
            coord_cell = cells[0]
        worker_cells = [c for c in cells if c != coord_cell]
        label = {coord_cell: COORD}
        for i, cell in enumerate(worker_cells):
            label[cell] = i + 1
        edges = []
        for (r, c) in cells:
            for (dr, dc) in ((0, 1), (1, 0)):
                nb = (r + dr, c + dc)
                if nb in label:
                    edges.append((label[(r, c)], label[nb]))
    return NetworkModel(kind, num_workers, tuple(edges), stretch)


def diameter(net: NetworkModel) -> int:
    return net.diameter()


# ---------------------------------------------------------------------------
# Resource ledger
# ---------------------------------------------------------------------------


@dataclass
class ResourceLedger:
    """Event-driven counters for one simulation run."""

    oracle_queries: dict = field(default_factory=dict)   # worker -> count
    u_ini_calls: int = 0
    uaa_calls: int = 0
    epr_pairs: dict = field(
        default_factory=lambda: {cls: 0 for cls in EPR_CLASSES}
    )
    events: list = field(default_factory=list)
    peak_qubits: dict = field(default_factory=dict)      # processor -> qubits

    @property
    def total_queries(self) -> int:
        return sum(self.oracle_queries.values())

    @property
    def total_epr(self) -> int:
        return sum(self.epr_pairs.values())

    def add_query(self, worker, count: int = 1):
        self.oracle_queries[worker] = self.oracle_queries.get(worker, 0) + count

    def add_u_ini(self, count: int = 1):
        self.u_ini_calls += count

    def add_uaa(self, count: int = 1):
        self.uaa_calls += count

    def log_signal(self, name: str):
        """Classical synchronization signals carry no cost, only ordering."""
        self.events.append(name)

    def snapshot(self) -> dict:
        return {
            "u_ini_calls": self.u_ini_calls,
            "uaa_calls": self.uaa_calls,
            "oracle_queries": dict(self.oracle_queries),
            "total_queries": self.total_queries,
            "epr_pairs": dict(self.epr_pairs),
            "total_epr": self.total_epr,
        }


def charge_teleport(
    ledger: ResourceLedger,
    net: NetworkModel,
    frm,
    to,
    n_qubits: int,
    event_class: str,
):
    """Record teleporting ``n_qubits`` between two processors.

    Cost is ``n_qubits * dist(frm, to)`` elementary EPR pairs.
    """
    if frm == to:
        raise ValueError("teleportation requires distinct endpoints")
    if event_class not in EPR_CLASSES:
        raise ValueError(f"unknown EPR event class {event_class!r}")
    ledger.epr_pairs[event_class] += n_qubits * net.dist(frm, to)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def epr_terms_per_worker(boundary_size: int, n_precision: int, t: int):
    """Single-hop EPR pairs charged against one worker over a full run.

    Three classes: state-preparation traffic per U_ini call, the reflection
    ancilla round trip per amplification step, and control-qubit distribution
    per phase test.
    """
    u_ini_calls = n_precision * (2 ** (t + 2) - 2)
    uaa_calls = n_precision * (2 ** (t + 1) - 2)
    return {
        "boundary_distribution": u_ini_calls * 2 * boundary_size,
        "result_return": u_ini_calls * n_precision,
        "reflection_ancilla": uaa_calls * 2,
        "control_distribution": n_precision * t * 2,
    }


def closed_form_epr(
    worker_boundary_sizes,
    n_precision: int,
    t: int,
    net: NetworkModel | None = None,
) -> int:
    """Total EPR consumption for one distributed run.

    With ``net=None`` this is the single-hop closed form

        Np (2^(t+2)-2) sum_n (2|V_Bn| + Np)
        + Np (2^(t+1)-2) 2 N_G + Np t 2 N_G;

    with a network, every per-worker event is weighted by its coordinator
    hop distance (equal to diameter x single-hop when distances are uniform).
    """
    total = 0
    for n, b in enumerate(worker_boundary_sizes, start=1):
        per = sum(epr_terms_per_worker(b, n_precision, t).values())
        w = 1 if net is None else net.dist(COORD, n)
        total += per * w
    return total


def u_ini_epr_per_call(worker_boundary_sizes, n_precision: int) -> int:
    """EPR pairs per single U_ini application (single hop)."""
    return sum(2 * b + n_precision for b in worker_boundary_sizes)
