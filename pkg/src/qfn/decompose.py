"""Boundary separators, single-level splits, and hierarchical decomposition.

A split removes a set of boundary variables; the connected components of the
remainder (those containing at least one variable) become partitions, each
carrying the factors attached to its internal variables.  Factors whose whole
scope lies inside the boundary are collected separately and evaluated
classically at the coordinator.

The hierarchical tree applies the same split recursively until every leaf
fits the per-processor qubit budgets.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

from .errors import DecompositionInfeasibleError
from .fgraph import FactorGraph, FactorNode
from .primitives import PrecisionParams, t_qubits


@dataclass(frozen=True)
class Partition:
    internal_vars: tuple
    factors: tuple
    local_boundary: tuple


@dataclass(frozen=True)
class BoundarySplit:
    """Separator-induced partition of a factor graph."""

    graph: FactorGraph
    boundary: tuple
    partitions: tuple
    boundary_resident: tuple = ()

    @property
    def num_partitions(self) -> int:
        return len(self.partitions)

    def worker_boundary_sizes(self) -> tuple:
        return tuple(len(p.local_boundary) for p in self.partitions)

    def worker_internal_sizes(self) -> tuple:
        return tuple(len(p.internal_vars) for p in self.partitions)

    def validate(self):
        """Disjoint factor cover and separator property."""
        seen = set()
        for p in self.partitions:
            for f in p.factors:
                if id(f) in seen:
                    raise AssertionError("factor assigned to two partitions")
                seen.add(id(f))
        covered = len(seen) + len(self.boundary_resident)
        if covered != len(self.graph.factors):
            raise AssertionError("partitions do not cover the factor set")
        internal_owner = {}
        for i, p in enumerate(self.partitions):
            for v in p.internal_vars:
                if v in internal_owner:
                    raise AssertionError(f"internal variable {v} in two partitions")
                internal_owner[v] = i
        bset = set(self.boundary)
        for i, p in enumerate(self.partitions):
            for f in p.factors:
                for v in f.scope:
                    if v in bset:
                        continue
                    if internal_owner.get(v) != i:
                        raise AssertionError(
                            f"factor scope {f.scope} spans partitions"
                        )
        return self


def _components(variables, factors, removed: set):
    """Connected components of the bipartite graph after deleting variables.

    Returns a list of (vars, factors) with partitions ordered by their
    smallest surviving variable (graph order), plus the factors whose whole
    scope was removed.
    """
    var_order = {v: i for i, v in enumerate(variables)}
    alive = [v for v in variables if v not in removed]
    parent = {v: v for v in alive}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    resident = []
    for f in factors:
        live = [v for v in f.scope if v not in removed]
        if not live:
            resident.append(f)
            continue
        for v in live[1:]:
            union(live[0], v)

    groups = {}
    for v in alive:
        groups.setdefault(find(v), []).append(v)
    comps = sorted(groups.values(), key=lambda vs: min(var_order[v] for v in vs))
    out = []
    for vs in comps:
        vset = set(vs)
        fs = [
            f
            for f in factors
            if any(v in vset for v in f.scope)
        ]
        out.append((tuple(sorted(vs, key=var_order.get)), tuple(fs)))
    return out, tuple(resident)


def split(g: FactorGraph, boundary) -> BoundarySplit:
    """Split ``g`` along a boundary variable set (Definition-style)."""
    bset = set(boundary)
    unknown = bset - set(g.variables)
    if unknown:
        raise ValueError(f"boundary names unknown variables {sorted(map(str, unknown))}")
    comps, resident = _components(g.variables, g.factors, bset)
    order = {v: i for i, v in enumerate(g.variables)}
    partitions = []
    for vs, fs in comps:
        local_b = sorted(
            {v for f in fs for v in f.scope if v in bset}, key=order.get
        )
        partitions.append(Partition(vs, fs, tuple(local_b)))
    ordered_boundary = tuple(sorted(bset, key=order.get))
    return BoundarySplit(g, ordered_boundary, tuple(partitions), resident).validate()


# ---------------------------------------------------------------------------
# Separator search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparatorResult:
    boundary: tuple
    num_partitions: int
    exhausted: bool = False


def suggest_boundary(
    g: FactorGraph,
    target_parts: int = 2,
    max_boundary: int | None = None,
    expansion_budget: int = 200_000,
) -> SeparatorResult:
    """Search for a small separator yielding balanced partitions.

    Iterative deepening over boundary size; candidate variables are ordered
    by degree (factor count), and subsets are scored lexicographically by
    (boundary size, largest partition, deviation from the target partition
    count).  Deterministic for a fixed graph.
    """
    n = g.num_variables
    if max_boundary is None:
        max_boundary = max(1, n - 1)
    degree = {v: len(g.neighbors(v)) for v in g.variables}
    candidates = sorted(g.variables, key=lambda v: (-degree[v], g.var_index(v)))

    best = None          # (max_part, dev, boundary)
    best_any = None      # best even if below target_parts
    expansions = 0
    for size in range(0, max_boundary + 1):
        for combo in itertools.combinations(candidates, size):
            expansions += 1
            if expansions > expansion_budget:
                chosen = best or best_any
                if chosen is None:
                    return SeparatorResult((), 1, exhausted=True)
                return SeparatorResult(chosen[2], chosen[3], exhausted=True)
            comps, _ = _components(g.variables, g.factors, set(combo))
            if not comps:
                continue
            parts = len(comps)
            max_part = max(len(vs) for vs, _ in comps)
            dev = abs(parts - target_parts)
            order = {v: i for i, v in enumerate(g.variables)}
            entry = (max_part, dev, tuple(sorted(combo, key=order.get)), parts)
            if parts >= target_parts:
                if best is None or entry[:2] < best[:2]:
                    best = entry
            if best_any is None or (dev, max_part) < (best_any[1], best_any[0]):
                best_any = entry
        if best is not None:
            return SeparatorResult(best[2], best[3], exhausted=False)
    chosen = best or best_any
    return SeparatorResult(chosen[2], chosen[3], exhausted=True)


# ---------------------------------------------------------------------------
# Qubit requirements (per-processor counts for one distributed run)
# ---------------------------------------------------------------------------


def qubit_requirements(split_: BoundarySplit, params: PrecisionParams):
    """Exact per-processor qubit counts, transient registers included.

    Returns ``(coordinator, workers)``.  The coordinator holds the boundary
    register, its estimation and result registers, transiently the workers'
    value registers plus one reflection ancilla each, the boundary copies,
    the control copies, and three ancillas.  Each worker holds its internal
    and received-boundary registers, value and estimation registers, oracle
    ancillas (zero for the baseline oracle), a control copy, and one
    reflection ancilla.
    """
    np_ = params.n_precision
    n_g = split_.num_partitions
    b_tot = len(split_.boundary)
    t_c = params.t_for(params.p_min_c(n_g, b_tot))
    coord = (
        b_tot
        + t_c
        + np_
        + n_g * (np_ + 1)
        + sum(split_.worker_boundary_sizes())
        + n_g * t_c
        + 3
    )
    workers = []
    for p in split_.partitions:
        r = len(p.internal_vars)
        p_min_n = 2.0 ** -max(r, 1)
        t_n = params.t_for(p_min_n)
        workers.append(r + len(p.local_boundary) + np_ + t_n + 0 + t_c + 1)
    return coord, workers


# ---------------------------------------------------------------------------
# Hierarchical decomposition tree
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    key: tuple
    level: int
    variables: tuple
    factors: tuple
    context_boundary: tuple = ()
    internal_boundary: tuple = ()
    children: list = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def leaf_width(self) -> int:
        return len(self.variables)

    def branching(self) -> int:
        return len(self.children)


@dataclass
class DecompTree:
    root: TreeNode
    levels: int

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self):
        return [n for n in self.nodes() if n.is_leaf]

    def internal(self):
        return [n for n in self.nodes() if not n.is_leaf]

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def to_json(self) -> str:
        def enc(node):
            return {
                "key": list(node.key),
                "level": node.level,
                "variables": list(map(str, node.variables)),
                "context_boundary": list(map(str, node.context_boundary)),
                "internal_boundary": list(map(str, node.internal_boundary)),
                "children": [enc(c) for c in node.children],
            }

        return json.dumps({"levels": self.levels, "root": enc(self.root)}, indent=1)


def _leaf_requirement(node: TreeNode, params: PrecisionParams) -> int:
    """Worker qubits needed to run the generic maximizer on this node."""
    r = len(node.variables)
    t_n = t_qubits(2.0 ** -max(r, 1), params.delta)
    return r + len(node.context_boundary) + params.n_precision + t_n + 1


def build_tree(
    g: FactorGraph,
    coordinator_budget: int,
    worker_budget: int,
    params: PrecisionParams,
    target_parts: int = 2,
) -> DecompTree:
    """Recursive top-down decomposition under per-processor qubit budgets.

    Nodes that fit the worker budget become leaves; every other node is
    split along a suggested boundary and recursed.  Leaves are extended by
    trivial single-child chains so that all of them sit at the same depth.
    """
    root = TreeNode((), 0, tuple(g.variables), tuple(g.factors))

    def recurse(node: TreeNode):
        if _leaf_requirement(node, params) <= worker_budget:
            return
        if len(node.variables) <= 1:
            raise DecompositionInfeasibleError(
                f"node {node.key or 'root'} cannot fit worker budget "
                f"{worker_budget} even as a single variable"
            )
        sub = _structural_graph(node)
        sep = suggest_boundary(sub, target_parts=target_parts)
        boundary = sep.boundary
        if not boundary or len(boundary) >= len(node.variables):
            raise DecompositionInfeasibleError(
                f"no usable separator at node {node.key or 'root'}"
            )
        comps, _ = _components(node.variables, node.factors, set(boundary))
        node.internal_boundary = boundary
        coord_need = (
            len(boundary)
            + params.n_precision
            + len(comps) * (params.n_precision + 1)
            + 3
        )
        if coord_need > coordinator_budget:
            raise DecompositionInfeasibleError(
                f"coordinator budget {coordinator_budget} exceeded at node "
                f"{node.key or 'root'} (needs {coord_need})"
            )
        for i, (vs, fs) in enumerate(comps):
            ctx = tuple(
                sorted(
                    {v for f in fs for v in f.scope if v not in set(vs)},
                    key=str,
                )
            )
            child = TreeNode(node.key + (i + 1,), node.level + 1, vs, fs, ctx)
            node.children.append(child)
            recurse(child)

    recurse(root)

    depth = 0

    def max_depth(node):
        return node.level if node.is_leaf else max(max_depth(c) for c in node.children)

    depth = max_depth(root)

    def extend(node):
        if node.is_leaf and node.level < depth:
            child = TreeNode(
                node.key + (1,),
                node.level + 1,
                node.variables,
                node.factors,
                node.context_boundary,
            )
            node.children.append(child)
            extend(child)
        else:
            for c in node.children:
                extend(c)

    extend(root)
    return DecompTree(root, depth)


def _structural_graph(node: TreeNode) -> FactorGraph:
    """Node content as a standalone binary graph (context edges dropped)."""
    vset = set(node.variables)
    factors = []
    for f in node.factors:
        scope = tuple(v for v in f.scope if v in vset)
        if scope:
            factors.append(FactorNode(scope, tuple([0.0] * 2 ** len(scope))))
    return FactorGraph(
        tuple(node.variables), tuple(2 for _ in node.variables), tuple(factors)
    )


# ---------------------------------------------------------------------------
# Synthetic two-level family (hierarchy benchmarks)
# ---------------------------------------------------------------------------


def synthetic_two_level_tree(b0: int, b1: int, s0: int, s1: int, r: int):
    """Two-internal-level decomposition with given boundary widths/branching.

    The root chooses ``b0`` boundary bits over ``s0`` children; each child
    chooses ``b1`` bits over ``s1`` grandchildren; grandchildren are leaves
    of width ``r``.  Total variables: ``b0 + s0*(b1 + s1*r)``.
    """
    variables = [f"B0.{i}" for i in range(b0)]
    root = TreeNode((), 0, (), ())
    factors = []
    for i in range(s0):
        mid_vars = [f"M{i}.B1.{j}" for j in range(b1)]
        variables.extend(mid_vars)
        mid = TreeNode((i + 1,), 1, (), (), tuple(f"B0.{k}" for k in range(b0)))
        mid.internal_boundary = tuple(mid_vars)
        root.children.append(mid)
        for j in range(s1):
            leaf_vars = [f"M{i}.L{j}.{k}" for k in range(r)]
            variables.extend(leaf_vars)
            scope = tuple(f"B0.{k}" for k in range(b0)) + tuple(mid_vars) + tuple(
                leaf_vars
            )
            f = FactorNode(scope, tuple([0.0] * 2 ** len(scope)))
            factors.append(f)
            leaf = TreeNode(
                (i + 1, j + 1),
                2,
                tuple(leaf_vars),
                (f,),
                tuple(f"B0.{k}" for k in range(b0)) + tuple(mid_vars),
            )
            mid.children.append(leaf)
        mid.variables = tuple(mid_vars) + tuple(
            v for leaf in mid.children for v in leaf.variables
        )
        mid.factors = tuple(f for leaf in mid.children for f in leaf.factors)
    root.internal_boundary = tuple(f"B0.{k}" for k in range(b0))
    root.variables = tuple(variables)
    root.factors = tuple(factors)
    return DecompTree(root, 2)


APPENDIX_CHAIN_PATH = tuple(
    [(5, 0, 1, 1, r) for r in range(3, 6)]
    + [(5, 1, 1, 1, r) for r in range(5, 9)]
    + [(6, 1, 1, 1, r) for r in range(8, 14)]
)
