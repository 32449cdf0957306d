"""Hierarchical executor: coherent-cascade and hybrid (measured) policies.

An execution policy names the internal levels whose child interfaces are
classical.  A measured level replaces coherent boundary search with explicit
enumeration: each boundary assignment triggers a fresh evaluation of every
child, and a measured leaf interface is evaluated by an exhaustive scan of
the leaf's local space.

Two query counters are kept:

- ``queries`` -- applications of the distributed amplitude-amplification
  operator at coherent internal levels plus classical leaf-scan evaluations
  at measured leaf interfaces.  This is the counter the resource studies
  report; fully classical policies reduce to scanning the whole assignment
  space.
- ``leaf_queries`` -- the leaf-oracle recursion sum_leaves N_inv * C_leaf,
  which collapses to the single-level closed form on one-level trees.

EPR accounting charges the state-preparation traffic (boundary copies out
and back plus the value registers coming home) per preparation call at
coherent levels and is identically zero at measured levels.  A second
column (``epr_full``) adds the reflection-ancilla and control-distribution
terms of the single-level closed form for reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decompose import DecompTree, TreeNode, synthetic_two_level_tree
from .errors import ConfigError
from .fgraph import FactorNode
from .primitives import (
    AmplitudeAmplifier,
    MaxFinder,
    PrecisionParams,
    best_lower_bits,
    bits_from_int,
    int_from_bits,
    phase_test,
    z_dec,
)
from .qsim import ENGINE_QUBIT_CAP, RegisterLayout, zero_state

POLICIES = {
    "coherent": frozenset(),
    "hybrid_root": frozenset({0}),
    "hybrid_level1": frozenset({1}),
    "hybrid_all": frozenset({0, 1}),
}

#: parameters of the two-level benchmark study
STUDY_PARAMS = PrecisionParams(
    n_precision=1, delta=0.2, t_max=2, t_cap=True, p_min_mode="paper"
)

CHAIN_PATH = tuple(
    [(5, 0, 1, 1, r) for r in range(3, 6)]
    + [(5, 1, 1, 1, r) for r in range(5, 9)]
    + [(6, 1, 1, 1, r) for r in range(8, 14)]
)


@dataclass(frozen=True)
class ExecutionPolicy:
    """Set of measured internal levels (empty = fully coherent)."""

    measured_levels: frozenset
    name: str = ""

    @classmethod
    def named(cls, name: str) -> "ExecutionPolicy":
        if name not in POLICIES:
            raise ConfigError(
                f"unknown policy {name!r}; choose from {sorted(POLICIES)}"
            )
        return cls(POLICIES[name], name)

    def measured(self, level: int) -> bool:
        return level in self.measured_levels


def as_policy(policy) -> ExecutionPolicy:
    return policy if isinstance(policy, ExecutionPolicy) else ExecutionPolicy.named(policy)


# ---------------------------------------------------------------------------
# Cost model
# ---------------------------------------------------------------------------


def _node_t(node: TreeNode, params: PrecisionParams) -> int:
    if node.is_leaf:
        return params.t_for(2.0 ** -max(node.leaf_width, 1))
    return params.t_for(
        params.p_min_c(node.branching(), len(node.internal_boundary))
    )


def _child_boundary(node: TreeNode, child: TreeNode) -> int:
    bset = set(node.internal_boundary)
    seen = set()
    for f in child.factors:
        seen.update(v for v in f.scope if v in bset)
    return len(seen)


def _uini_traffic(node: TreeNode, params: PrecisionParams) -> int:
    """EPR pairs per preparation call at this node (single hop)."""
    return sum(
        2 * _child_boundary(node, c) + params.n_precision for c in node.children
    )


def classical_eval_cost(node: TreeNode, policy, params) -> dict:
    """Study counters for one classical evaluation of ``node``'s value."""
    if node.is_leaf:
        scans = 2**node.leaf_width
        return {"queries": scans, "leaf_queries": scans, "epr": 0, "epr_full": 0}
    if policy.measured(node.level):
        b = len(node.internal_boundary)
        out = {"queries": 0, "leaf_queries": 0, "epr": 0, "epr_full": 0}
        for c in node.children:
            sub = classical_eval_cost(c, policy, params)
            for k in out:
                out[k] += 2**b * sub[k]
        return out
    return coherent_run_cost(node, policy, params)


def coherent_run_cost(node: TreeNode, policy, params) -> dict:
    """Study counters for one coherent execution of ``node``'s search."""
    t = _node_t(node, params)
    aa = params.n_precision * (2 ** (t + 1) - 2)
    inv = params.n_precision * (2 ** (t + 2) - 2)
    traffic = _uini_traffic(node, params)
    out = {
        "queries": aa,
        "leaf_queries": 0,
        "epr": inv * traffic,
        "epr_full": inv * traffic
        + aa * 2 * node.branching()
        + params.n_precision * t * 2 * node.branching(),
    }
    for c in node.children:
        if c.is_leaf:
            t_leaf = _node_t(c, params)
            out["leaf_queries"] += inv * params.n_precision * (2 ** (t_leaf + 2) - 2)
        elif policy.measured(c.level):
            sub = classical_eval_cost(c, policy, params)
            for k in out:
                out[k] += inv * sub[k]
        else:
            sub = coherent_run_cost(c, policy, params)
            for k in out:
                out[k] += inv * sub[k]
    return out


@dataclass
class NodeCost:
    key: tuple
    level: int
    is_leaf: bool
    measured: bool
    t: int
    c_eff: int
    n_inv: int
    c_leaf: int = 0


@dataclass
class HierCostReport:
    policy: str
    per_node: list
    queries: int
    leaf_queries: int
    epr: int
    epr_full: int
    n_exec: int
    success_bound: float
    precision_bound: float
    tree_size: int

    def row(self) -> dict:
        return {
            "policy": self.policy,
            "queries": self.queries,
            "leaf_queries": self.leaf_queries,
            "epr": self.epr,
            "epr_full": self.epr_full,
            "n_exec": self.n_exec,
            "success_bound": self.success_bound,
            "precision_bound": self.precision_bound,
        }


def cost_model(tree: DecompTree, policy, params: PrecisionParams) -> HierCostReport:
    """Exact counter predictions for one (tree, policy) pair."""
    policy = as_policy(policy)
    totals = (
        classical_eval_cost(tree.root, policy, params)
        if policy.measured(0)
        else coherent_run_cost(tree.root, policy, params)
    )

    per_node = []
    n_exec = 0

    def walk(node: TreeNode, n_inv: int, read_out: bool):
        nonlocal n_exec
        t = _node_t(node, params)
        if node.is_leaf:
            c_leaf = params.n_precision * (2 ** (t + 2) - 2)
            per_node.append(
                NodeCost(node.key, node.level, True, False, t, 0, n_inv, c_leaf)
            )
            if read_out:
                n_exec += n_inv
            return
        measured = policy.measured(node.level)
        if measured:
            c_eff = 2 ** len(node.internal_boundary)
        else:
            c_eff = params.n_precision * (2 ** (t + 2) - 2)
            if read_out:
                n_exec += n_inv
        per_node.append(
            NodeCost(node.key, node.level, False, measured, t, c_eff, n_inv)
        )
        for c in node.children:
            walk(c, n_inv * c_eff, read_out=measured)

    walk(tree.root, 1, read_out=not policy.measured(0))

    delta, np_ = params.delta, params.n_precision
    return HierCostReport(
        policy=policy.name or "custom",
        per_node=per_node,
        queries=totals["queries"],
        leaf_queries=totals["leaf_queries"],
        epr=totals["epr"],
        epr_full=totals["epr_full"],
        n_exec=max(n_exec, 1),
        success_bound=(1 - delta) ** (2 * np_ * max(n_exec, 1)),
        precision_bound=tree.size() * 2.0**-np_,
        tree_size=tree.size(),
    )


# ---------------------------------------------------------------------------
# Instances over synthetic trees
# ---------------------------------------------------------------------------


def randomize_tree_instance(tree: DecompTree, rng: np.random.Generator) -> DecompTree:
    """Fill every leaf factor with random tables normalized so the global
    objective lies in [0, 1]."""
    tables = {}
    for leaf in tree.leaves():
        for f in leaf.factors:
            if id(f) not in tables:
                tables[id(f)] = rng.random(2 ** len(f.scope))
    total_range = sum(t.max() - t.min() for t in tables.values()) or 1.0
    new_of = {}

    def convert(f):
        if id(f) not in tables:
            return f
        if id(f) not in new_of:
            raw = tables[id(f)]
            new_of[id(f)] = FactorNode(
                f.scope, tuple(((raw - raw.min()) / total_range).tolist())
            )
        return new_of[id(f)]

    def swap(node: TreeNode):
        node.factors = tuple(convert(f) for f in node.factors)
        for c in node.children:
            swap(c)

    swap(tree.root)
    return tree


def _leaf_table(leaf: TreeNode) -> np.ndarray:
    """Leaf objective over (context variables, leaf variables), MSB-first."""
    order = list(leaf.context_boundary) + list(leaf.variables)
    pos = {v: i for i, v in enumerate(order)}
    n = len(order)
    total = np.zeros((2,) * n) if n else np.zeros(1)
    for f in leaf.factors:
        axes = [pos[v] for v in f.scope]
        t = np.asarray(f.table, dtype=float).reshape((2,) * len(f.scope))
        t = np.transpose(t, axes=np.argsort(axes))
        shape = [1] * n
        for a in axes:
            shape[a] = 2
        total = total + np.broadcast_to(t.reshape(shape), (2,) * n)
    return total.reshape(-1)


def _leaf_segment(leaf: TreeNode, context: dict) -> np.ndarray:
    table = _leaf_table(leaf)
    ctx = list(leaf.context_boundary)
    r = leaf.leaf_width
    if not ctx:
        return table
    view = table.reshape((2,) * len(ctx) + ((2**r,) if r else (1,)))
    idx = tuple(
        context[v] if v in context else slice(None) for v in ctx
    )
    return np.asarray(view[idx]).reshape(-1)


def reference_bits(node: TreeNode, context: dict, params: PrecisionParams) -> tuple:
    """Classical recursion for the expected readout (rounded at each node)."""
    np_ = params.n_precision
    if node.is_leaf:
        return best_lower_bits(float(np.max(_leaf_segment(node, context))), np_)
    b = len(node.internal_boundary)
    best = -1.0
    for xb in range(2**b):
        assign = dict(context)
        assign.update(zip(node.internal_boundary, bits_from_int(xb, b)))
        s = sum(z_dec(reference_bits(c, assign, params)) for c in node.children)
        best = max(best, s)
    return best_lower_bits(best, np_)


def true_max(node: TreeNode, context: dict) -> float:
    if node.is_leaf:
        return float(np.max(_leaf_segment(node, context)))
    b = len(node.internal_boundary)
    best = -math.inf
    for xb in range(2**b):
        assign = dict(context)
        assign.update(zip(node.internal_boundary, bits_from_int(xb, b)))
        best = max(best, sum(true_max(c, assign) for c in node.children))
    return best


# ---------------------------------------------------------------------------
# Statevector executor
# ---------------------------------------------------------------------------


class _Counters:
    def __init__(self):
        self.queries = 0
        self.leaf_queries = 0
        self.epr = 0

    def as_dict(self):
        return {
            "queries": self.queries,
            "leaf_queries": self.leaf_queries,
            "epr": self.epr,
        }


def _k(node: TreeNode) -> str:
    return ".".join(map(str, node.key)) or "root"


def _sum_threshold_flags(prefix_w, n_children, np_, n_p):
    weights = np.array([z_dec(bits_from_int(v, np_)) for v in range(2**np_)])
    sums = np.zeros(1)
    for _ in range(n_children):
        sums = (sums[:, None] + weights[None, :]).reshape(-1)
    thr = (2 * np.arange(2**prefix_w) + 1) / 2.0**n_p
    return (sums[None, :] >= thr[:, None] - 1e-12).reshape(-1)


class _TableChild:
    """Measured-level child inside a coherent component: its classical value
    table is written into the result register as a reversible XOR, and each
    application charges one fresh classical evaluation."""

    def __init__(self, ex, node, layout):
        self.ex = ex
        self.node = node
        self.result_qubits = layout.qubits(f"p.{_k(node)}")
        free = [v for v in _visible_context(node) if v not in ex.context]
        self.ctx_qubits = tuple(ex.var_qubit[id(layout)][v] for v in free)
        cost = classical_eval_cost(node, ex.policy, ex.params)
        self.eval_queries = cost["queries"]
        self.eval_leaf = cost["leaf_queries"]
        np_ = ex.params.n_precision
        self.table = np.zeros((2 ** len(free), np_), dtype=bool)
        for idx in range(2 ** len(free)):
            assign = dict(ex.context)
            assign.update(zip(free, bits_from_int(idx, len(free))))
            self.table[idx] = reference_bits(node, assign, ex.params)

    def _charge(self):
        self.ex.counters.queries += self.eval_queries
        self.ex.counters.leaf_queries += self.eval_leaf

    def apply(self, state, ctrl=()):
        self._charge()
        self._write(state, ctrl)
        return state

    apply_inverse = apply  # XOR write is an involution (cost charged again)

    def _write(self, state, ctrl):
        for bit in range(self.table.shape[1]):
            flags = self.table[:, bit]
            if flags.any():
                state.apply_x_if(self.result_qubits[bit], self.ctx_qubits,
                                 flags, ctrl)

    def workspace(self):
        return tuple(self.result_qubits)

    def value_qubits(self):
        return tuple(self.result_qubits)


def _visible_context(node: TreeNode):
    return tuple(node.context_boundary)


class _LeafChild:
    """Leaf executed coherently inside its parent's preparation."""

    def __init__(self, ex, node, layout):
        self.node = node
        free = [v for v in node.context_boundary if v not in ex.context]
        ctx_qubits = tuple(ex.var_qubit[id(layout)][v] for v in free)
        seg = _leaf_segment(node, ex.context)
        self.finder = MaxFinder(
            ex.params,
            seg,
            ctx_qubits,
            layout.qubits(f"sr.{_k(node)}"),
            layout.qubits(f"st.{_k(node)}"),
            layout.qubits(f"p.{_k(node)}"),
            layout.qubit(f"ax.{_k(node)}", 1),
            on_query=lambda k: ex.counters.__setattr__(
                "leaf_queries", ex.counters.leaf_queries + k
            ),
        )
        self.layout = layout

    def apply(self, state, ctrl=()):
        return self.finder.apply(state, ctrl)

    def apply_inverse(self, state, ctrl=()):
        return self.finder.apply_inverse(state, ctrl)

    def workspace(self):
        k = _k(self.node)
        return (
            tuple(self.layout.qubits(f"sr.{k}"))
            + tuple(self.layout.qubits(f"st.{k}"))
            + tuple(self.layout.qubits(f"p.{k}"))
            + (self.layout.qubit(f"ax.{k}", 1),)
        )

    def value_qubits(self):
        return tuple(self.layout.qubits(f"p.{_k(self.node)}"))


class _NodeRoutine:
    """Coherent execution of one internal node as a unitary subroutine."""

    def __init__(self, ex, node, layout):
        self.ex = ex
        self.node = node
        self.layout = layout
        self.params = ex.params
        self.t = _node_t(node, ex.params)
        self.qb = layout.qubits(f"B.{_k(node)}")
        self.est = layout.qubits(f"st.{_k(node)}")
        self.result_qubits = layout.qubits(f"p.{_k(node)}")
        self.aux = layout.qubit(f"ax.{_k(node)}", 1)
        self.children = []
        for c in node.children:
            if c.is_leaf:
                self.children.append(_LeafChild(ex, c, layout))
            elif ex.policy.measured(c.level):
                self.children.append(_TableChild(ex, c, layout))
            else:
                self.children.append(_NodeRoutine(ex, c, layout))
        self.traffic = _uini_traffic(node, ex.params)

    # the node's preparation operator (its state-preparation unitary)
    def prep_apply(self, state, ctrl=()):
        self.ex.counters.epr += self.traffic
        state.apply_h(self.qb, ctrl)
        for ch in self.children:
            ch.apply(state, ctrl)
        return state

    def prep_inverse(self, state, ctrl=()):
        self.ex.counters.epr += self.traffic
        for ch in reversed(self.children):
            ch.apply_inverse(state, ctrl)
        state.apply_h(self.qb, ctrl)
        return state

    def workspace(self):
        out = list(self.qb)
        for ch in self.children:
            out.extend(ch.workspace())
            if isinstance(ch, _NodeRoutine):
                out.extend(ch.est)
                out.extend(ch.result_qubits)
                out.append(ch.aux)
        return tuple(sorted(out))

    def value_qubits(self):
        return tuple(self.result_qubits)

    def _uaa(self, n_p):
        np_ = self.params.n_precision
        prefix = self.result_qubits[: n_p - 1]
        value_qubits = []
        for ch in self.children:
            value_qubits.extend(ch.value_qubits())
        return AmplitudeAmplifier(
            _PrepShim(self),
            tuple(prefix) + tuple(value_qubits),
            _sum_threshold_flags(n_p - 1, len(self.children), np_, n_p),
            reflect_qubits=self.workspace(),
            on_apply=lambda k: self.ex.counters.__setattr__(
                "queries", self.ex.counters.queries + k
            ),
        )

    def apply(self, state, ctrl=()):
        for n_p in range(1, self.params.n_precision + 1):
            phase_test(
                state, _PrepShim(self), self._uaa(n_p), self.t, self.est,
                self.workspace(), self.result_qubits[n_p - 1], self.aux,
                ctrl=ctrl,
            )
        return state

    def apply_inverse(self, state, ctrl=()):
        for n_p in reversed(range(1, self.params.n_precision + 1)):
            phase_test(
                state, _PrepShim(self), self._uaa(n_p), self.t, self.est,
                self.workspace(), self.result_qubits[n_p - 1], self.aux,
                ctrl=ctrl, inverse=True,
            )
        return state


class _PrepShim:
    def __init__(self, routine):
        self.r = routine

    def apply(self, state, ctrl=()):
        return self.r.prep_apply(state, ctrl)

    def apply_inverse(self, state, ctrl=()):
        return self.r.prep_inverse(state, ctrl)


@dataclass
class HierRunResult:
    z_bits: tuple
    value: float
    reference: tuple
    g_max: float
    success: bool
    success_mass: float
    counters: dict
    report: HierCostReport


class HierExecutor:
    """Recursive statevector execution of a decomposition tree."""

    def __init__(self, tree, policy, params, readout="most_probable", seed=0,
                 engine_cap=ENGINE_QUBIT_CAP):
        self.tree = tree
        self.policy = as_policy(policy)
        self.params = params
        self.readout = readout
        self.rng = np.random.default_rng(seed)
        self.counters = _Counters()
        self.success_mass = 1.0
        self.engine_cap = engine_cap
        self.context: dict = {}
        self.var_qubit: dict = {}

    def run(self) -> tuple:
        root = self.tree.root
        if self.policy.measured(0):
            return self._evaluate(root, {})
        return self._run_component(root, {})

    # classical evaluation above a measured interface
    def _evaluate(self, node, context) -> tuple:
        np_ = self.params.n_precision
        if node.is_leaf:
            seg = _leaf_segment(node, context)
            self.counters.queries += seg.size
            self.counters.leaf_queries += seg.size
            return best_lower_bits(float(np.max(seg)), np_)
        if self.policy.measured(node.level):
            b = len(node.internal_boundary)
            best = -1.0
            for xb in range(2**b):
                assign = dict(context)
                assign.update(zip(node.internal_boundary, bits_from_int(xb, b)))
                s = sum(z_dec(self._evaluate(c, assign)) for c in node.children)
                best = max(best, s)
            return best_lower_bits(best, np_)
        return self._run_component(node, context)

    def _component_layout(self, comp_root, context):
        lay = RegisterLayout()
        var_map = {}

        def add(node):
            key = _k(node)
            if node.is_leaf:
                lay.add(f"st.{key}", _node_t(node, self.params), key)
                lay.add(f"p.{key}", self.params.n_precision, key)
                lay.add(f"sr.{key}", node.leaf_width, key)
                lay.add(f"ax.{key}", 1, key)
                return
            lay.add(f"B.{key}", len(node.internal_boundary), key)
            for v, q in zip(node.internal_boundary, lay.qubits(f"B.{key}")):
                var_map[v] = q
            lay.add(f"st.{key}", _node_t(node, self.params), key)
            lay.add(f"p.{key}", self.params.n_precision, key)
            lay.add(f"ax.{key}", 1, key)
            for c in node.children:
                if c.is_leaf or not self.policy.measured(c.level):
                    add(c)
                else:
                    lay.add(f"p.{_k(c)}", self.params.n_precision, _k(c))

        add(comp_root)
        lay.check_cap(self.engine_cap)
        self.var_qubit[id(lay)] = var_map
        return lay

    def _run_component(self, comp_root, context) -> tuple:
        layout = self._component_layout(comp_root, context)
        old_context = self.context
        self.context = dict(context)
        state = zero_state(layout)
        routine = _NodeRoutine(self, comp_root, layout)
        routine.apply(state)
        self.context = old_context
        result_reg = layout.qubits(f"p.{_k(comp_root)}")
        ref = reference_bits(comp_root, context, self.params)
        clean = {f"p.{_k(comp_root)}": ref}
        for name in layout.names:
            if name not in clean and layout.widths[name]:
                clean[name] = (0,) * layout.widths[name]
        self.success_mass *= abs(state.basis_amplitude(clean)) ** 2
        if self.readout == "sample":
            return state.measure(result_reg, self.rng)
        return state.most_probable(result_reg)


def execute(
    tree: DecompTree,
    policy,
    params: PrecisionParams,
    mode: str = "cost_model",
    readout: str = "most_probable",
    seed: int = 0,
    engine_cap: int = ENGINE_QUBIT_CAP,
):
    """Run the hierarchy in cost-model or statevector mode."""
    report = cost_model(tree, policy, params)
    if mode == "cost_model":
        return report
    if mode != "statevector":
        raise ConfigError(f"unknown execution mode {mode!r}")
    ex = HierExecutor(tree, policy, params, readout=readout, seed=seed,
                      engine_cap=engine_cap)
    bits = tuple(ex.run())
    ref = reference_bits(tree.root, {}, params)
    return HierRunResult(
        z_bits=bits,
        value=z_dec(bits),
        reference=ref,
        g_max=true_max(tree.root, {}),
        success=bits == ref,
        success_mass=ex.success_mass,
        counters=ex.counters.as_dict(),
        report=report,
    )


# ---------------------------------------------------------------------------
# Benchmark sweep
# ---------------------------------------------------------------------------


def sweep_rows(params: PrecisionParams = STUDY_PARAMS, path=CHAIN_PATH):
    """Cost-model rows of the two-level policy study (13 points x 4 policies)."""
    rows = []
    for (b0, b1, s0, s1, r) in path:
        tree = synthetic_two_level_tree(b0, b1, s0, s1, r)
        num_vars = b0 + s0 * (b1 + s1 * r)
        for policy in POLICIES:
            rep = cost_model(tree, policy, params)
            row = {
                "b0": b0, "b1": b1, "s0": s0, "s1": s1, "r": r,
                "num_vars": num_vars,
            }
            row.update(rep.row())
            rows.append(row)
    return rows
