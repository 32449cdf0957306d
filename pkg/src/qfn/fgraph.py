"""Factor-graph data model, normalization, and classical brute-force oracles.

A factor graph is a bipartite graph of variable nodes (with finite alphabets)
and function nodes (with dense tables over their scopes).  The global
objective is the sum of the local tables.  Everything downstream of this
module assumes the normalized form produced by :func:`normalize`: binary
variables, local values in ``[0, 1]``, global values in ``[0, 1]``.

Brute-force maximization here is the ground truth against which every
quantum result in the package is checked.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InstanceTooLargeError, InvalidAssignmentError

# Default cap on exhaustive enumeration (number of configurations).
BRUTE_FORCE_CAP = 2**24

Assignment = tuple  # symbol index per variable, in graph variable order


@dataclass(frozen=True)
class FactorNode:
    """A local function over an ordered scope of variable ids.

    ``table`` is indexed by the mixed-radix encoding of the scope assignment:
    the first scope variable is the most significant digit.
    """

    scope: tuple
    table: tuple

    def value(self, symbols) -> float:
        idx = 0
        for s, card_sym in symbols:
            idx = idx * s + card_sym
        return self.table[idx]


@dataclass(frozen=True)
class FactorGraph:
    """Bipartite variable/function graph with tabulated local functions."""

    variables: tuple
    cardinalities: tuple
    factors: tuple

    def __post_init__(self):
        cards = dict(zip(self.variables, self.cardinalities))
        for f in self.factors:
            if len(set(f.scope)) != len(f.scope):
                raise ValueError(f"factor scope has repeats: {f.scope}")
            size = 1
            for v in f.scope:
                if v not in cards:
                    raise ValueError(f"factor scope names unknown variable {v!r}")
                size *= cards[v]
            if len(f.table) != size:
                raise ValueError(
                    f"factor over {f.scope} has {len(f.table)} entries, expected {size}"
                )

    # -- basic accessors ---------------------------------------------------

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def cardinality(self, v) -> int:
        return self.cardinalities[self.variables.index(v)]

    def var_index(self, v) -> int:
        return self.variables.index(v)

    @property
    def num_configurations(self) -> int:
        n = 1
        for c in self.cardinalities:
            n *= c
        return n

    def is_binary(self) -> bool:
        return all(c == 2 for c in self.cardinalities)

    def neighbors(self, v):
        """Factors adjacent to variable ``v``."""
        return [f for f in self.factors if v in f.scope]

    # -- evaluation --------------------------------------------------------

    def evaluate(self, x) -> float:
        """Global objective: sum of local factor values at assignment ``x``."""
        if len(x) != len(self.variables):
            raise InvalidAssignmentError(
                f"assignment has {len(x)} values for {len(self.variables)} variables"
            )
        pos = {v: i for i, v in enumerate(self.variables)}
        for i, (val, card) in enumerate(zip(x, self.cardinalities)):
            if not 0 <= val < card:
                raise InvalidAssignmentError(
                    f"value {val} out of range for variable {self.variables[i]} "
                    f"(cardinality {card})"
                )
        total = 0.0
        for f in self.factors:
            idx = 0
            for v in f.scope:
                idx = idx * self.cardinalities[pos[v]] + x[pos[v]]
            total += f.table[idx]
        return total

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "variables": [
                {"id": v, "cardinality": c}
                for v, c in zip(self.variables, self.cardinalities)
            ],
            "factors": [
                {"scope": list(f.scope), "table": list(f.table)} for f in self.factors
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FactorGraph":
        doc = json.loads(text)
        variables = tuple(v["id"] for v in doc["variables"])
        cards = tuple(int(v["cardinality"]) for v in doc["variables"])
        factors = tuple(
            FactorNode(tuple(f["scope"]), tuple(float(t) for t in f["table"]))
            for f in doc["factors"]
        )
        return cls(variables, cards, factors)


def evaluate(g: FactorGraph, x) -> float:
    return g.evaluate(x)


# ---------------------------------------------------------------------------
# Normalization (binarize variables, shift/scale values into [0, 1])
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizationRecord:
    """Bookkeeping needed to map normalized results back to original values.

    ``g(x) = s_range * g_hat(x_hat) + sum(f_mins)`` whenever ``s_range > 0``.
    ``bit_widths`` maps each original variable to its binary width and
    ``valid_masks`` flags which codes of each variable decode to a symbol.
    """

    f_mins: tuple
    s_range: float
    bit_widths: tuple
    valid_masks: tuple

    @property
    def offset(self) -> float:
        return float(sum(self.f_mins))

    def recover_value(self, normalized_value: float) -> float:
        return self.s_range * normalized_value + self.offset

    def encode(self, g: FactorGraph, x) -> tuple:
        """Binarize an original assignment (MSB-first per variable)."""
        bits = []
        for val, w in zip(x, self.bit_widths):
            bits.extend((val >> (w - 1 - b)) & 1 for b in range(w))
        return tuple(bits)

    def decode(self, bits) -> tuple:
        """Decode a binary assignment back to original symbols."""
        out = []
        i = 0
        for w, card in zip(self.bit_widths, self.valid_masks):
            val = 0
            for _ in range(w):
                val = (val << 1) | bits[i]
                i += 1
            out.append(val)
        return tuple(out)


def _bit_width(card: int) -> int:
    return max(1, math.ceil(math.log2(card))) if card > 1 else 0


def normalize(g: FactorGraph):
    """Transform ``g`` into an equivalent binary graph with values in [0, 1].

    Returns ``(g_hat, record)``.  Each variable of cardinality ``c`` becomes
    ``ceil(log2 c)`` binary variables (zero for ``c == 1``); invalid codes of
    non-power-of-two alphabets are assigned the factor's own minimum so they
    can never beat a valid optimum.  When the total range ``s_range`` is zero
    all normalized tables are identically zero.
    """
    widths = tuple(_bit_width(c) for c in g.cardinalities)
    pos = {v: i for i, v in enumerate(g.variables)}

    new_vars = []
    var_bits = {}  # original var -> list of new binary var ids
    for v, w in zip(g.variables, widths):
        ids = [f"{v}.b{k+1}" for k in range(w)]
        var_bits[v] = ids
        new_vars.extend(ids)

    # Pass 1: per-factor min/max over valid encodings.
    f_mins, f_maxs = [], []
    for f in g.factors:
        vals = list(f.table)
        f_mins.append(min(vals))
        f_maxs.append(max(vals))
    s_range = float(sum(mx - mn for mn, mx in zip(f_mins, f_maxs)))

    # Pass 2: re-tabulate each factor over the binary scope.
    new_factors = []
    for f, fmin in zip(g.factors, f_mins):
        scope_bits = []
        for v in f.scope:
            scope_bits.extend(var_bits[v])
        scope_widths = [widths[pos[v]] for v in f.scope]
        scope_cards = [g.cardinalities[pos[v]] for v in f.scope]
        nbits = sum(scope_widths)
        table = np.empty(2**nbits if nbits else 1, dtype=float)
        for code in range(len(table)):
            # split the binary code into per-variable chunks (MSB-first)
            rem = code
            symbols = []
            valid = True
            for w, card in zip(reversed(scope_widths), reversed(scope_cards)):
                chunk = rem & ((1 << w) - 1)
                rem >>= w
                if chunk >= card:
                    valid = False
                symbols.append(chunk)
            symbols.reverse()
            if not valid:
                raw = fmin  # invalid codes pinned to the factor minimum
            else:
                idx = 0
                for s, card in zip(symbols, scope_cards):
                    idx = idx * card + s
                raw = f.table[idx]
            table[code] = 0.0 if s_range == 0 else (raw - fmin) / s_range
        new_factors.append(FactorNode(tuple(scope_bits), tuple(table.tolist())))

    g_hat = FactorGraph(tuple(new_vars), tuple(2 for _ in new_vars), tuple(new_factors))
    valid_masks = tuple(
        tuple(code < c for code in range(2**w)) if w else (True,)
        for w, c in zip(widths, g.cardinalities)
    )
    rec = NormalizationRecord(tuple(f_mins), s_range, widths, valid_masks)
    return g_hat, rec


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------


def brute_force_max(g: FactorGraph, cap: int = BRUTE_FORCE_CAP):
    """Exact maximum and the lexicographically smallest maximizer."""
    if g.num_configurations > cap:
        raise InstanceTooLargeError(
            f"{g.num_configurations} configurations exceed cap {cap}"
        )
    best_val = -math.inf
    best_x = None
    for x in itertools.product(*(range(c) for c in g.cardinalities)):
        val = g.evaluate(x)
        if val > best_val + 1e-15:
            best_val, best_x = val, x
    if best_x is None:  # zero variables: the empty assignment
        return g.evaluate(()), ()
    return best_val, best_x


def conditioned_local_max(g: FactorGraph, internal_vars, factors, boundary: dict):
    """Maximum of a partition's local objective given a boundary assignment.

    ``internal_vars`` is the partition's internal variable set, ``factors``
    its factor set, and ``boundary`` maps every boundary variable adjacent to
    those factors to a symbol.  Enumerates the internal variables exhaustively.
    """
    internal = [v for v in g.variables if v in set(internal_vars)]
    pos = {v: i for i, v in enumerate(g.variables)}
    needed = set()
    for f in factors:
        for v in f.scope:
            if v not in set(internal):
                needed.add(v)
    if needed != set(boundary):
        raise InvalidAssignmentError(
            f"boundary assignment covers {sorted(map(str, boundary))}, "
            f"needs exactly {sorted(map(str, needed))}"
        )
    cards = [g.cardinalities[pos[v]] for v in internal]
    best = -math.inf
    for combo in itertools.product(*(range(c) for c in cards)) if internal else [()]:
        local = dict(boundary)
        local.update(zip(internal, combo))
        total = 0.0
        for f in factors:
            idx = 0
            for v in f.scope:
                idx = idx * g.cardinalities[pos[v]] + local[v]
            total += f.table[idx]
        best = max(best, total)
    return best


# ---------------------------------------------------------------------------
# Portfolio fixture (9 assets, overlapping group constraints)
# ---------------------------------------------------------------------------

#: covariance pairs between assets whose prices co-move (1-based ids)
PORTFOLIO_COV_PAIRS = ((1, 2), (2, 3), (3, 4), (3, 5), (5, 7), (6, 7), (7, 8), (8, 9))

#: asset groups constrained by (lower, upper) budget bounds
PORTFOLIO_GROUPS = ((1, 2, 3), (3, 4, 5), (5, 6, 7), (7, 8, 9))

DEFAULT_MU = (0.12, 0.10, 0.07, 0.03, 0.17, 0.09, 0.14, 0.05, 0.11)
DEFAULT_SIGMA2 = (0.08, 0.05, 0.06, 0.02, 0.10, 0.04, 0.09, 0.03, 0.05)
DEFAULT_COV = (0.02, 0.015, 0.01, 0.025, 0.03, 0.02, 0.015, 0.01)
DEFAULT_BOUNDS = ((0, 2), (0, 2), (0, 2), (0, 3))


def markowitz_fixture(
    mu=DEFAULT_MU,
    sigma2=DEFAULT_SIGMA2,
    cov=DEFAULT_COV,
    lam: float = 0.5,
    bounds=DEFAULT_BOUNDS,
    penalty: float | None = None,
) -> FactorGraph:
    """Mean-variance portfolio selection over 9 binary asset decisions.

    Returns the 9-variable factor graph with 9 single-asset utility nodes,
    8 covariance-risk nodes, and 4 overlapping group-budget constraint nodes
    (21 factors).  Infeasible assignments are penalized by ``-penalty`` per
    violated constraint; the default penalty ``10 * sum(|mu|)`` is large
    enough that no infeasible point can be optimal.
    """
    if len(mu) != 9 or len(sigma2) != 9 or len(cov) != len(PORTFOLIO_COV_PAIRS):
        raise ValueError("fixture expects 9 assets and 8 covariance pairs")
    if penalty is None:
        penalty = 10.0 * sum(abs(m) for m in mu)
    variables = tuple(f"x{i}" for i in range(1, 10))
    factors = []
    for i in range(9):
        # h_i(x) = x*mu_i - lam*x^2*sigma2_i
        factors.append(
            FactorNode((f"x{i+1}",), (0.0, mu[i] - lam * sigma2[i]))
        )
    for (a, b), c in zip(PORTFOLIO_COV_PAIRS, cov):
        # f_ab(x_a, x_b) = -2*lam*x_a*x_b*cov_ab
        factors.append(
            FactorNode((f"x{a}", f"x{b}"), (0.0, 0.0, 0.0, -2.0 * lam * c))
        )
    for (members, (lo, hi)) in zip(PORTFOLIO_GROUPS, bounds):
        scope = tuple(f"x{i}" for i in members)
        table = []
        for bits in itertools.product((0, 1), repeat=3):
            s = sum(bits)
            table.append(0.0 if lo <= s <= hi else -penalty)
        factors.append(FactorNode(scope, tuple(table)))
    return FactorGraph(variables, tuple(2 for _ in variables), tuple(factors))


# ---------------------------------------------------------------------------
# Random instance generation (used by tests, sweeps, and the CLI)
# ---------------------------------------------------------------------------


def random_graph(
    rng: np.random.Generator,
    num_vars: int,
    max_card: int = 2,
    max_scope: int = 3,
    num_factors: int | None = None,
) -> FactorGraph:
    """Random connected-ish factor graph with nonnegative random tables."""
    variables = tuple(f"v{i}" for i in range(num_vars))
    cards = tuple(int(rng.integers(2, max_card + 1)) for _ in variables)
    if num_factors is None:
        num_factors = max(1, num_vars - 1)
    factors = []
    for k in range(num_factors):
        size = int(rng.integers(1, min(max_scope, num_vars) + 1))
        if k < num_vars - 1:
            # chain-style coverage so the graph tends to be connected
            scope_ids = [k, k + 1][:size] if size <= 2 else [k, (k + 1) % num_vars,
                                                             int(rng.integers(0, num_vars))]
            scope_ids = list(dict.fromkeys(i % num_vars for i in scope_ids))
        else:
            scope_ids = list(rng.choice(num_vars, size=size, replace=False))
        scope = tuple(variables[i] for i in scope_ids)
        n = 1
        for i in scope_ids:
            n *= cards[i]
        table = tuple(float(x) for x in rng.random(n))
        factors.append(FactorNode(scope, table))
    return FactorGraph(variables, cards, factors)


def random_split_instance(
    rng: np.random.Generator,
    boundary_size: int,
    worker_sizes,
    boundary_per_worker=None,
):
    """Normalized binary instance with a designed separator.

    Builds ``len(worker_sizes)`` partitions; worker ``n`` owns one factor over
    (its boundary subset, its internal variables), so removing the boundary
    set disconnects the partitions exactly.  Returns ``(graph, boundary_ids,
    partitions)`` where ``partitions`` is a list of (internal_ids, factor).
    """
    b_ids = tuple(f"b{i}" for i in range(boundary_size))
    variables = list(b_ids)
    factors = []
    partitions = []
    for n, r in enumerate(worker_sizes):
        internal = tuple(f"w{n}.{j}" for j in range(r))
        variables.extend(internal)
        if boundary_per_worker is None:
            sub = b_ids
        else:
            take = min(boundary_per_worker[n], boundary_size)
            sub = b_ids[:take] if n % 2 == 0 else b_ids[boundary_size - take:]
        scope = tuple(sub) + internal
        table = tuple(float(x) for x in rng.random(2 ** len(scope)))
        f = FactorNode(scope, table)
        factors.append(f)
        partitions.append((internal, f))
    g = FactorGraph(tuple(variables), tuple(2 for _ in variables), tuple(factors))
    g_norm, _ = normalize(g)
    # normalization preserves names (binary vars keep one bit: "v.b1")
    rename = {f"{v}.b1": v for v in variables}
    norm_factors = tuple(
        FactorNode(tuple(rename[s] for s in f.scope), f.table) for f in g_norm.factors
    )
    g_final = FactorGraph(
        tuple(variables), tuple(2 for _ in variables), norm_factors
    )
    parts = [(internal, norm_factors[i]) for i, (internal, _) in enumerate(partitions)]
    return g_final, b_ids, parts
