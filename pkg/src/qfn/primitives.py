"""Algorithmic kernels: threshold encodings, amplitude amplification,
the approximately reversible phase test, and bit-by-bit maximization.

The operators here are small immutable objects with ``apply`` /
``apply_inverse`` methods over a :class:`~qfn.qsim.QuantumState`; all of them
accept a ``ctrl`` list so they can run inside block-diagonal (controlled)
contexts.  Query counting happens through optional callbacks so that a
resource ledger can observe exactly the operator applications the control
flow performs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PrecisionOverflowError
from .qsim import QuantumState


# ---------------------------------------------------------------------------
# Scalar helpers
# ---------------------------------------------------------------------------


def z_dec(bits) -> float:
    """Fractional binary decoding: bit k carries weight 2^-k."""
    return sum(b * 2.0 ** -(k + 1) for k, b in enumerate(bits))


def bits_from_int(value: int, width: int) -> tuple:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def int_from_bits(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def best_lower_bits(value: float, n_precision: int) -> tuple:
    """Largest ``n_precision``-bit string whose decoding does not exceed value."""
    scaled = int(math.floor(value * 2**n_precision + 1e-12))
    scaled = max(0, min(scaled, 2**n_precision - 1))
    return bits_from_int(scaled, n_precision)


def t_qubits(c: float, delta: float) -> int:
    """Phase-estimation register size for success-probability floor ``c``.

    t = ceil(-(1/2) log2(delta*c) - 1/2); zero or negative values collapse
    to 0 (a degenerate test that always reports phase zero).
    """
    if not 0 < c <= 1:
        raise ValueError(f"probability floor must be in (0, 1], got {c}")
    if not 0 < delta <= 1:
        raise ValueError(f"failure parameter must be in (0, 1], got {delta}")
    return max(0, math.ceil(-0.5 * math.log2(delta * c) - 0.5))


@dataclass(frozen=True)
class PrecisionParams:
    """Precision/failure knobs shared by every search routine.

    ``p_min_mode`` selects how the coordinator overlap floor is derived:
    ``"paper"`` applies the worker-failure discount ``(1-delta)^(2*Np*NG)``,
    ``"ideal"`` assumes exact worker oracles (used by the resource studies).
    ``t_cap`` clamps phase registers instead of rejecting them when set.
    """

    n_precision: int = 1
    delta: float = 0.2
    t_max: int = 8
    p_min_mode: str = "paper"
    t_cap: bool = False

    def __post_init__(self):
        if self.n_precision < 1:
            raise ValueError("n_precision must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0, 1)")
        if self.p_min_mode not in ("paper", "ideal"):
            raise ValueError(f"unknown p_min_mode {self.p_min_mode!r}")

    def p_min_c(self, num_workers: int, boundary_bits: int) -> float:
        if self.p_min_mode == "ideal":
            return 2.0**-boundary_bits
        return (1.0 - self.delta) ** (
            2 * self.n_precision * num_workers
        ) / 2.0**boundary_bits

    def t_for(self, p_min: float) -> int:
        t = t_qubits(p_min, self.delta)
        if t > self.t_max:
            if self.t_cap:
                return self.t_max
            raise PrecisionOverflowError(
                f"t({p_min:.3g}, {self.delta}) = {t} exceeds t_max = {self.t_max}"
            )
        return t


# ---------------------------------------------------------------------------
# State preparation operators
# ---------------------------------------------------------------------------


class UniformPrep:
    """Hadamard state preparation over a search register.

    The baseline oracle: a uniform superposition over the internal
    configurations, with overlap floor 2^-N on any nonempty optimum set.
    """

    def __init__(self, qubits, on_query=None):
        self.qubits = tuple(qubits)
        self.p_min = 2.0 ** -len(self.qubits)
        self.on_query = on_query

    def apply(self, state: QuantumState, ctrl=()):
        if self.on_query:
            self.on_query(1)
        state.apply_h(self.qubits, ctrl)
        return state

    # Hadamard layers are involutions; the inverse has the same action but
    # is charged separately, matching the U_F-vs-U_F^dagger query accounting.
    def apply_inverse(self, state: QuantumState, ctrl=()):
        if self.on_query:
            self.on_query(1)
        state.apply_h(self.qubits, ctrl)
        return state


class MatrixPrep:
    """Arbitrary unitary state preparation over a small contiguous register.

    Used by tests to exercise the phase test and amplitude amplifier with
    random preparations.
    """

    def __init__(self, qubits, unitary, on_query=None):
        self.qubits = tuple(qubits)
        if list(self.qubits) != list(range(self.qubits[0], self.qubits[-1] + 1)):
            raise ValueError("MatrixPrep register must be contiguous")
        dim = 2 ** len(self.qubits)
        u = np.asarray(unitary, dtype=complex)
        if u.shape != (dim, dim):
            raise ValueError("unitary shape mismatch")
        if not np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-10):
            raise ValueError("preparation matrix is not unitary")
        self.u = u
        self.p_min = None
        self.on_query = on_query

    def _apply_matrix(self, state: QuantumState, mat, ctrl):
        v = state._tensor()
        fixed = {q: b for q, b in ctrl}
        key = state._key(fixed)
        sub = v[key]
        pos = state._remaining_positions(fixed, self.qubits)
        lead = pos[0]
        k = len(self.qubits)
        shape = sub.shape
        merged = np.ascontiguousarray(sub).reshape(
            shape[:lead] + (2**k,) + shape[lead + k:]
        )
        out = np.tensordot(mat, merged, axes=([1], [lead]))
        out = np.moveaxis(out, 0, lead)
        v[key] = out.reshape(shape)

    def apply(self, state: QuantumState, ctrl=()):
        if self.on_query:
            self.on_query(1)
        self._apply_matrix(state, self.u, ctrl)
        return state

    def apply_inverse(self, state: QuantumState, ctrl=()):
        if self.on_query:
            self.on_query(1)
        self._apply_matrix(state, self.u.conj().T, ctrl)
        return state


def default_state_prep(qubits, on_query=None) -> UniformPrep:
    """Baseline Hadamard preparation; ``p_min = 2^-N`` exactly."""
    return UniformPrep(qubits, on_query)


# ---------------------------------------------------------------------------
# Amplitude amplification
# ---------------------------------------------------------------------------


class AmplitudeAmplifier:
    """Grover-type operator: prep . (2|0><0|-I) . prep^H . mark.

    ``mark_qubits``/``mark_flags`` define the threshold phase oracle (flags
    may span prefix-value registers, which realizes the block-diagonal
    prefix-conditioned form as a single joint diagonal).  ``reflect_qubits``
    is the full workspace the preparation touches.  One application charges
    one prep plus one inverse prep, and fires ``on_apply`` once.
    """

    def __init__(self, prep, mark_qubits, mark_flags, reflect_qubits, on_apply=None):
        self.prep = prep
        self.mark_qubits = tuple(mark_qubits)
        self.mark_flags = np.asarray(mark_flags, dtype=bool)
        if self.mark_flags.size != 2 ** len(self.mark_qubits):
            raise ValueError("marking table size mismatch")
        self.reflect_qubits = tuple(reflect_qubits)
        self.on_apply = on_apply

    def _mark(self, state, ctrl):
        if self.mark_flags.any():
            state.apply_phase_flip(self.mark_qubits, self.mark_flags, ctrl)

    def apply(self, state: QuantumState, ctrl=()):
        if self.on_apply:
            self.on_apply(1)
        self._mark(state, ctrl)
        self.prep.apply_inverse(state, ctrl)
        state.reflect_about_zero(self.reflect_qubits, ctrl)
        self.prep.apply(state, ctrl)
        return state

    def apply_inverse(self, state: QuantumState, ctrl=()):
        if self.on_apply:
            self.on_apply(1)
        self.prep.apply_inverse(state, ctrl)
        state.reflect_about_zero(self.reflect_qubits, ctrl)
        self.prep.apply(state, ctrl)
        self._mark(state, ctrl)
        return state


def build_uaa(prep, mark_qubits, mark_flags, reflect_qubits, on_apply=None):
    return AmplitudeAmplifier(prep, mark_qubits, mark_flags, reflect_qubits, on_apply)


# ---------------------------------------------------------------------------
# Approximately reversible phase test
# ---------------------------------------------------------------------------


def _qpe_forward(state, uo, est_qubits, ctrl):
    state.apply_h(est_qubits, ctrl)
    t = len(est_qubits)
    for k, q in enumerate(est_qubits):
        power = 2 ** (t - 1 - k)
        sub_ctrl = tuple(ctrl) + ((q, 1),)
        for _ in range(power):
            uo.apply(state, sub_ctrl)
    state.apply_qft_inverse(est_qubits, ctrl)


def _qpe_backward(state, uo, est_qubits, ctrl):
    state.apply_qft(est_qubits, ctrl)
    t = len(est_qubits)
    for k in reversed(range(t)):
        q = est_qubits[k]
        power = 2 ** (t - 1 - k)
        sub_ctrl = tuple(ctrl) + ((q, 1),)
        for _ in range(power):
            uo.apply_inverse(state, sub_ctrl)
    state.apply_h(est_qubits, ctrl)


def _flip_if_nonzero(state, target, zero_qubits, ctrl):
    """X on target exactly when the given qubits are not all zero."""
    state.apply_x(target, ctrl)
    state.apply_x(target, tuple(ctrl) + tuple((q, 0) for q in zero_qubits))


def _swap_if_nonzero(state, q_a, q_b, zero_qubits, ctrl):
    """Swap (q_a, q_b) exactly when the given qubits are not all zero."""
    state.swap_pair(q_a, q_b, ctrl)
    state.swap_pair(q_a, q_b, tuple(ctrl) + tuple((q, 0) for q in zero_qubits))


def phase_test(
    state: QuantumState,
    prep,
    uo,
    t: int,
    est_qubits,
    target_qubits,
    out_qubit: int,
    aux_qubit: int,
    ctrl=(),
    inverse: bool = False,
):
    """Six-step approximately reversible phase test.

    Writes "the marked mass is nonzero" into ``out_qubit`` and restores the
    workspace on the clean branch.  ``target_qubits`` is the register the
    preparation acts on (used by the error-mitigation zero check together
    with the estimation register).  Costs 2^(t+1)-2 applications of ``uo``
    (and inverses) plus two preparations, both charged through the operator
    callbacks.
    """
    est_qubits = tuple(est_qubits)
    if len(est_qubits) != t:
        raise ValueError("estimation register width disagrees with t")
    workspace = est_qubits + tuple(target_qubits)

    def forward():
        prep.apply(state, ctrl)                               # 1 initialization
        _qpe_forward(state, uo, est_qubits, ctrl)             # 2 forward QPE
        _flip_if_nonzero(state, out_qubit, est_qubits, ctrl)  # 3 conditional flip
        _qpe_backward(state, uo, est_qubits, ctrl)            # 4 inverse QPE
        prep.apply_inverse(state, ctrl)                       # 5 uncompute
        _swap_if_nonzero(state, out_qubit, aux_qubit, workspace, ctrl)  # 6 mitigate

    def backward():
        _swap_if_nonzero(state, out_qubit, aux_qubit, workspace, ctrl)
        prep.apply(state, ctrl)
        _qpe_forward(state, uo, est_qubits, ctrl)
        _flip_if_nonzero(state, out_qubit, est_qubits, ctrl)
        _qpe_backward(state, uo, est_qubits, ctrl)
        prep.apply_inverse(state, ctrl)

    backward() if inverse else forward()
    return state


# ---------------------------------------------------------------------------
# Generic bit-by-bit maximization
# ---------------------------------------------------------------------------


class MaxFinder:
    """Bit-by-bit maximization of a tabulated function over a search register.

    ``value_table`` holds F over (context bits, search bits), flattened with
    the context as the most significant digits; ``context_qubits`` may be
    empty.  Each iteration runs one phase test against the threshold oracle
    "F(y) >= z_dec(prefix, 1)" realized as a joint diagonal over (context,
    prefix, search).  Measuring the result register afterwards yields the
    best ``n_precision``-bit lower approximation of max F with probability
    at least (1-delta)^(2*n_precision).
    """

    def __init__(
        self,
        params: PrecisionParams,
        value_table,
        context_qubits,
        search_qubits,
        est_qubits,
        result_qubits,
        aux_qubit: int,
        prep=None,
        on_query=None,
        on_uaa=None,
        p_min: float | None = None,
    ):
        self.params = params
        self.context_qubits = tuple(context_qubits)
        self.search_qubits = tuple(search_qubits)
        self.est_qubits = tuple(est_qubits)
        self.result_qubits = tuple(result_qubits)
        self.aux_qubit = aux_qubit
        self.values = np.asarray(value_table, dtype=float).reshape(-1)
        expect = 2 ** (len(self.context_qubits) + len(self.search_qubits))
        if self.values.size != expect:
            raise ValueError("value table size mismatch")
        if self.values.min() < -1e-12 or self.values.max() > 1.0 + 1e-12:
            raise ValueError("objective values must lie in [0, 1]")
        self.prep = prep or UniformPrep(self.search_qubits, on_query)
        self.p_min = p_min if p_min is not None else self.prep.p_min
        self.t = params.t_for(self.p_min)
        if len(self.est_qubits) != self.t:
            raise ValueError(
                f"estimation register has {len(self.est_qubits)} qubits, needs {self.t}"
            )
        self.on_uaa = on_uaa

    def _mark_flags(self, n_p: int):
        """Joint marking diagonal over (context, prefix, search) for step n_p."""
        n_ctx = len(self.context_qubits)
        n_y = len(self.search_qubits)
        prefix_w = n_p - 1
        vals = self.values.reshape(2**n_ctx, 2**n_y)
        thr = (2 * np.arange(2**prefix_w) + 1) / 2.0**n_p
        flags = vals[:, None, :] >= thr[None, :, None] - 1e-12
        return flags.reshape(-1)

    def _uaa(self, n_p: int):
        prefix = self.result_qubits[: n_p - 1]
        mark_qubits = self.context_qubits + prefix + self.search_qubits
        return AmplitudeAmplifier(
            self.prep,
            mark_qubits,
            self._mark_flags(n_p),
            reflect_qubits=self.search_qubits,
            on_apply=self.on_uaa,
        )

    def apply(self, state: QuantumState, ctrl=()):
        for n_p in range(1, self.params.n_precision + 1):
            phase_test(
                state,
                self.prep,
                self._uaa(n_p),
                self.t,
                self.est_qubits,
                self.search_qubits,
                out_qubit=self.result_qubits[n_p - 1],
                aux_qubit=self.aux_qubit,
                ctrl=ctrl,
            )
        return state

    def apply_inverse(self, state: QuantumState, ctrl=()):
        for n_p in reversed(range(1, self.params.n_precision + 1)):
            phase_test(
                state,
                self.prep,
                self._uaa(n_p),
                self.t,
                self.est_qubits,
                self.search_qubits,
                out_qubit=self.result_qubits[n_p - 1],
                aux_qubit=self.aux_qubit,
                ctrl=ctrl,
                inverse=True,
            )
        return state

    @property
    def query_count_per_application(self) -> int:
        """Closed-form state-prep queries for one full application."""
        return self.params.n_precision * (2 ** (self.t + 2) - 2)
