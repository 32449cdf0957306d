"""Dense complex state-vector engine with named registers.

The engine targets instances of up to ~24 qubits.  Amplitudes live in a flat
``complex128`` array; qubit 0 is the most significant bit of the flat index,
and bit 1 of a register is its most significant qubit.  All operations accept
an optional ``ctrl`` list of ``(qubit, value)`` pairs and act only on the
matching slice, which is how block-diagonal (prefix-conditioned) operators
are realized.

Kernels reshape the flat array around only the qubits an operation touches
(contiguous qubits merge into one axis), so every update is a low-dimensional
vectorized numpy expression over large contiguous blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import WidthOverflowError

#: hard cap on simulated qubits (2^26 amplitudes ~ 1 GiB)
ENGINE_QUBIT_CAP = 26

_NORM_TOL = 1e-10

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


@dataclass
class RegisterLayout:
    """Ordered map of named registers to global qubit index ranges."""

    names: list = field(default_factory=list)
    widths: dict = field(default_factory=dict)
    starts: dict = field(default_factory=dict)
    owners: dict = field(default_factory=dict)

    def add(self, name: str, width: int, owner: str = "c") -> "RegisterLayout":
        if name in self.widths:
            raise ValueError(f"duplicate register {name!r}")
        self.starts[name] = self.total_qubits
        self.names.append(name)
        self.widths[name] = width
        self.owners[name] = owner
        return self

    @property
    def total_qubits(self) -> int:
        return sum(self.widths[n] for n in self.names)

    def qubits(self, name: str) -> tuple:
        s = self.starts[name]
        return tuple(range(s, s + self.widths[name]))

    def qubit(self, name: str, bit: int) -> int:
        """Global index of register bit ``bit`` (1-based, MSB first)."""
        if not 1 <= bit <= self.widths[name]:
            raise IndexError(f"bit {bit} out of range for {name}")
        return self.starts[name] + bit - 1

    def width(self, name: str) -> int:
        return self.widths[name]

    def owner(self, name: str) -> str:
        return self.owners[name]

    def name_of(self, qubit: int) -> str:
        for n in self.names:
            if self.starts[n] <= qubit < self.starts[n] + self.widths[n]:
                return n
        raise IndexError(f"qubit {qubit} outside layout")

    def describe(self) -> str:
        rows = [
            f"{n}: qubits {self.starts[n]}..{self.starts[n]+self.widths[n]-1}"
            f" ({self.widths[n]}) @ {self.owners[n]}"
            for n in self.names
            if self.widths[n]
        ]
        return "\n".join(rows)

    def check_cap(self, cap: int = ENGINE_QUBIT_CAP):
        if self.total_qubits > cap:
            raise WidthOverflowError(
                f"layout needs {self.total_qubits} qubits (cap {cap}):\n"
                + self.describe()
            )
        return self


def _plan(n, singles, runs):
    """Axis plan around special qubits.

    ``singles`` are qubits that must occupy their own axis (controls,
    single-qubit targets); ``runs`` are qubit groups that may merge with
    adjacent group members into one axis.  Returns ``(shape, axis_of,
    span_of)`` where ``axis_of[q]`` maps a single qubit to its axis and
    ``span_of[i]`` maps run-group indices to (axis, qubit list).
    """
    marks = {}
    for q in singles:
        marks[q] = ("s", q)
    for gi, grp in enumerate(runs):
        for q in grp:
            if q in marks:
                raise ValueError("qubit appears in two roles")
            marks[q] = ("r", gi)
    shape = []
    axis_of = {}
    span_axis = {}
    span_bits = {}
    prev_special = None
    i = 0
    while i < n:
        if i not in marks:
            j = i
            while j < n and j not in marks:
                j += 1
            shape.append(2 ** (j - i))
            i = j
            prev_special = None
            continue
        kind, key = marks[i]
        if kind == "s":
            axis_of[i] = len(shape)
            shape.append(2)
            prev_special = None
            i += 1
        else:
            if prev_special == ("r", key):
                shape[-1] *= 2
                span_bits[key].append(i)
            else:
                if key in span_axis:
                    raise ValueError("run group must be contiguous")
                span_axis[key] = len(shape)
                span_bits[key] = [i]
                shape.append(2)
                prev_special = ("r", key)
            i += 1
            continue
    span_of = {k: (span_axis[k], span_bits[k]) for k in span_axis}
    return tuple(shape), axis_of, span_of


class QuantumState:
    """Normalized amplitude vector over a register layout."""

    def __init__(self, layout: RegisterLayout):
        layout.check_cap()
        self.layout = layout
        self.n = layout.total_qubits
        self.amps = np.zeros(2**self.n, dtype=complex)
        self.amps[0] = 1.0

    # -- bookkeeping -----------------------------------------------------------

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def check_norm(self, tol: float = _NORM_TOL):
        nrm = self.norm()
        if abs(nrm - 1.0) > tol:
            raise AssertionError(f"state norm drifted to {nrm}")
        return self

    def copy(self) -> "QuantumState":
        other = QuantumState.__new__(QuantumState)
        other.layout = self.layout
        other.n = self.n
        other.amps = self.amps.copy()
        return other

    def reset(self):
        self.amps[:] = 0
        self.amps[0] = 1.0
        return self

    def _ctrl_sorted(self, ctrl, extra):
        cq = [q for q, _ in ctrl]
        overlap = set(cq) & set(extra)
        if overlap:
            raise ValueError(f"control qubits {sorted(overlap)} overlap targets")
        if len(set(cq)) != len(cq):
            raise ValueError("duplicate control qubit")
        return cq

    # -- elementary gates --------------------------------------------------------

    def apply_single(self, qubit: int, mat, ctrl=()):
        cq = self._ctrl_sorted(ctrl, (qubit,))
        shape, axis_of, _ = _plan(self.n, cq + [qubit], ())
        v = self.amps.reshape(shape)
        base = [slice(None)] * len(shape)
        for q, b in ctrl:
            base[axis_of[q]] = b
        k0, k1 = list(base), list(base)
        k0[axis_of[qubit]] = 0
        k1[axis_of[qubit]] = 1
        k0, k1 = tuple(k0), tuple(k1)
        a0 = v[k0]
        a1 = v[k1]
        new0 = mat[0, 0] * a0 + mat[0, 1] * a1
        new1 = mat[1, 0] * a0 + mat[1, 1] * a1
        v[k0] = new0
        v[k1] = new1
        return self

    def apply_h(self, qubits, ctrl=()):
        for q in qubits:
            self.apply_single(q, _H, ctrl)
        return self

    def apply_x(self, qubit: int, ctrl=()):
        return self.apply_single(qubit, _X, ctrl)

    def apply_cnot(self, control: int, target: int, ctrl=()):
        return self.apply_x(target, ctrl=tuple(ctrl) + ((control, 1),))

    def swap_pair(self, q_a: int, q_b: int, ctrl=()):
        """Exchange the amplitudes of the (0,1) and (1,0) components."""
        cq = self._ctrl_sorted(ctrl, (q_a, q_b))
        shape, axis_of, _ = _plan(self.n, cq + [q_a, q_b], ())
        v = self.amps.reshape(shape)
        base = [slice(None)] * len(shape)
        for q, b in ctrl:
            base[axis_of[q]] = b
        k01, k10 = list(base), list(base)
        k01[axis_of[q_a]], k01[axis_of[q_b]] = 0, 1
        k10[axis_of[q_a]], k10[axis_of[q_b]] = 1, 0
        k01, k10 = tuple(k01), tuple(k10)
        tmp = v[k01].copy()
        v[k01] = v[k10]
        v[k10] = tmp
        return self

    # -- diagonal / predicate operations -------------------------------------------

    @staticmethod
    def _aligned(qubits, table, shape, span_of, dropped):
        """Reshape a table over ``qubits`` (first listed qubit = MSB) so it
        broadcasts against a view whose ``dropped`` axes were int-indexed."""
        qubits = tuple(qubits)
        t = np.asarray(table).reshape((2,) * len(qubits) if qubits else (1,))
        if qubits:
            ranks = np.argsort(np.argsort(qubits))
            t = np.transpose(t, axes=np.argsort(ranks))
        run_axes = {axis: bits for axis, bits in span_of.values()}
        out_shape = [
            2 ** len(run_axes[i]) if i in run_axes else 1
            for i in range(len(shape))
            if i not in dropped
        ]
        return t.reshape(out_shape or [1])

    def apply_diag(self, qubits, values, ctrl=()):
        qubits = tuple(qubits)
        cq = self._ctrl_sorted(ctrl, qubits)
        shape, axis_of, span_of = _plan(
            self.n, cq, _contiguous_groups(sorted(qubits))
        )
        v = self.amps.reshape(shape)
        key = [slice(None)] * len(shape)
        for q, b in ctrl:
            key[axis_of[q]] = b
        sub = v[tuple(key)]
        dropped = [axis_of[q] for q, _ in ctrl]
        sub *= self._aligned(qubits, values, shape, span_of, dropped)
        return self

    def apply_phase_flip(self, qubits, flags, ctrl=()):
        """Multiply amplitudes by -1 where ``flags`` over ``qubits`` is true."""
        signs = np.where(np.asarray(flags, dtype=bool), -1.0, 1.0)
        return self.apply_diag(qubits, signs, ctrl)

    def reflect_about_zero(self, qubits, ctrl=()):
        """Apply 2|0><0| - I on ``qubits``: flip the sign of every non-zero
        component, leave the all-zero component alone."""
        qubits = tuple(sorted(qubits))
        cq = self._ctrl_sorted(ctrl, qubits)
        shape, axis_of, span_of = _plan(self.n, cq, _contiguous_groups(qubits))
        v = self.amps.reshape(shape)
        key = [slice(None)] * len(shape)
        for q, b in ctrl:
            key[axis_of[q]] = b
        v[tuple(key)] *= -1.0
        zero = list(key)
        for axis, _bits in span_of.values():
            zero[axis] = 0
        v[tuple(zero)] *= -1.0
        return self

    def apply_x_if(self, target: int, pred_qubits, pred_flags, ctrl=()):
        """Flip ``target`` on basis states where the predicate over
        ``pred_qubits`` holds (multi-controlled NOT with arbitrary predicate)."""
        pred_qubits = tuple(pred_qubits)
        cq = self._ctrl_sorted(ctrl, pred_qubits + (target,))
        shape, axis_of, span_of = _plan(
            self.n, cq + [target], _contiguous_groups(sorted(pred_qubits))
        )
        v = self.amps.reshape(shape)
        base = [slice(None)] * len(shape)
        for q, b in ctrl:
            base[axis_of[q]] = b
        k0, k1 = list(base), list(base)
        k0[axis_of[target]] = 0
        k1[axis_of[target]] = 1
        k0, k1 = tuple(k0), tuple(k1)
        a0 = v[k0]
        a1 = v[k1]
        mask = self._pred_mask(pred_qubits, pred_flags, shape, span_of,
                               dropped=[axis_of[q] for q, _ in ctrl]
                               + [axis_of[target]])
        new0 = np.where(mask, a1, a0)
        new1 = np.where(mask, a0, a1)
        v[k0] = new0
        v[k1] = new1
        return self

    def apply_swap_if(self, q_a: int, q_b: int, pred_qubits, pred_flags, ctrl=()):
        """Swap two qubits on basis states where the predicate holds."""
        pred_qubits = tuple(pred_qubits)
        cq = self._ctrl_sorted(ctrl, pred_qubits + (q_a, q_b))
        shape, axis_of, span_of = _plan(
            self.n, cq + [q_a, q_b], _contiguous_groups(sorted(pred_qubits))
        )
        v = self.amps.reshape(shape)
        base = [slice(None)] * len(shape)
        for q, b in ctrl:
            base[axis_of[q]] = b
        k01, k10 = list(base), list(base)
        k01[axis_of[q_a]], k01[axis_of[q_b]] = 0, 1
        k10[axis_of[q_a]], k10[axis_of[q_b]] = 1, 0
        k01, k10 = tuple(k01), tuple(k10)
        a01 = v[k01]
        a10 = v[k10]
        mask = self._pred_mask(
            pred_qubits, pred_flags, shape, span_of,
            dropped=[axis_of[q] for q, _ in ctrl] + [axis_of[q_a], axis_of[q_b]],
        )
        new01 = np.where(mask, a10, a01)
        new10 = np.where(mask, a01, a10)
        v[k01] = new01
        v[k10] = new10
        return self

    @classmethod
    def _pred_mask(cls, pred_qubits, pred_flags, shape, span_of, dropped):
        """Predicate table aligned to a view sliced at ``dropped`` axes."""
        return cls._aligned(
            pred_qubits, np.asarray(pred_flags, dtype=bool), shape, span_of, dropped
        )

    # -- Fourier transforms ---------------------------------------------------------

    def _apply_fft(self, reg_qubits, inverse: bool, ctrl=()):
        if not reg_qubits:
            return self
        reg_qubits = tuple(reg_qubits)
        if list(reg_qubits) != list(range(reg_qubits[0], reg_qubits[-1] + 1)):
            raise ValueError("QFT register must be contiguous")
        cq = self._ctrl_sorted(ctrl, reg_qubits)
        shape, axis_of, span_of = _plan(self.n, cq, (list(reg_qubits),))
        v = self.amps.reshape(shape)
        key = [slice(None)] * len(shape)
        for q, b in ctrl:
            key[axis_of[q]] = b
        key = tuple(key)
        sub = v[key]
        axis, _bits = span_of[0]
        sub_axis = axis - sum(1 for q, b in ctrl if axis_of[q] < axis)
        transform = np.fft.fft if inverse else np.fft.ifft
        v[key] = transform(sub, axis=sub_axis, norm="ortho")
        return self

    def apply_qft(self, reg_qubits, ctrl=()):
        """QFT: |j> -> 2^{-t/2} sum_k exp(2*pi*i*j*k/2^t) |k>."""
        return self._apply_fft(reg_qubits, inverse=False, ctrl=ctrl)

    def apply_qft_inverse(self, reg_qubits, ctrl=()):
        return self._apply_fft(reg_qubits, inverse=True, ctrl=ctrl)

    # -- measurement and projection ----------------------------------------------

    def marginal(self, reg_qubits) -> np.ndarray:
        """Exact probability distribution over qubits listed in ascending
        order (first listed qubit is the MSB of the outcome index)."""
        reg_qubits = list(reg_qubits)
        if reg_qubits != sorted(reg_qubits):
            raise ValueError("marginal expects ascending qubit order")
        shape, _axis_of, span_of = _plan(
            self.n, [], _contiguous_groups(reg_qubits)
        )
        probs = np.abs(self.amps.reshape(shape)) ** 2
        keep = {axis for axis, _ in span_of.values()}
        other = tuple(i for i in range(len(shape)) if i not in keep)
        marg = probs.sum(axis=other) if other else probs
        return marg.reshape(-1)

    def most_probable(self, reg_qubits) -> tuple:
        marg = self.marginal(reg_qubits)
        idx = int(np.argmax(marg))
        w = len(tuple(reg_qubits))
        return tuple((idx >> (w - 1 - i)) & 1 for i in range(w))

    def measure(self, reg_qubits, rng: np.random.Generator):
        """Sample a readout of the register and collapse the state."""
        marg = self.marginal(reg_qubits)
        idx = int(rng.choice(len(marg), p=marg / marg.sum()))
        w = len(tuple(reg_qubits))
        bits = tuple((idx >> (w - 1 - i)) & 1 for i in range(w))
        self.collapse(reg_qubits, bits)
        return bits

    def _fixed_key(self, fixed: dict):
        qubits = sorted(fixed)
        shape, _axis_of, span_of = _plan(self.n, [], _contiguous_groups(qubits))
        key = [slice(None)] * len(shape)
        for axis, bits in span_of.values():
            val = 0
            for q in bits:
                val = (val << 1) | int(fixed[q])
            key[axis] = val
        return shape, tuple(key)

    def collapse(self, reg_qubits, bits):
        fixed = dict(zip(reg_qubits, bits))
        shape, key = self._fixed_key(fixed)
        v = self.amps.reshape(shape)
        keep = np.zeros_like(v)
        keep[key] = v[key]
        nrm = np.linalg.norm(keep)
        if nrm == 0:
            raise ValueError(f"cannot collapse onto zero-probability outcome {bits}")
        self.amps = (keep / nrm).reshape(-1)
        return self

    def project_probability(self, reg_qubits, bits) -> float:
        fixed = dict(zip(reg_qubits, bits))
        shape, key = self._fixed_key(fixed)
        v = self.amps.reshape(shape)
        return float(np.sum(np.abs(v[key]) ** 2))

    def basis_amplitude(self, assignments: dict) -> complex:
        """Amplitude of one basis state; ``assignments`` maps register names
        to bit tuples and must cover every qubit."""
        fixed = {}
        for name, bits in assignments.items():
            for q, b in zip(self.layout.qubits(name), bits):
                fixed[q] = int(b)
        if len(fixed) != self.n:
            raise ValueError("basis_amplitude requires all qubits fixed")
        idx = 0
        for q in range(self.n):
            idx = (idx << 1) | fixed[q]
        return complex(self.amps[idx])

    def branch_probability(self, assignments: dict) -> float:
        """Probability of a (possibly partial) named-register assignment."""
        fixed = {}
        for name, bits in assignments.items():
            for q, b in zip(self.layout.qubits(name), bits):
                fixed[q] = int(b)
        if not fixed:
            return 1.0
        shape, key = self._fixed_key(fixed)
        v = self.amps.reshape(shape)
        return float(np.sum(np.abs(v[key]) ** 2))

    def dump(self, cutoff: float = 1e-12, limit: int = 64):
        """Amplitude listing for debugging (``--dump-state``)."""
        rows = []
        for idx in np.argsort(-np.abs(self.amps)):
            a = self.amps[idx]
            if abs(a) < cutoff or len(rows) >= limit:
                break
            bits = format(int(idx), f"0{self.n}b")
            labeled = []
            for name in self.layout.names:
                if not self.layout.widths[name]:
                    continue
                s = self.layout.starts[name]
                labeled.append(f"{name}={bits[s:s+self.layout.widths[name]]}")
            rows.append(f"{' '.join(labeled)}  {a.real:+.6f}{a.imag:+.6f}j")
        return "\n".join(rows)


def _contiguous_groups(qubits):
    """Split an ascending qubit list into maximal contiguous groups."""
    qubits = list(qubits)
    if not qubits:
        return ()
    groups = [[qubits[0]]]
    for q in qubits[1:]:
        if q == groups[-1][-1] + 1:
            groups[-1].append(q)
        else:
            groups.append([q])
    return tuple(groups)


def zero_state(layout: RegisterLayout) -> QuantumState:
    return QuantumState(layout)
