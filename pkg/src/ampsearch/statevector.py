"""Brute-force state-vector simulation of simple and parallel repeated search.

The state lives on one or two ``n``-qubit registers (``x`` first, ``y``
second; basis index ``x * N + y``).  Oracles are conditional phase flips and
the diffusion step is a literal inversion about the average over one
register, so recorded amplitudes can differ from other conventions by a
global sign only.

The extra ``u`` register and answer qubits of the full construction are not
stored: with the answer qubits held in ``(|0> - |1>)/sqrt(2)`` every oracle
call reduces to a phase flip on ``(x, y)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Union

import numpy as np

from .errors import SymmetryError
from .traces import Trace

__all__ = [
    "MAX_QUBITS",
    "SearchInstance",
    "StateVector",
    "apply_diffusion",
    "apply_phase_flip",
    "grover_full_run",
    "measure_distribution",
    "rs_evolve",
    "rs_full_run",
    "rs_step",
    "uniform_state",
]

# keeps every state at or below 2**20 amplitudes
MAX_QUBITS = {1: 13, 2: 10}
SYMMETRY_TOL = 1e-12

Marked = Union[Callable[[np.ndarray], np.ndarray], Iterable[int]]


@dataclass
class StateVector:
    n: int
    registers: int
    amps: np.ndarray

    @property
    def N(self) -> int:
        return 1 << self.n

    def tensor(self) -> np.ndarray:
        """View of the amplitudes with one axis per register."""
        return self.amps.reshape((self.N,) * self.registers)

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


@dataclass(frozen=True)
class SearchInstance:
    n: int
    e1: int
    e2: int = 0

    def __post_init__(self):
        N = 1 << self.n
        if not (0 <= self.e1 < N and 0 <= self.e2 < N):
            raise ValueError(f"targets must lie in [0, {N})")


def uniform_state(n: int, registers: int = 1) -> StateVector:
    if registers not in MAX_QUBITS:
        raise ValueError("registers must be 1 or 2")
    if not 1 <= n <= MAX_QUBITS[registers]:
        raise ValueError(
            f"n={n} outside 1..{MAX_QUBITS[registers]} for {registers} register(s)"
        )
    size = 1 << (n * registers)
    amps = np.full(size, 1.0 / np.sqrt(size), dtype=np.complex128)
    return StateVector(n=n, registers=registers, amps=amps)


def apply_phase_flip(s: StateVector, marked: Marked) -> StateVector:
    """Negate the amplitudes of marked basis states, in place.

    ``marked`` is either a callable mapping an array of basis indices to a
    boolean mask, or an iterable of basis indices.
    """
    if callable(marked):
        mask = np.asarray(marked(np.arange(s.amps.size)), dtype=bool)
        s.amps[mask] *= -1
    else:
        idx = np.fromiter(marked, dtype=np.int64)
        if idx.size:
            s.amps[np.unique(idx)] *= -1
    return s


def apply_diffusion(s: StateVector, register: int = 0) -> StateVector:
    """Inversion about the average over one register, in place.

    For every fixed value of the other register, each amplitude ``v`` on the
    chosen register becomes ``2 * mean - v``.
    """
    if not 0 <= register < s.registers:
        raise ValueError(f"register {register} invalid for {s.registers} register(s)")
    t = s.tensor()
    mean = t.mean(axis=register, keepdims=True)
    t *= -1
    t += 2 * mean
    return s


def measure_distribution(s: StateVector) -> np.ndarray:
    return np.abs(s.amps) ** 2


def _spread(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - values[0])))


def grover_full_run(inst: SearchInstance, steps: int) -> Trace:
    """Simulate ``steps`` Grover iterations and record ``(b, a)`` per step."""
    s = uniform_state(inst.n, 1)
    others = np.ones(s.N, dtype=bool)
    others[inst.e1] = False
    rows = []
    for i in range(steps + 1):
        if i:
            apply_phase_flip(s, [inst.e1])
            apply_diffusion(s, 0)
        rest = s.amps[others]
        if _spread(rest) > SYMMETRY_TOL:
            raise SymmetryError(f"non-target amplitudes diverged at step {i}")
        rows.append((s.amps[inst.e1], rest[0]))
    return Trace(N=s.N, labels=("b", "a"), values=np.array(rows))


def rs_step(s: StateVector, e1: int, e2: int, order: str = "yx") -> StateVector:
    """One parallel repeated-search step on a two-register state.

    ``order="yx"`` flips ``(x, y) = (e1, e2)`` and diffuses ``y``, then flips
    ``x = e1`` and diffuses ``x``.  ``order="xy"`` applies the two halves the
    other way round and exists only to show that it is a different operator.
    """
    N = s.N
    pair_index = e1 * N + e2

    def y_half():
        apply_phase_flip(s, [pair_index])
        apply_diffusion(s, 1)

    def x_half():
        s.tensor()[e1, :] *= -1
        apply_diffusion(s, 0)

    if order == "yx":
        y_half()
        x_half()
    elif order == "xy":
        x_half()
        y_half()
    else:
        raise ValueError(f"unknown order {order!r}")
    return s


def _rs_classes(s: StateVector, e1: int, e2: int, step: int) -> tuple:
    t = s.tensor()
    x_rest = np.arange(s.N) != e1
    y_rest = np.arange(s.N) != e2
    a_cls = t[e1, y_rest]
    alpha_cls = t[np.ix_(x_rest, y_rest)].ravel()
    beta_cls = t[x_rest, e2]
    for name, cls in (("a", a_cls), ("alpha", alpha_cls), ("beta", beta_cls)):
        if _spread(cls) > SYMMETRY_TOL:
            raise SymmetryError(f"class {name} amplitudes diverged at step {step}")
    return t[e1, e2], a_cls[0], alpha_cls[0], beta_cls[0]


def rs_full_run(inst: SearchInstance, steps: int, order: str = "yx") -> Trace:
    """Simulate the parallel repeated search and record ``(b, a, alpha, beta)``.

    ``b`` is the amplitude of ``(e1, e2)``, ``a`` of ``(e1, y != e2)``,
    ``alpha`` of ``(x != e1, y != e2)`` and ``beta`` of ``(x != e1, e2)``.
    """
    s = uniform_state(inst.n, 2)
    rows = [_rs_classes(s, inst.e1, inst.e2, 0)]
    for i in range(1, steps + 1):
        rs_step(s, inst.e1, inst.e2, order)
        rows.append(_rs_classes(s, inst.e1, inst.e2, i))
    return Trace(N=s.N, labels=("b", "a", "alpha", "beta"), values=np.array(rows))


def rs_evolve(inst: SearchInstance, steps: int) -> StateVector:
    """Final two-register state after ``steps`` repeated-search steps."""
    s = uniform_state(inst.n, 2)
    for _ in range(steps):
        rs_step(s, inst.e1, inst.e2)
    return s
