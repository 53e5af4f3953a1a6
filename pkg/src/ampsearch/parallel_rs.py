"""Four-amplitude model of the parallel repeated search.

Two oracles are queried in the same step: ``f2`` marks the pair
``(x, y) = (e1, e2)`` and ``f1`` marks ``x = e1``.  One step diffuses the
``y`` register after the pair flip, then the ``x`` register after the
``x = e1`` flip.  By symmetry the state stays in the span of four amplitude
classes::

    b      (e1, e2)
    a      (e1, y != e2)
    alpha  (x != e1, y != e2)
    beta   (x != e1, e2)

Amplitudes are stored per basis state; multiplicities ``N - 1`` and
``(N - 1)**2`` enter only through the norm.  The orthonormal coordinates
divide each class by the square root of its size.

The exact step is assembled from the two inversion-about-average phases
rather than written out entry by entry; the brute-force simulator in
:mod:`ampsearch.statevector` confirms it to round-off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundError
from .grover import optimal_steps_simple
from .numerics import mat_exp
from .traces import Trace

__all__ = [
    "LIMIT_MATRIX",
    "PAIRED_PATTERN",
    "RSReducedState",
    "PeakReport",
    "d_matrix",
    "optimal_steps_rs",
    "ortho_scaling",
    "rs_closed_form_deviation",
    "rs_exact_step",
    "rs_matrix",
    "rs_limit_matrix",
    "rs_ode_closed_form",
    "rs_paired_matrix",
    "rs_trace",
    "rs_x_phase",
    "rs_y_phase",
    "speedup",
    "theorem1_check",
]

PAIRED_PATTERN = np.array(
    [[0, 1, 0, 0], [-1, 0, 1, 0], [0, -1, 0, 0], [0, 0, 0, 0]], dtype=np.complex128
)
LIMIT_MATRIX = np.array([[0, 0, 1], [0, -1, 0], [1, 0, 0]], dtype=np.complex128)

PEAK_DEFICIT_CONSTANT = 10.0
PAIRED_CONSTANT = 100.0


def _check_size(N: int) -> None:
    if N < 4 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 4, got {N}")


@dataclass(frozen=True)
class RSReducedState:
    b: complex
    a: complex
    alpha: complex
    beta: complex
    N: int

    @classmethod
    def initial(cls, N: int) -> "RSReducedState":
        v = complex(1.0 / N)
        return cls(v, v, v, v, N)

    @classmethod
    def from_vector(cls, v, N: int) -> "RSReducedState":
        b, a, alpha, beta = (complex(z) for z in v)
        return cls(b, a, alpha, beta, N)

    def as_vector(self) -> np.ndarray:
        return np.array([self.b, self.a, self.alpha, self.beta], dtype=np.complex128)

    def norm(self) -> float:
        m = self.N - 1
        return (
            abs(self.b) ** 2
            + m * abs(self.a) ** 2
            + m * m * abs(self.alpha) ** 2
            + m * abs(self.beta) ** 2
        )


def _invert(marked: complex, rest: complex, N: int) -> tuple[complex, complex]:
    # slice holds one phase-flipped amplitude `marked` and N-1 copies of `rest`
    mean = ((N - 1) * rest - marked) / N
    return 2 * mean + marked, 2 * mean - rest


def _invert_unflipped(single: complex, rest: complex, N: int) -> tuple[complex, complex]:
    mean = ((N - 1) * rest + single) / N
    return 2 * mean - single, 2 * mean - rest


def rs_y_phase(s: RSReducedState) -> RSReducedState:
    """Flip ``(e1, e2)`` and invert about the average over ``y``."""
    N = s.N
    b, a = _invert(s.b, s.a, N)
    beta, alpha = _invert_unflipped(s.beta, s.alpha, N)
    return RSReducedState(b, a, alpha, beta, N)


def rs_x_phase(s: RSReducedState) -> RSReducedState:
    """Flip ``x = e1`` and invert about the average over ``x``."""
    N = s.N
    b, beta = _invert(s.b, s.beta, N)
    a, alpha = _invert(s.a, s.alpha, N)
    return RSReducedState(b, a, alpha, beta, N)


def rs_exact_step(s: RSReducedState) -> RSReducedState:
    return rs_x_phase(rs_y_phase(s))


def ortho_scaling(N: int) -> np.ndarray:
    """``S`` with ``ortho = S @ raw``: class sizes ``1, N-1, (N-1)**2, N-1``."""
    m = N - 1
    return np.diag([1.0, math.sqrt(m), float(m), math.sqrt(m)]).astype(np.complex128)


def rs_matrix(N: int, basis: str = "raw") -> np.ndarray:
    """Exact 4x4 matrix of one step, in raw or orthonormal coordinates."""
    _check_size(N)
    cols = [rs_exact_step(RSReducedState.from_vector(e, N)).as_vector() for e in np.eye(4)]
    z = np.column_stack(cols)
    if basis == "raw":
        return z
    if basis == "ortho":
        s = ortho_scaling(N)
        return s @ z @ np.linalg.inv(s)
    raise ValueError(f"unknown basis {basis!r}")


def rs_trace(N: int, steps: int) -> Trace:
    """Iterate the exact step from ``b = a = alpha = beta = 1/N``."""
    _check_size(N)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    z = rs_matrix(N)
    v = RSReducedState.initial(N).as_vector()
    rows = np.empty((steps + 1, 4), dtype=np.complex128)
    rows[0] = v
    for i in range(steps):
        v = z @ v
        rows[i + 1] = v
    return Trace(N=N, labels=("b", "a", "alpha", "beta"), values=rows)


def optimal_steps_rs(N: int) -> int:
    """``floor(pi * sqrt(N) / (2 * sqrt(2)))`` parallel steps."""
    if N < 4:
        raise ValueError("N must be >= 4")
    return int(math.floor(math.pi * math.sqrt(N) / (2 * math.sqrt(2))))


def speedup(N: int) -> float:
    """Sequential step count of two Grover searches over the parallel count."""
    return 2 * optimal_steps_simple(N) / optimal_steps_rs(N)


def rs_ode_closed_form(N: int, t: float) -> tuple[float, float, float]:
    """Approximate ``(b, a, alpha)`` at time ``t`` from the leading-order ODE."""
    t_max = math.pi * math.sqrt(N) / (2 * math.sqrt(2)) + 1
    if not 0 <= t <= t_max:
        raise ValueError(f"t outside [0, {t_max}]")
    rt = math.sqrt(N)
    ph = 2 * math.sqrt(2) * t / rt
    b = 0.5 - 0.5 * math.cos(ph)
    a = math.sin(ph) / math.sqrt(2 * N) + math.cos(ph) / N
    alpha = math.cos(2 * t / rt) / (2 * N) + 1 / (2 * N)
    return b, a, alpha


def rs_closed_form_deviation(N: int) -> float:
    """Max over integer ``t <= pi sqrt(N) / (2 sqrt(2))`` of ``|b_closed - b_exact|``."""
    t1 = math.pi * math.sqrt(N) / (2 * math.sqrt(2))
    last = int(math.floor(t1))
    tr = rs_trace(N, last)
    closed = np.array([rs_ode_closed_form(N, t)[0] for t in range(last + 1)])
    return float(np.max(np.abs(tr.b.real - closed)))


def rs_paired_matrix(N: int, constant: float = PAIRED_CONSTANT) -> np.ndarray:
    """``B = A1 @ A1 - I`` for the orthonormal one-step matrix ``A1``.

    Raises :class:`BoundError` unless every entry is within ``constant / N``
    of ``(4 / sqrt(N)) * PAIRED_PATTERN``.
    """
    a1 = rs_matrix(N, "ortho")
    b = a1 @ a1 - np.eye(4)
    diff = np.abs(b - 4 / math.sqrt(N) * PAIRED_PATTERN)
    worst = np.unravel_index(np.argmax(diff), diff.shape)
    if diff[worst] > constant / N:
        raise BoundError(
            f"paired matrix entry {tuple(int(i) + 1 for i in worst)} deviates by "
            f"{diff[worst]:.3e} > {constant}/N"
        )
    return b


def d_matrix() -> np.ndarray:
    r = 1 / math.sqrt(2)
    return np.array(
        [[0, -1j * r, 0], [1j * r, 0, -1j * r], [0, 1j * r, 0]], dtype=np.complex128
    )


def rs_limit_matrix(tol: float = 1e-10) -> np.ndarray:
    """``exp(pi i D)``, checked against ``I - 2 D^2`` and the exact permutation-like result."""
    d = d_matrix()
    out = mat_exp(1j * np.pi * d)
    series = np.eye(3) - 2 * d @ d
    for name, ref in (("I - 2D^2", series), ("limit matrix", LIMIT_MATRIX)):
        err = float(np.max(np.abs(out - ref)))
        if err > tol:
            raise BoundError(f"exp(pi i D) differs from {name} by {err:.3e}")
    return out


@dataclass(frozen=True)
class PeakReport:
    N: int
    optimal_steps: int
    peak_step: int
    peak_prob: float
    error_bound: float
    error_bound_ok: bool

    @property
    def deficit(self) -> float:
        return 1.0 - self.peak_prob


def theorem1_check(N: int, constant: float = PEAK_DEFICIT_CONSTANT) -> PeakReport:
    """Run past the predicted step count and compare the peak with ``constant / sqrt(N)``."""
    if N < 16:
        raise ValueError("N must be >= 16")
    opt = optimal_steps_rs(N)
    tr = rs_trace(N, opt + 5)
    peak = tr.peak_step()
    prob = float(tr.probabilities()[peak])
    bound = constant / math.sqrt(N)
    return PeakReport(
        N=N,
        optimal_steps=opt,
        peak_step=peak,
        peak_prob=prob,
        error_bound=bound,
        error_bound_ok=(1 - prob) <= bound,
    )
