"""Small dense complex linear algebra and initial-value-problem helpers.

Everything here works on plain ``numpy`` arrays of dtype ``complex128``;
matrices are 2-D arrays, vectors 1-D.  All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "IvpProblem",
    "VectorTrace",
    "as_matrix",
    "cubic_roots",
    "integrate_ivp",
    "mat_exp",
    "mat_pow",
    "mat_vec",
    "rk4_step_matrix",
    "tridiag_toeplitz_eigenvalues",
]

# Taylor degree used inside mat_exp after scaling to norm <= 1/2;
# remainder (1/2)^19 / 19! ~ 1.6e-23.
_EXPM_DEGREE = 18
_EXPM_THETA = 0.5


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _as_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def mat_vec(m, v) -> np.ndarray:
    """Dense matrix-vector product with a shape check."""
    a = as_matrix(m)
    x = np.asarray(v, dtype=np.complex128)
    if x.ndim != 1 or a.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {a.shape} times vector {x.shape}")
    return a @ x


def mat_pow(m, k: int) -> np.ndarray:
    """k-fold product of a square matrix (``k = 0`` gives the identity)."""
    a = _as_square(m)
    if k < 0:
        raise ValueError("power must be non-negative")
    result = np.eye(a.shape[0], dtype=np.complex128)
    base = a.copy()
    # binary powering; the multiplication order is fixed so results are reproducible
    while k:
        if k & 1:
            result = result @ base
        k >>= 1
        if k:
            base = base @ base
    return result


def mat_exp(m, t: float = 1.0) -> np.ndarray:
    """Matrix exponential ``exp(m * t)`` by scaling and squaring.

    The argument is scaled by ``2**-s`` until its 1-norm is at most 1/2, a
    degree-18 Taylor polynomial is evaluated by Horner's rule, and the result
    is squared ``s`` times.
    """
    a = _as_square(m) * t
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = 0
    if norm > _EXPM_THETA:
        s = int(math.ceil(math.log2(norm / _EXPM_THETA)))
    a = a / (2.0**s)
    eye = np.eye(n, dtype=np.complex128)
    result = eye.copy()
    for j in range(_EXPM_DEGREE, 0, -1):
        result = eye + (a @ result) / j
    for _ in range(s):
        result = result @ result
    return result


def cubic_roots(c2: complex, c1: complex, c0: complex) -> np.ndarray:
    """All three roots of ``x**3 + c2*x**2 + c1*x + c0``, in no particular order.

    Roots come from the companion-matrix eigenvalues and are then polished
    with Newton steps, each accepted only if it lowers the residual.
    """
    coeffs = np.array([1.0, c2, c1, c0], dtype=np.complex128)
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("coefficients must be finite")
    companion = np.array(
        [[-c2, -c1, -c0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], dtype=np.complex128
    )
    roots = np.linalg.eigvals(companion).astype(np.complex128)
    dcoeffs = np.array([3.0, 2.0 * c2, c1], dtype=np.complex128)
    for idx in range(3):
        z = roots[idx]
        for _ in range(8):
            p = np.polyval(coeffs, z)
            dp = np.polyval(dcoeffs, z)
            if p == 0 or dp == 0:
                break
            cand = z - p / dp
            if abs(np.polyval(coeffs, cand)) >= abs(p):
                break
            z = cand
        roots[idx] = z
    return roots


def tridiag_toeplitz_eigenvalues(sub: complex, sup: complex, size: int) -> np.ndarray:
    """Eigenvalues of the zero-diagonal tridiagonal Toeplitz matrix.

    Returns ``2 * sqrt(sub * sup) * cos(m * pi / (size + 1))`` for
    ``m = 1 .. size``.  ``sqrt`` is the principal complex square root, so
    ``sub * sup < 0`` gives a purely imaginary, conjugation-symmetric set.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    root = np.sqrt(np.complex128(sub) * np.complex128(sup))
    m = np.arange(1, size + 1)
    vals = 2.0 * root * np.cos(m * np.pi / (size + 1))
    # cos(pi/2) is 6e-17, not 0; snap the middle eigenvalue of odd sizes
    if size % 2 == 1:
        vals[size // 2] = 0.0
    return vals.astype(np.complex128)


@dataclass(frozen=True)
class VectorTrace:
    """Time-indexed sequence of state vectors."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def component(self, index: int) -> np.ndarray:
        return self.states[:, index]


Forcing = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class IvpProblem:
    """Linear constant-coefficient problem ``x' = A x + sigma(t)``, ``x(0) = x0``."""

    system_matrix: np.ndarray
    initial_state: np.ndarray
    t_end: float
    step: float
    method: str = "rk4"
    forcing: Optional[Forcing] = field(default=None, compare=False)

    def __post_init__(self):
        a = _as_square(self.system_matrix)
        x0 = np.asarray(self.initial_state, dtype=np.complex128)
        object.__setattr__(self, "system_matrix", a)
        object.__setattr__(self, "initial_state", x0)
        if x0.ndim != 1 or x0.shape[0] != a.shape[0]:
            raise ValueError("initial state does not match the system matrix")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if self.method not in ("explicit-euler", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def num_steps(self) -> int:
        # tolerate t_end that is a multiple of step up to rounding
        return int(math.floor(self.t_end / self.step + 1e-9))


def rk4_step_matrix(a, h: float) -> np.ndarray:
    """One classical RK4 step for ``x' = a x`` written as a matrix."""
    a = _as_square(a)
    ha = h * a
    eye = np.eye(a.shape[0], dtype=np.complex128)
    ha2 = ha @ ha
    return eye + ha + ha2 / 2 + (ha2 @ ha) / 6 + (ha2 @ ha2) / 24


def integrate_ivp(p: IvpProblem) -> VectorTrace:
    """Integrate an :class:`IvpProblem`, sampling at multiples of ``p.step``.

    ``explicit-euler`` evaluates ``x + h * (A x + sigma(t))`` literally, so with
    ``h = 1`` it reproduces the difference recursion ``x_{i+1} - x_i = A x_i``
    bit for bit.  Without forcing, RK4 is applied through its one-step
    matrix, which is the same method evaluated in a fixed order.
    """
    a = p.system_matrix
    h = p.step
    n = p.num_steps
    times = np.arange(n + 1) * h
    states = np.empty((n + 1, a.shape[0]), dtype=np.complex128)
    x = p.initial_state.copy()
    states[0] = x
    sigma = p.forcing
    # overflow surfaces as the FloatingPointError below, not as warnings
    with np.errstate(over="ignore", invalid="ignore"):
        _advance(p, a, h, n, times, states, x, sigma)
    if not np.all(np.isfinite(states)):
        raise FloatingPointError("integration produced non-finite values")
    return VectorTrace(times=times, states=states)


def _advance(p, a, h, n, times, states, x, sigma) -> None:
    if p.method == "explicit-euler":
        for i in range(n):
            rhs = a @ x
            if sigma is not None:
                rhs = rhs + np.asarray(sigma(times[i]), dtype=np.complex128)
            x = x + h * rhs
            states[i + 1] = x
    elif sigma is None:
        step = rk4_step_matrix(a, h)
        for i in range(n):
            x = step @ x
            states[i + 1] = x
    else:
        def f(t, y):
            return a @ y + np.asarray(sigma(t), dtype=np.complex128)

        for i in range(n):
            t = times[i]
            k1 = f(t, x)
            k2 = f(t + h / 2, x + h / 2 * k1)
            k3 = f(t + h / 2, x + h / 2 * k2)
            k4 = f(t + h, x + h * k3)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            states[i + 1] = x
