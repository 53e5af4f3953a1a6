"""Reduced model for ``k`` oracles queried in parallel.

The ``k + 1`` tracked amplitudes are indexed by how many registers still sit
off their target: component 0 is the fully solved class ``|e1 ... ek>`` and
component ``k`` is ``|N1 ... Nk>``.  Their approximate dynamics is
``x' = J x`` with the Jacobi matrix ``J`` (2 above the diagonal, ``-2/N``
below).  For ``k > 2`` this reduction is a modelling assumption that the
brute-force simulator cannot reach, so results for ``k > 2`` are model-level.

Scaling component ``j`` by ``N**(j/2)`` turns ``J`` into ``(2/sqrt(N))``
times a real antisymmetric matrix; that similarity keeps the matrix
exponential well scaled and gives the conserved weighted norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundError
from .numerics import mat_exp, rk4_step_matrix, tridiag_toeplitz_eigenvalues
from .parallel_rs import optimal_steps_rs
from .grover import optimal_steps_simple

__all__ = [
    "BudgetComparison",
    "IsSchedule",
    "IsTrace",
    "JacobiModel",
    "amplitude_upper_bound",
    "compare_par_seq",
    "jacobi_eigenvalues",
    "jacobi_matrix",
    "is_reduced_trace",
    "pairwise_is_schedule",
    "solve_jacobi",
    "truncated_upper_bound",
]

RK4_SUBSTEPS = 10


@dataclass(frozen=True)
class JacobiModel:
    k: int
    N: int
    matrix: np.ndarray
    variant: str = "strict"

    @property
    def theta(self) -> float:
        return math.pi / (self.k + 2)

    @property
    def size(self) -> int:
        return self.k + 1


def _check_k(k: int, N: int) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    if N < 4:
        raise ValueError("N must be >= 4")
    if k > math.sqrt(N) / 8:
        raise ValueError(f"k={k} too large for N={N}: need k <= sqrt(N)/8")


def jacobi_matrix(k: int, N: int, variant: str = "strict") -> JacobiModel:
    """Build the ``(k+1) x (k+1)`` Jacobi model.

    ``variant="rs"`` (``k = 2`` only) adds the entry 4 in position (1, 3)
    that the exact repeated-search step carries and the pure tridiagonal
    pattern drops.
    """
    _check_k(k, N)
    m = np.diag(np.full(k, 2.0), 1) + np.diag(np.full(k, -2.0 / N), -1)
    if variant == "rs":
        if k != 2:
            raise ValueError("the rs variant exists only for k = 2")
        m[0, 2] = 4.0
    elif variant != "strict":
        raise ValueError(f"unknown variant {variant!r}")
    return JacobiModel(k=k, N=N, matrix=m.astype(np.complex128), variant=variant)


def _closed_form_spectrum(k: int, N: int) -> np.ndarray:
    theta = math.pi / (k + 2)
    m = np.arange(1, k + 2)
    return -(4j / math.sqrt(N)) * np.cos(m * theta)


def _same_set(x: np.ndarray, y: np.ndarray, tol: float) -> bool:
    key = lambda z: (round(z.imag, 14), round(z.real, 14))  # noqa: E731
    xs = np.array(sorted(x, key=key))
    ys = np.array(sorted(y, key=key))
    return bool(np.all(np.abs(xs - ys) <= tol))


def jacobi_eigenvalues(model: JacobiModel) -> np.ndarray:
    """Full spectrum (``k + 1`` values) of the model matrix.

    For the strict variant the Toeplitz closed form is used and checked
    against ``-(4i/sqrt(N)) cos(m pi/(k+2))``, ``m = 1 .. k+1``, as a set.
    The ``rs`` variant is not Toeplitz and is solved densely.
    """
    if model.variant != "strict":
        return np.linalg.eigvals(model.matrix)
    vals = tridiag_toeplitz_eigenvalues(-2.0 / model.N, 2.0, model.size)
    ref = _closed_form_spectrum(model.k, model.N)
    scale = 4 / math.sqrt(model.N)
    if not _same_set(vals, ref, 1e-12 * scale):
        raise BoundError("Jacobi spectrum disagrees with the closed form")
    return vals


def solve_jacobi(model: JacobiModel, times, x0=None) -> np.ndarray:
    """Exact solution ``exp(J t) x0`` at each time, rows indexed by time.

    ``x0`` defaults to every component equal to ``N**(-k/2)``.  The
    exponential is taken of the rescaled matrix at each time separately:
    at short times the target amplitude is ``N**(-k/2)`` against an O(1)
    state norm, and an eigenvector expansion would lose it to cancellation,
    while the scaled Taylor series keeps small entries to relative accuracy.
    """
    k, N = model.k, model.N
    times = np.asarray(times, dtype=float)
    if x0 is None:
        x0 = np.full(k + 1, N ** (-k / 2), dtype=np.complex128)
    scale = np.sqrt(float(N)) ** np.arange(k + 1)
    kmat = (scale[:, None] * model.matrix) / scale[None, :]
    y0 = scale * np.asarray(x0, dtype=np.complex128)
    y = np.stack([mat_exp(kmat, t) @ y0 for t in times]) if times.size else np.empty((0, k + 1))
    return y / scale[None, :]


@dataclass(frozen=True)
class IsTrace:
    """Reduced ``k``-oracle trace sampled at integer steps."""

    k: int
    N: int
    times: np.ndarray
    exact: np.ndarray
    rk4: np.ndarray

    @property
    def target(self) -> np.ndarray:
        """Fully solved amplitude ``a_k`` from the exact solution."""
        return self.exact[:, 0]

    def weighted_norms(self) -> np.ndarray:
        """``sum_j (N-1)**j |x_j|**2``: class masses, at most 1 for a compressed unitary run."""
        w = float(self.N - 1) ** np.arange(self.k + 1)
        return np.abs(self.exact) ** 2 @ w

    def max_method_gap(self) -> float:
        return float(np.max(np.abs(self.exact - self.rk4)))


def is_reduced_trace(k: int, N: int, steps: int, variant: str = "strict") -> IsTrace:
    """Solve the Cauchy problem by eigendecomposition and by RK4.

    RK4 runs with ``RK4_SUBSTEPS`` substeps per unit step.
    """
    model = jacobi_matrix(k, N, variant)
    times = np.arange(steps + 1, dtype=float)
    exact = solve_jacobi(model, times)
    step = np.linalg.matrix_power(rk4_step_matrix(model.matrix, 1.0 / RK4_SUBSTEPS), RK4_SUBSTEPS)
    x = np.full(k + 1, N ** (-k / 2), dtype=np.complex128)
    rk = np.empty_like(exact)
    rk[0] = x
    for i in range(steps):
        x = step @ x
        rk[i + 1] = x
    return IsTrace(k=k, N=N, times=times, exact=exact, rk4=rk)


def amplitude_upper_bound(k: int, N: int, t: float) -> float:
    """``N**(-k/2) * (1 + 2**k t**k / k!)``, the growth with all ``-2/N`` terms dropped, keeping only the top power."""
    if t < 0:
        raise ValueError("t must be non-negative")
    c = N ** (-k / 2)
    return c + 2**k * c * t**k / math.factorial(k)


def truncated_upper_bound(k: int, N: int, t: float) -> float:
    """Exact solution of the system with every ``-2/N`` removed.

    That system is nilpotent, so the target amplitude is the full Taylor sum
    ``N**(-k/2) * sum_{j <= k} (2t)**j / j!``; it dominates the true
    ``a_k(t)`` term by term.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    return N ** (-k / 2) * sum((2 * t) ** j / math.factorial(j) for j in range(k + 1))


@dataclass(frozen=True)
class BudgetComparison:
    k: int
    N: int
    total_time: float
    P_par: float
    P_seq_bound: float

    @property
    def ratio(self) -> float:
        return self.P_par / self.P_seq_bound

    @property
    def claimed_factor(self) -> float:
        return 4.0**self.k

    @property
    def exceeds_claim(self) -> bool:
        return self.ratio > self.claimed_factor

    @property
    def P_par_leading(self) -> float:
        """``(2**k / k!)**2``: the leading-order value with ``a = 2``."""
        return (2.0**self.k / math.factorial(self.k)) ** 2


def compare_par_seq(k: int, N: int) -> BudgetComparison:
    """Success probability after ``sqrt(N)`` parallel steps against ``k`` short sequential searches.

    ``P_par = |a_k(sqrt(N))|**2`` from the exact Jacobi solution (the target
    class has a single basis state) and ``P_seq_bound = (2/k)**(2k)``.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    model = jacobi_matrix(k, N)
    t = math.sqrt(N)
    ak = solve_jacobi(model, [t])[0, 0]
    return BudgetComparison(
        k=k,
        N=N,
        total_time=t,
        P_par=float(abs(ak) ** 2),
        P_seq_bound=(2.0 / k) ** (2 * k),
    )


@dataclass(frozen=True)
class IsSchedule:
    """Query budget of chaining ``k - 1`` repeated-search runs over pairs ``(f_i, f_{i+1})``."""

    k: int
    N: int
    num_runs: int
    queries_per_run: int
    total_queries: int
    error_bound: float
    sequential_queries: int
    aggregate_estimate: float

    @property
    def speedup(self) -> float:
        return self.sequential_queries / self.total_queries


def pairwise_is_schedule(k: int, N: int) -> IsSchedule:
    """Plan the pairwise schedule.

    Each run resolves one pair of consecutive targets, and consecutive runs
    share one oracle.  ``aggregate_estimate = k pi sqrt(N) / (4 sqrt(2))`` is
    the count obtained when the ``k`` targets are instead split into disjoint
    pairs; it agrees with ``total_queries`` for ``k = 2``.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    per_run = optimal_steps_rs(N)
    runs = k - 1
    return IsSchedule(
        k=k,
        N=N,
        num_runs=runs,
        queries_per_run=per_run,
        total_queries=runs * per_run,
        error_bound=10.0 * runs / math.sqrt(N),
        sequential_queries=k * optimal_steps_simple(N),
        aggregate_estimate=k * math.pi * math.sqrt(N) / (4 * math.sqrt(2)),
    )
