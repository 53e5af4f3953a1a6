"""Numerical checks of the perturbation argument behind the parallel search bound.

The reduced repeated-search ODE ``x' = M x`` with ``M = Z - I`` splits as
``M = At0 + E + H``: ``At0`` carries the leading dynamics of ``(b, a, alpha)``,
``E`` is the leading ``beta`` row and ``H`` collects the ``O(1/N)`` and
``O(1/N**2)`` remainders (plus the ``-2`` coupling of ``beta`` into ``b``).
The functions here measure how far the perturbed solution moves away from
the leading one, in four ways:

* plain successive approximations (Picard iteration) for a generic system;
* the split iteration that alternates ``(b, a, alpha)`` and ``beta`` solves,
  whose successive differences are compared against factorial envelopes;
* entrywise growth of powers of the 3x3 main matrix;
* the scalar ``beta`` correction ``exp(-2t) int_0^t exp(2s) dPhi(s) ds``.

All of it is verification by sampling on grids, not proof.

Integrals on a grid are computed element by element with Chebyshev
(Clenshaw-Curtis) nodes, so a uniform grid with spacing ``0.1 / ||K||`` is
accurate to round-off rather than to the ``O(h**2)`` of the trapezoid rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .errors import BoundError
from .numerics import IvpProblem, VectorTrace, integrate_ivp, mat_exp
from .parallel_rs import rs_matrix

__all__ = [
    "ComplexIterations",
    "DeltaReport",
    "DeviationReport",
    "PowerPatternReport",
    "BetaCorrection",
    "PerturbedSystem",
    "RSSplitting",
    "difference_envelopes",
    "split_difference_report",
    "lemma2_power_structure",
    "lemma3_beta_difference",
    "perturbation_deviation",
    "picard_differences",
    "picard_iterate",
    "rs_complex_iterations",
    "rs_splitting",
]

_ORDER = 8
_GRID_FACTOR = 0.1
_EPS_BASE = 10.0


# --------------------------------------------------------------------------
# element quadrature


def _element_operators(p: int = _ORDER):
    """Nodes on [-1, 1], cumulative-integral and derivative matrices."""
    xi = -np.cos(np.pi * np.arange(p + 1) / p)
    v = cheb.chebvander(xi, p)
    vinv = np.linalg.inv(v)
    q = np.empty((p + 1, p + 1))
    d = np.empty((p + 1, p + 1))
    for col in range(p + 1):
        coef = vinv[:, col]
        q[:, col] = cheb.chebval(xi, cheb.chebint(coef, lbnd=-1))
        d[:, col] = cheb.chebval(xi, cheb.chebder(coef))
    return xi, q, d


_XI, _Q, _D = _element_operators()


def _uniform_step(t_grid) -> tuple[np.ndarray, float]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_grid needs at least two points")
    h = np.diff(t)
    if t[0] != 0 or np.any(h <= 0) or np.ptp(h) > 1e-9 * h[0]:
        raise ValueError("t_grid must be uniform, increasing and start at 0")
    return t, float(h[0])


def _node_times(t: np.ndarray, h: float) -> np.ndarray:
    """Element node times, shape (elements, order + 1)."""
    return t[:-1, None] + h * (_XI[None, :] + 1) / 2


def _cumulative(f: np.ndarray, h: float) -> np.ndarray:
    """Running integral from 0 of node values ``f`` (elements, nodes, dim)."""
    local = np.einsum("ml,eld->emd", _Q, f) * (h / 2)
    starts = np.concatenate([np.zeros((1,) + f.shape[2:], f.dtype), np.cumsum(local[:, -1], axis=0)[:-1]])
    return starts[:, None, :] + local


def _to_grid(nodes: np.ndarray) -> np.ndarray:
    return np.concatenate([nodes[:, 0], nodes[-1:, -1]], axis=0)


# --------------------------------------------------------------------------
# plain successive approximations


@dataclass(frozen=True)
class PerturbedSystem:
    """``x' = (K0 + L) x + sigma(t)``, ``x(0) = x0``, with ``K0`` the solved part."""

    K0: np.ndarray
    L: np.ndarray
    x0: np.ndarray
    sigma: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        k0 = np.asarray(self.K0, dtype=np.complex128)
        l = np.asarray(self.L, dtype=np.complex128)
        x0 = np.asarray(self.x0, dtype=np.complex128)
        if k0.shape != l.shape or k0.ndim != 2 or k0.shape[0] != k0.shape[1]:
            raise ValueError("K0 and L must be square matrices of equal size")
        if x0.shape != (k0.shape[0],):
            raise ValueError("x0 does not match the matrix size")
        object.__setattr__(self, "K0", k0)
        object.__setattr__(self, "L", l)
        object.__setattr__(self, "x0", x0)

    @property
    def K(self) -> np.ndarray:
        return self.K0 + self.L

    def forcing_at(self, times: np.ndarray) -> np.ndarray:
        """``sigma`` on an array of times; ``sigma`` must accept arrays and return shape ``times.shape + (dim,)``."""
        dim = self.x0.shape[0]
        if self.sigma is None:
            return np.zeros(times.shape + (dim,), dtype=np.complex128)
        return np.asarray(self.sigma(times), dtype=np.complex128).reshape(times.shape + (dim,))


def picard_iterate(sys: PerturbedSystem, t_grid, iters: int) -> list[VectorTrace]:
    """Successive approximations ``x_{i+1} = x0 + int_0^t (K x_i + sigma)``.

    The first approximation is the exact solution of ``x' = K0 x``.  Returns
    ``iters + 1`` traces on ``t_grid``.  The grid must be uniform with
    spacing at most ``0.1 / ||K||_2``.  Convergence is only practical when
    ``||K|| * t_max`` is moderate (about 20 or less); beyond that the
    intermediate iterates grow like ``(||K|| t)**i / i!``.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    t, h = _uniform_step(t_grid)
    knorm = np.linalg.norm(sys.K, 2)
    if knorm > 0 and h > _GRID_FACTOR / knorm * (1 + 1e-12):
        raise ValueError(f"grid spacing {h:g} exceeds {_GRID_FACTOR}/||K|| = {_GRID_FACTOR / knorm:g}")

    nodes = _node_times(t, h)
    local = [mat_exp(sys.K0, (x + 1) * h / 2) for x in _XI]
    step = local[-1]
    starts = np.empty((len(t) - 1, sys.x0.size), dtype=np.complex128)
    x = sys.x0.copy()
    for j in range(len(t) - 1):
        starts[j] = x
        x = step @ x
    current = np.stack([starts @ e.T for e in local], axis=1)
    sigma = sys.forcing_at(nodes)
    k = sys.K

    out = [VectorTrace(t, _to_grid(current))]
    for _ in range(iters):
        f = current @ k.T + sigma
        current = sys.x0[None, None, :] + _cumulative(f, h)
        out.append(VectorTrace(t, _to_grid(current)))
    return out


# --------------------------------------------------------------------------
# difference envelopes


def difference_envelopes(i: int, N: int, t: np.ndarray) -> np.ndarray:
    """Bounds on ``|delta_i|`` for components ``(b, a, alpha, beta)``, shape (len(t), 4)."""
    t = np.asarray(t, dtype=float)
    g = 10.0 * t ** (i - 1) / math.factorial(i - 1)
    rows = [g / N ** (i / 2), g / N ** ((i + 1) / 2), g / N ** (i / 2 + 1), g / N ** ((i + 1) / 2)]
    return np.stack(rows, axis=1)


@dataclass(frozen=True)
class DeltaReport:
    """Successive differences ``delta_i = x_i - x_{i-1}`` and envelope checks.

    ``max_abs[i-1, c]`` is the grid maximum of component ``c`` of
    ``delta_i``.  ``ratios`` and ``flags`` are present only when envelopes
    were supplied; ``ratios`` holds the worst ``|delta| / envelope`` over the
    grid (``t = 0`` excluded, where both vanish).
    """

    times: np.ndarray
    deltas: np.ndarray
    max_abs: np.ndarray
    ratios: Optional[np.ndarray] = None

    @property
    def flags(self) -> Optional[np.ndarray]:
        return None if self.ratios is None else self.ratios <= 1.0

    @property
    def all_ok(self) -> bool:
        return bool(self.flags is None or np.all(self.flags))


def _delta_report(times, deltas, N: Optional[int]) -> DeltaReport:
    deltas = np.asarray(deltas)
    max_abs = np.max(np.abs(deltas), axis=1)
    ratios = None
    if N is not None:
        if deltas.shape[2] != 4:
            raise ValueError("envelopes need (b, a, alpha, beta) components")
        ratios = np.empty(max_abs.shape)
        tt = np.asarray(times)[1:]
        for i in range(deltas.shape[0]):
            env = difference_envelopes(i + 1, N, tt)
            ratios[i] = np.max(np.abs(deltas[i, 1:]) / env, axis=0)
    return DeltaReport(times=np.asarray(times), deltas=deltas, max_abs=max_abs, ratios=ratios)


def picard_differences(iterates: Sequence[VectorTrace], N: Optional[int] = None) -> DeltaReport:
    """Differences of consecutive iterates, checked against envelopes when ``N`` is given."""
    if len(iterates) < 2:
        raise ValueError("need at least two iterates")
    times = iterates[0].times
    deltas = np.stack([b.states - a.states for a, b in zip(iterates, iterates[1:])])
    return _delta_report(times, deltas, N)


# --------------------------------------------------------------------------
# repeated-search splitting


@dataclass(frozen=True)
class RSSplitting:
    """Pieces of ``M = Z - I`` in the ``(b, a, alpha, beta)`` ordering."""

    N: int
    At0: np.ndarray
    E: np.ndarray
    H: np.ndarray

    @property
    def M(self) -> np.ndarray:
        return self.At0 + self.E + self.H

    @property
    def A0(self) -> np.ndarray:
        return self.At0[:3, :3]

    @property
    def A(self) -> np.ndarray:
        """Main 3x3 matrix of the ``(b, a, alpha)`` block, including its perturbation."""
        return self.M[:3, :3]

    @property
    def B(self) -> np.ndarray:
        return self.A - self.A0

    @property
    def gamma(self) -> np.ndarray:
        """Coupling of ``beta`` into ``(b, a, alpha)``."""
        return self.M[:3, 3]

    @property
    def d_beta(self) -> np.ndarray:
        """Row giving ``beta'`` from ``(b, a, alpha, beta)``."""
        return self.M[3, :]


def _main_matrix(N: int) -> np.ndarray:
    return np.array([[0, 2, 4], [-2 / N, 0, 2], [0, -2 / N, 0]], dtype=np.complex128)


# exponent l of the O(N**-l) entries of H; the (1, 4) entry is -2 + O(1/N)
_H_ORDERS = np.array([[1, 1, 1, 1], [2, 1, 1, 1], [2, 2, 1, 1], [2, 1, 1, 1]])


def rs_splitting(N: int, h_mode: str = "exact", constant: float = 8.0, seed: int = 0) -> RSSplitting:
    """Split ``Z - I`` into the leading, ``beta``-row and remainder parts.

    ``h_mode="exact"`` takes ``H = (Z - I) - At0 - E`` from the exact step.
    ``h_mode="sampled"`` draws ``H`` with entries of magnitude exactly
    ``constant / N**l`` (``l`` from the order pattern) and random signs from
    ``seed``; the ``-2`` coupling in position (1, 4) is kept.
    """
    at0 = np.zeros((4, 4), dtype=np.complex128)
    at0[:3, :3] = _main_matrix(N)
    e = np.zeros((4, 4), dtype=np.complex128)
    e[3] = [-2 / N, 0, 2, -2]
    if h_mode == "exact":
        h = (rs_matrix(N) - np.eye(4)) - at0 - e
    elif h_mode == "sampled":
        rng = np.random.default_rng(seed)
        signs = rng.choice([-1.0, 1.0], size=(4, 4))
        h = (signs * constant / float(N) ** _H_ORDERS).astype(np.complex128)
        h[0, 3] += -2.0
    else:
        raise ValueError(f"unknown h_mode {h_mode!r}")
    return RSSplitting(N=N, At0=at0, E=e, H=h)


@dataclass(frozen=True)
class ComplexIterations:
    """Split iteration for the repeated-search ODE.

    ``base`` is ``(b, a, alpha, beta)`` of the zeroth approximation (the
    leading ``(b, a, alpha)`` flow and the ``beta`` it drives);
    ``deltas[i-1]`` is the difference between approximations ``i`` and
    ``i - 1``.
    """

    times: np.ndarray
    base: np.ndarray
    deltas: np.ndarray

    def iterates(self) -> list[VectorTrace]:
        states = [self.base]
        for d in self.deltas:
            states.append(states[-1] + d)
        return [VectorTrace(self.times, s) for s in states]

    def total_deviation(self) -> float:
        """Max-norm over the grid of ``sum_i delta_i`` (limit minus zeroth approximation)."""
        return float(np.max(np.abs(self.deltas.sum(axis=0))))


def rs_complex_iterations(split: RSSplitting, t_grid, iters: int) -> ComplexIterations:
    """Run the split iteration and return its differences on a uniform grid.

    Approximation ``i + 1`` solves ``c' = A c + beta_i gamma`` for
    ``c = (b, a, alpha)`` and then ``beta' = d_beta . (c, beta)``, both from
    the initial value ``1/N``.  Approximation 0 uses ``A0`` and no ``beta``
    forcing.  Each difference obeys its own linear ODE with zero initial
    value, so the whole hierarchy is one block-triangular linear system,
    advanced exactly with its matrix exponential; differences never come
    from subtracting nearly equal iterates.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    t, h = _uniform_step(t_grid)
    N = split.N
    a, a0, b = split.A, split.A0, split.B
    gamma, d = split.gamma, split.d_beta
    levels = iters + 1
    g = np.zeros((4 * levels, 4 * levels), dtype=np.complex128)
    g[0:3, 0:3] = a0
    g[3, 0:3] = d[:3]
    g[3, 3] = d[3]
    for i in range(1, levels):
        s = 4 * i
        g[s : s + 3, s : s + 3] = a
        g[s + 3, s : s + 3] = d[:3]
        g[s + 3, s + 3] = d[3]
        if i == 1:
            g[s : s + 3, 0:3] = b
            g[s : s + 3, 3] = gamma
        else:
            g[s : s + 3, s - 1] = gamma
    prop = mat_exp(g, h)
    x = np.zeros(4 * levels, dtype=np.complex128)
    x[0:4] = 1.0 / N
    out = np.empty((len(t), 4 * levels), dtype=np.complex128)
    out[0] = x
    for j in range(1, len(t)):
        x = prop @ x
        out[j] = x
    out = out.reshape(len(t), levels, 4)
    return ComplexIterations(times=t, base=out[:, 0], deltas=np.moveaxis(out[:, 1:], 1, 0))


def _rs_horizon(N: int) -> float:
    return math.pi * math.sqrt(N) / (2 * math.sqrt(2))


def split_difference_report(N: int, iters: int = 6, points: int = 2000, split: Optional[RSSplitting] = None) -> DeltaReport:
    """Split-iteration differences on ``[0, pi sqrt(N) / (2 sqrt(2))]`` against the factorial envelopes."""
    split = split if split is not None else rs_splitting(N)
    t = np.linspace(0.0, _rs_horizon(N), points + 1)
    res = rs_complex_iterations(split, t, iters)
    return _delta_report(res.times, res.deltas, N)


# --------------------------------------------------------------------------
# powers of the main matrix


@dataclass(frozen=True)
class PowerPatternReport:
    """Entrywise growth of ``A**m`` against the ``(10/N)**j`` pattern.

    ``tightest_prefactor`` is the smallest ``C`` with
    ``|A**m|_{rc} <= C * (10/N)**j(m, r, c)`` for every checked power;
    ``literal_holds`` is the statement with ``C = 1``.
    """

    N: int
    j_max: int
    perturbation: str
    constant: float
    tightest_prefactor: float
    first_violation: Optional[tuple]

    @property
    def holds(self) -> bool:
        return self.tightest_prefactor <= self.constant

    @property
    def literal_holds(self) -> bool:
        return self.tightest_prefactor <= 1.0


_EVEN_OFFSETS = np.array([[0, 0, -1], [1, 0, 0], [1, 1, 0]])
_ODD_OFFSETS = np.array([[1, 0, 0], [1, 1, 0], [1, 1, 1]])
# magnitude order l of the O(N**-l) entries of B
_B_ORDERS = np.array([[1, 1, 1], [2, 1, 1], [2, 2, 1]])


def power_pattern_exponents(m: int) -> np.ndarray:
    """Exponent ``j`` of each entry's bound ``(10/N)**j`` for the power ``A**m``."""
    j = m // 2
    return j + (_EVEN_OFFSETS if m % 2 == 0 else _ODD_OFFSETS)


def _power_matrix(N: int, perturbation: str, b_constant: float, seed: int) -> np.ndarray:
    a0 = _main_matrix(N)
    if perturbation == "none":
        return a0
    if perturbation == "exact":
        return rs_splitting(N).A
    mags = b_constant / float(N) ** _B_ORDERS
    if perturbation == "majorant":
        # |(A^m)_rc| <= ((|A0| + |B|)^m)_rc for every B with these magnitudes
        return np.abs(a0) + mags
    if perturbation == "sampled":
        rng = np.random.default_rng(seed)
        return a0 + rng.choice([-1.0, 1.0], size=(3, 3)) * mags
    raise ValueError(f"unknown perturbation {perturbation!r}")


def lemma2_power_structure(
    N: int,
    j_max: int,
    perturbation: str = "none",
    constant: float = 10.0,
    b_constant: float = 8.0,
    seed: int = 0,
) -> PowerPatternReport:
    """Check powers ``A**m``, ``m = 0 .. 2 j_max + 1``, against the ``epsilon_j`` pattern.

    ``perturbation`` selects ``A``: ``"none"`` (``A0``), ``"exact"`` (from
    the exact step), ``"majorant"`` (entrywise ``|A0| + |B|`` with
    ``|B|`` at ``b_constant`` times the magnitude pattern; it bounds every
    sign choice at once) or ``"sampled"`` (random signs from ``seed``).
    Violations are reported, not raised.
    """
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    a = np.asarray(_power_matrix(N, perturbation, b_constant, seed), dtype=np.complex128)
    tightest = 0.0
    first = None
    power = np.eye(3, dtype=np.complex128)
    for m in range(2 * j_max + 2):
        if m:
            power = power @ a
        allowed = (_EPS_BASE / N) ** power_pattern_exponents(m).astype(float)
        ratio = np.abs(power) / allowed
        tightest = max(tightest, float(ratio.max()))
        if first is None and ratio.max() > constant:
            r, c = np.unravel_index(np.argmax(ratio), ratio.shape)
            first = (m, int(r) + 1, int(c) + 1, float(abs(power[r, c])), float(constant * allowed[r, c]))
    return PowerPatternReport(
        N=N,
        j_max=j_max,
        perturbation=perturbation,
        constant=constant,
        tightest_prefactor=tightest,
        first_violation=first,
    )


# --------------------------------------------------------------------------
# beta correction


@dataclass(frozen=True)
class BetaCorrection:
    times: np.ndarray
    values: np.ndarray
    residual: float


def lemma3_beta_difference(
    delta_phi: Callable[[np.ndarray], np.ndarray],
    t_grid,
    rate: float = 2.0,
    tol: float = 1e-8,
) -> BetaCorrection:
    """Evaluate ``exp(-rate t) int_0^t exp(rate s) dphi(s) ds`` on a uniform grid.

    The integral is propagated element by element, so no ``exp(rate t)``
    factor ever overflows.  The result is then differentiated spectrally
    and must satisfy ``d' + rate d = dphi`` to ``tol`` (scaled by the size
    of ``dphi``), otherwise :class:`BoundError` is raised.  ``delta_phi``
    must accept an array of times.
    """
    t, h = _uniform_step(t_grid)
    if rate > 0 and h * rate > _GRID_FACTOR * (1 + 1e-12):
        raise ValueError(f"grid spacing {h:g} exceeds {_GRID_FACTOR}/rate")
    nodes = _node_times(t, h)
    local_t = nodes - nodes[:, :1]
    phi = np.asarray(delta_phi(nodes), dtype=np.complex128).reshape(nodes.shape)
    inner = (np.exp(rate * local_t) * phi) @ _Q.T * (h / 2)
    decay = np.exp(-rate * local_t)
    vals = np.empty(nodes.shape, dtype=np.complex128)
    start = 0.0 + 0.0j
    for e in range(nodes.shape[0]):
        vals[e] = decay[e] * (start + inner[e])
        start = vals[e, -1]
    deriv = vals @ _D.T * (2 / h)
    scale = max(1.0, float(np.max(np.abs(phi))))
    residual = float(np.max(np.abs(deriv + rate * vals - phi))) / scale
    if residual > tol:
        raise BoundError(f"beta correction fails its ODE: residual {residual:.2e} > {tol:g}")
    return BetaCorrection(times=t, values=_to_grid(vals[:, :, None])[:, 0], residual=residual)


# --------------------------------------------------------------------------
# end-to-end deviation


@dataclass(frozen=True)
class DeviationReport:
    N: int
    deviation: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.deviation <= self.bound

    @property
    def scaled(self) -> float:
        return self.deviation * math.sqrt(self.N)


def perturbation_deviation(
    N: int,
    split: Optional[RSSplitting] = None,
    step: float = 0.05,
    constant: float = 20.0,
) -> DeviationReport:
    """Max ``|b|`` gap between ``x' = At0 x`` and ``x' = (At0 + E + H) x`` by RK4.

    Both start from ``(1/N, 1/N, 1/N, 1/N)`` and run to
    ``pi sqrt(N) / (2 sqrt(2))``.  The report flags whether the gap is within
    ``constant / sqrt(N)``.
    """
    if N < 2**10:
        raise ValueError("N must be >= 2**10")
    split = split if split is not None else rs_splitting(N)
    t1 = _rs_horizon(N)
    x0 = np.full(4, 1.0 / N, dtype=np.complex128)
    n_steps = int(math.ceil(t1 / step))
    h = t1 / n_steps
    lead = integrate_ivp(IvpProblem(split.At0, x0, t_end=t1, step=h, method="rk4"))
    full = integrate_ivp(IvpProblem(split.M, x0, t_end=t1, step=h, method="rk4"))
    dev = float(np.max(np.abs(lead.component(0) - full.component(0))))
    return DeviationReport(N=N, deviation=dev, bound=constant / math.sqrt(N))
