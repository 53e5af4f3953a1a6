"""Two-amplitude model of simple quantum search.

After ``i`` Grover iterations from the uniform superposition the state is
``a_i * sum_{e' != e} |e'> + b_i |e>``, so the whole run is captured by the
pair ``(b, a)``.  This module holds the exact recurrence, its linear ODE
approximation with step ``delta``, and the closed-form ODE solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .traces import Trace

__all__ = [
    "GroverOdeParams",
    "GroverReducedState",
    "grover_difference_matrix",
    "grover_ode_closed_form",
    "grover_ode_deviation",
    "grover_ode_peak_time",
    "grover_step",
    "grover_trace",
    "optimal_steps_simple",
    "success_probability",
]


def _check_size(N: int) -> None:
    if N < 2 or N & (N - 1):
        raise ValueError(f"N must be a power of two >= 2, got {N}")


@dataclass(frozen=True)
class GroverReducedState:
    b: complex
    a: complex
    N: int

    @classmethod
    def initial(cls, N: int) -> "GroverReducedState":
        amp = complex(1.0 / math.sqrt(N))
        return cls(b=amp, a=amp, N=N)

    def norm(self) -> float:
        """``|b|^2 + (N-1)|a|^2``; equals 1 for a physical state."""
        return abs(self.b) ** 2 + (self.N - 1) * abs(self.a) ** 2

    def as_vector(self) -> np.ndarray:
        return np.array([self.b, self.a], dtype=np.complex128)


def grover_step(s: GroverReducedState) -> GroverReducedState:
    """Phase flip of the target followed by inversion about the average."""
    N = s.N
    b = (1 - 2 / N) * s.b + 2 * (1 - 1 / N) * s.a
    a = -(2 / N) * s.b + (1 - 2 / N) * s.a
    return GroverReducedState(b=b, a=a, N=N)


def grover_trace(N: int, steps: int) -> Trace:
    """Iterate :func:`grover_step` from the uniform state; row 0 is the start."""
    _check_size(N)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    s = GroverReducedState.initial(N)
    rows = [s.as_vector()]
    for _ in range(steps):
        s = grover_step(s)
        rows.append(s.as_vector())
    return Trace(N=N, labels=("b", "a"), values=np.array(rows))


def optimal_steps_simple(N: int) -> int:
    """``floor(pi * sqrt(N) / 4)`` Grover iterations."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return int(math.floor(math.pi * math.sqrt(N) / 4))


def success_probability(t: Trace, step: int) -> float:
    if not 0 <= step < len(t):
        raise IndexError(f"step {step} outside trace of length {len(t)}")
    return float(abs(t.b[step]) ** 2)


def grover_difference_matrix(N: int, delta: float = 1.0) -> np.ndarray:
    """Matrix of ``(b, a)' = M (b, a)`` obtained by dividing the step difference by ``delta``.

    With ``delta = 1`` an explicit Euler step of this system is exactly one
    Grover iteration.
    """
    m = np.array(
        [[-2 / N, 2 * (1 - 1 / N)], [-2 / N, -2 / N]],
        dtype=np.complex128,
    )
    return m / delta


@dataclass(frozen=True)
class GroverOdeParams:
    N: int
    delta: float = 1.0

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.N < 2:
            raise ValueError("N must be >= 2")

    @property
    def omega(self) -> float:
        return 2.0 / (self.delta * math.sqrt(self.N))


def grover_ode_closed_form(p: GroverOdeParams, t: float) -> float:
    """``sin(omega t) + cos(omega t) / sqrt(N)``, valid on one oscillation."""
    if not 0 <= t <= 2 * math.pi / p.omega:
        raise ValueError("t outside [0, 2*pi/omega]")
    w = p.omega
    return math.sin(w * t) + math.cos(w * t) / math.sqrt(p.N)


def grover_ode_peak_time(p: GroverOdeParams) -> tuple[float, float]:
    """Return ``(t_exact, t0)`` for the maximum of the closed form.

    ``t_exact = arctan(sqrt(N)) / omega`` is the true maximiser and
    ``t0 = pi sqrt(N) delta / 4 - delta / 2`` its expansion; they differ by
    about ``delta / (6 N)``.  The derivative is checked to change sign from
    positive to negative across ``t_exact``.
    """
    w = p.omega
    t_exact = math.atan(math.sqrt(p.N)) / w
    t0 = math.pi * math.sqrt(p.N) * p.delta / 4 - p.delta / 2

    def deriv(t):
        return w * (math.cos(w * t) - math.sin(w * t) / math.sqrt(p.N))

    h = 1e-6 * p.delta
    if not (deriv(t_exact - h) > 0 > deriv(t_exact + h)):
        raise ArithmeticError("closed-form derivative does not change sign at the peak")
    return t_exact, t0


def grover_ode_deviation(N: int, delta: float = 1.0) -> float:
    """Max over integer ``i <= [t0 / delta]`` of ``|b_i - b(i delta)|``."""
    p = GroverOdeParams(N=N, delta=delta)
    _, t0 = grover_ode_peak_time(p)
    last = int(math.floor(t0 / delta))
    tr = grover_trace(N, last)
    closed = np.array([grover_ode_closed_form(p, i * delta) for i in range(last + 1)])
    return float(np.max(np.abs(tr.b.real - closed)))
