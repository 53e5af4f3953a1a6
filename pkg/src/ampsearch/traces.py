"""Step-indexed amplitude traces produced by the reduced models and the simulator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Trace"]


@dataclass(frozen=True)
class Trace:
    """Per-step amplitudes of a reduced model.

    ``values[i, j]`` is the amplitude named ``labels[j]`` after ``i`` steps;
    row 0 is the initial state.  The first label is always the target
    amplitude ``b``.
    """

    N: int
    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim != 2 or vals.shape[1] != len(self.labels):
            raise ValueError("values must have one column per label")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]

    @property
    def steps(self) -> int:
        return len(self) - 1

    @property
    def b(self) -> np.ndarray:
        return self.values[:, 0]

    def probabilities(self) -> np.ndarray:
        """``|b|**2`` at every step."""
        return np.abs(self.b) ** 2

    def peak_step(self) -> int:
        """First step at which ``|b|**2`` is maximal."""
        return int(np.argmax(self.probabilities()))
