"""Scalar escape-time iteration of a single map."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expr import EntireMap

DEFAULT_STEPS = 100
DEFAULT_RADIUS = 1e10


@dataclass(frozen=True)
class OrbitVerdict:
    outcome: str              # "Escaped" | "Bounded" | "Indeterminate"
    steps_used: int
    modulus: float = math.nan  # last modulus, for Escaped
    point: complex = complex(math.nan, math.nan)  # final point, for Bounded
    overflow: bool = False    # Escaped through a non-finite value

    @property
    def escaped(self) -> bool:
        return self.outcome == "Escaped"


def iterate(m: EntireMap, z0: complex, max_steps: int = DEFAULT_STEPS,
            radius: float = DEFAULT_RADIUS) -> OrbitVerdict:
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if not radius > 1:
        raise ValueError("escape radius must exceed 1")
    z = np.complex128(z0)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        return OrbitVerdict("Indeterminate", 0)
    for step in range(1, max_steps + 1):
        z = m(z)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            return OrbitVerdict("Escaped", step, math.inf, overflow=True)
        r = abs(z)
        if r > radius:
            return OrbitVerdict("Escaped", step, float(r))
    return OrbitVerdict("Bounded", max_steps, float(abs(z)), complex(z))
