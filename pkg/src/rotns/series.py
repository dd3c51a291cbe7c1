"""Time series of norm samples shared by the solver and the decay drivers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class NormSeries:
    """Samples of ||u(t)|| in the homogeneous W^{m,p} norm."""

    m: float
    p: float
    omega: float
    times: np.ndarray
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have the same shape")

    def window(self, t_lo: float, t_hi: float) -> "NormSeries":
        sel = (self.times >= t_lo * (1 - 1e-12)) & (self.times <= t_hi * (1 + 1e-12))
        return NormSeries(self.m, self.p, self.omega, self.times[sel], self.values[sel],
                          self.label, dict(self.meta))


def format_exponent(p: float) -> str:
    return "inf" if np.isinf(p) else f"{p:g}"


def parse_exponent(text: str) -> float:
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return float("inf")
    return float(t)
