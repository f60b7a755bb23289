"""Interpolation schedules H(s) = f(s) H0 + g(s) HP on s in [0, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

KINDS = ("linear", "square", "roundtrip")


def _linear(s):
    return 1.0 - s, s


def _square(s):
    return 1.0 - s * s, s * (2.0 - s)


def _roundtrip(s):
    return 4.0 * (s - 0.5) ** 2, -4.0 * s * (s - 1.0)


_COEFFICIENTS = {"linear": _linear, "square": _square, "roundtrip": _roundtrip}


def _check_s(s):
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")


@dataclass(frozen=True)
class Schedule:
    kind: str
    reversed: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule {self.kind!r}; choose from {KINDS}")

    @property
    def name(self):
        return f"{self.kind}-reversed" if self.reversed else self.kind

    def reverse(self):
        """The same path traversed backwards, s -> 1 - s."""
        return Schedule(self.kind, not self.reversed)

    def coefficients(self, s):
        _check_s(s)
        return _COEFFICIENTS[self.kind](1.0 - s if self.reversed else s)

    def lambda_of_s(self, s):
        """Effective transverse field f/g; ``math.inf`` where g vanishes."""
        f, g = self.coefficients(s)
        if g == 0.0:
            return math.inf
        return f / g

    def critical_points(self, grid=2001):
        """All s where f(s) = g(s), i.e. the effective field crosses 1."""
        def diff(s):
            f, g = self.coefficients(s)
            return f - g

        s = np.linspace(0.0, 1.0, grid)
        d = np.array([diff(x) for x in s])
        roots = [float(x) for x, y in zip(s, d) if y == 0.0]
        for i in np.nonzero(d[:-1] * d[1:] < 0)[0]:
            roots.append(brentq(diff, s[i], s[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
        return tuple(sorted(roots))


def coefficients(schedule, s):
    return schedule.coefficients(s)


def lambda_of_s(schedule, s):
    return schedule.lambda_of_s(s)

