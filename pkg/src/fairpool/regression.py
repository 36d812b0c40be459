"""Exact-rational ordinary least squares for cost-vs-size fits."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Pointish = Union[int, str, Fraction]


@dataclass(frozen=True)
class RegressionFit:
    slope: Fraction
    intercept: Fraction
    r_squared: Fraction

    def predict(self, x: Pointish) -> Fraction:
        return self.slope * Fraction(x) + self.intercept


def fit_linear(points: Iterable[tuple[Pointish, Pointish]]) -> RegressionFit:
    """Least-squares line through (x, y) points, all arithmetic exact.

    R-squared is 1 - SSres/SStot, defined as exactly 1 for constant data
    (SStot = 0 implies SSres = 0 for the fitted line).
    """
    xs: list[Fraction] = []
    ys: list[Fraction] = []
    for x, y in points:
        xs.append(Fraction(x))
        ys.append(Fraction(y))
    n = len(xs)
    if len(set(xs)) < 2:
        raise ValueError("need at least two distinct x values")
    sum_x = sum(xs)
    sum_y = sum(ys)
    sum_xy = sum(x * y for x, y in zip(xs, ys))
    sum_xx = sum(x * x for x in xs)
    denom = n * sum_xx - sum_x * sum_x
    slope = (n * sum_xy - sum_x * sum_y) / denom
    intercept = (sum_y - slope * sum_x) / n
    mean_y = sum_y / n
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    if ss_tot == 0:
        r_squared = Fraction(1)
    else:
        r_squared = 1 - ss_res / ss_tot
    return RegressionFit(slope=slope, intercept=intercept, r_squared=r_squared)
