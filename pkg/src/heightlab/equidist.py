"""Desk-scale equidistribution statistics: Galois averages of the Gauss-point
test function along a^(1/p^n), truncated local heights over odd torsion
packets, and averages of the second Bernoulli polynomial over circle grids."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .elliptic import EllipticCurve, division_polynomial
from .ntheight import DEPTH_SERIES, arch_local_series_from_x
from .numkernel import is_prime, poly_roots
from .padics import vp


@dataclass(frozen=True)
class OrbitStatistic:
    family: str
    index: int
    sample_count: int
    value: float
    theoretical_limit: float
    exact_exponent: Fraction | None = None


def gauss_statistic(a, p: int, n: int) -> OrbitStatistic:
    """Average of min{|.|_w, 1/|.|_w} over the conjugates of a^(1/p^n) at the
    unique place above p: all conjugates share the valuation |a|_p^(1/p^n),
    so the average is min{|a|_p, |a|_p^-1}^(1/p^n), tending to 1."""
    a = Fraction(a)
    if a == 0:
        raise ValidationError("base must be nonzero")
    if p == 2 or not is_prime(p):
        raise ValidationError("p must be an odd prime")
    if n < 0:
        raise ValidationError("level must be nonnegative")
    v = vp(a, p)
    e = Fraction(abs(v), p**n)
    return OrbitStatistic(
        family=f"gauss(a={a}, p={p})",
        index=n,
        sample_count=p**n,
        value=float(p) ** (-float(e)),
        theoretical_limit=1.0,
        exact_exponent=-e,
    )


def bernoulli_b2(x):
    return x * x - x + Fraction(1, 6)


def bernoulli_uniformity(l_values):
    """Average of b2(x) = x^2 - x + 1/6 over inputs in [0, 1); exact when the
    inputs are rational.  The uniform N-grid average is 1/(6 N^2) -> 0."""
    if not l_values:
        raise ValidationError("need at least one value")
    exact = all(isinstance(x, (int, Fraction)) for x in l_values)
    total = Fraction(0) if exact else 0.0
    for x in l_values:
        xv = Fraction(x) if exact else float(x)
        if not 0 <= xv < 1:
            raise ValidationError(f"value {x} outside [0, 1)")
        total += bernoulli_b2(xv)
    return total / len(l_values)


def suz_torsion_average(
    E: EllipticCurve, N: int, cap: float = 4.0, depth: int = DEPTH_SERIES
) -> OrbitStatistic:
    """Average of min(cap, lambda_inf) over the nontrivial N-torsion points
    (N odd, 3 <= N <= 13); the equidistribution limit of the average is 0."""
    if N % 2 == 0 or not 3 <= N <= 13:
        raise ValidationError("N must be odd with 3 <= N <= 13")
    psi = division_polynomial(E, N)
    boxes = poly_roots(psi)
    total = 0.0
    for b in boxes:
        lam = arch_local_series_from_x(E, b.center, depth)
        total += min(cap, lam)
    return OrbitStatistic(
        family=f"suz({E}, cap={cap})",
        index=N,
        sample_count=N * N - 1,
        value=total / len(boxes),
        theoretical_limit=0.0,
    )
