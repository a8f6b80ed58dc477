"""Bookkeeping for the towers K(zeta_{p^r}, b^(1/p^s)): degrees, the
index-p descent step, Galois generator actions, and sampled verification
of the metric inequality |sigma(x) - x|_w <= p^(-1/p^3)."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import AmbiguousValuationError, DomainError, ValidationError
from .numkernel import is_prime
from .padics import TowerElement, lambda_exponent, tower_abs, vp


@dataclass(frozen=True)
class TowerLevel:
    """Level (r, s) of the tower over the base rational a, with b the
    p-adic p^lam-th root of a: v_b = vp(a)/p^lam."""

    p: int
    r: int
    s: int
    a: Fraction
    lam: int
    v_b: int

    @staticmethod
    def make(p: int, r: int, s: int, a, lam: int | None = None, v_b: int | None = None) -> "TowerLevel":
        a = Fraction(a)
        if p == 2 or not is_prime(p):
            raise ValidationError("tower prime must be odd")
        if not (r >= s >= 0):
            raise ValidationError("levels need r >= s >= 0")
        if a in (0, 1, -1):
            raise ValidationError("base must avoid {0, 1, -1}")
        if lam is None:
            lam, _ = lambda_exponent(a, p)
        if v_b is None:
            va = vp(a, p)
            if va % p**lam != 0:
                raise ValidationError("vp(a) is not divisible by p^lam")
            v_b = va // p**lam
        return TowerLevel(p, r, s, a, lam, v_b)

    @property
    def b_valuation_divisible(self) -> bool:
        return self.v_b % self.p == 0

    def element(self, terms) -> TowerElement:
        return TowerElement.make(
            self.p, self.r, self.s, self.v_b, terms, self.lam, self.a
        )

    def monomial(self, u: int = 0, j: int = 0, coeff=1) -> TowerElement:
        return self.element({(u, j): Fraction(coeff)})


def tower_degree(lvl: TowerLevel) -> int:
    """[K_{r,s} : K] = (p-1) p^(r+s-1), totally ramified above p."""
    if lvl.r == 0 and lvl.s == 0:
        raise DomainError("degree formula needs (r, s) != (0, 0)")
    if lvl.r < 1:
        raise DomainError("degree formula needs r >= 1")
    return (lvl.p - 1) * lvl.p ** (lvl.r + lvl.s - 1)


_EXCLUDED = {(0, 0), (1, 0)}


def _require_admissible(lvl: TowerLevel):
    if (lvl.r, lvl.s) in _EXCLUDED:
        raise DomainError(f"level ({lvl.r}, {lvl.s}) has no distinguished subgroup")


def subfield_rule(lvl: TowerLevel) -> tuple[int, int]:
    """Level (r', s') of the fixed field of the distinguished order-p
    subgroup: drops r when (r > s and p | v_b) or (r > s+1 and p !| v_b),
    drops s otherwise."""
    _require_admissible(lvl)
    p_div = lvl.b_valuation_divisible
    r, s = lvl.r, lvl.s
    if (p_div and r > s) or (not p_div and r > s + 1):
        return (r - 1, s)
    return (r, s - 1)


@dataclass(frozen=True)
class SigmaAction:
    """Generator of the distinguished order-p subgroup:
    zeta_{p^r} -> zeta_{p^r}^zeta_exp, b^(1/p^s) -> zeta_{p^s}^radical_pow * b^(1/p^s)."""

    kind: str  # "cyclotomic" | "kummer"
    zeta_exp: int
    radical_pow: int


def sigma_action(lvl: TowerLevel) -> SigmaAction:
    _require_admissible(lvl)
    r, s, p = lvl.r, lvl.s, lvl.p
    if subfield_rule(lvl) == (r - 1, s):
        return SigmaAction("cyclotomic", 1 + p ** (r - 1), 0)
    if s < 1:
        raise AssertionError("kummer generator requires s >= 1")
    return SigmaAction("kummer", 1, p ** (s - 1))


def apply_sigma(lvl: TowerLevel, x: TowerElement, act: SigmaAction | None = None) -> TowerElement:
    """sigma(x) for x in the monomial fragment."""
    act = act or sigma_action(lvl)
    p, r, s = lvl.p, lvl.r, lvl.s
    pr = p**r if r > 0 else 1
    out: dict[tuple[int, int], Fraction] = {}
    for (u, j), c in x.terms:
        if act.kind == "cyclotomic":
            u2 = u * act.zeta_exp % pr
        else:
            # zeta_{p^s}^(radical_pow * j) = zeta_{p^r}^(p^(r-s) * radical_pow * j)
            u2 = (u + p ** (r - s) * act.radical_pow * j) % pr
        out[(u2, j)] = out.get((u2, j), Fraction(0)) + c
    return lvl.element(out)


def metric_gap_check(lvl: TowerLevel, x: TowerElement):
    """Exact gap exponent e with |sigma(x) - x|_w = p^(-e), and whether
    e >= 1/p^3.  Requires |x|_w <= 1."""
    ex = tower_abs(x)
    if ex is not math.inf and ex < 0:
        raise DomainError(f"|x|_w = p^{-ex} > 1 is outside the inequality's scope")
    sx = apply_sigma(lvl, x)
    diff_terms: dict[tuple[int, int], Fraction] = dict(sx.terms)
    for key, c in x.terms:
        diff_terms[key] = diff_terms.get(key, Fraction(0)) - c
    diff = lvl.element(diff_terms)
    gap = tower_abs(diff)
    bound_ok = gap is math.inf or gap >= Fraction(1, lvl.p**3)
    return gap, bound_ok


def amoroso_condition(a: int, p: int) -> bool:
    """p does not divide a, and p^2 does not divide a^(p-1) - 1."""
    if not isinstance(a, int) or a == 0:
        raise ValidationError("condition is stated for nonzero integers")
    if p == 2 or not is_prime(p):
        raise ValidationError("p must be an odd prime")
    if a % p == 0:
        return False
    return (pow(a, p - 1, p * p) - 1) % (p * p) != 0


@dataclass(frozen=True)
class GapSampleSummary:
    level: tuple[int, int]
    samples: int
    ok: int
    ambiguous: int
    fixed: int  # sigma(x) = x exactly
    min_gap: Fraction | None


def sample_metric_gaps(lvl: TowerLevel, count: int, rng: random.Random) -> GapSampleSummary:
    """Seeded monomial samples x with |x|_w <= 1 through metric_gap_check."""
    ok = ambiguous = fixed = 0
    min_gap: Fraction | None = None
    p, r, s = lvl.p, lvl.r, lvl.s
    for _ in range(count):
        u = rng.randrange(p**r) if r > 0 else 0
        j = rng.randrange(p**s) if s > 0 else 0
        unit = rng.choice([1, 2, 5, 7, -1, -3])
        k = rng.randrange(0, 3)
        coeff = Fraction(unit) * Fraction(p) ** k
        e0 = k + Fraction(j * lvl.v_b, p**s)
        if e0 < 0:
            coeff *= Fraction(p) ** math.ceil(-e0)
        x = lvl.monomial(u=u, j=j, coeff=coeff)
        try:
            gap, bound_ok = metric_gap_check(lvl, x)
        except AmbiguousValuationError:
            ambiguous += 1
            continue
        if gap is math.inf:
            fixed += 1
            ok += 1
            continue
        if bound_ok:
            ok += 1
        if min_gap is None or gap < min_gap:
            min_gap = gap
    return GapSampleSummary((r, s), count, ok, ambiguous, fixed, min_gap)
