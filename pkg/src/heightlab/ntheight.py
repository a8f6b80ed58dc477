"""Neron-Tate heights over Q, two independent ways.

Local heights at every place come from the duplication relation
lambda([2]Q) = 4 lambda(Q) - log|2y(Q)| + (1/4) log|Delta|, unrolled to

  lambda(P) ~ 4^-n (1/2) log max(1, |x(P_n)|)
              + sum_{k<n} 4^-(k+1) (log|2y(P_k)| - (1/4) log|Delta|),

with P_k = [2^k]P.  Finite-place values are exact rational multiples of
log p (the x-orbit is tracked p-adically); the archimedean orbit runs in
floating point through the x-only duplication map.

The independent cross-check is the limit ĥ(P) = lim 4^-n (1/2) h(x(P_n)),
evaluated without exact big integers: the unreduced numerator/denominator
pair is followed in log-scale floats, while the gcd the pair accumulates
(supported on the duplication resultant's primes) is removed exactly via
modular arithmetic at those primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .errors import DomainError, PrecisionError, TorsionOrbitError, ValidationError
from .elliptic import (
    EcPoint,
    EllipticCurve,
    ec_add,
    ec_mul,
    integral_model,
    is_torsion,
    reduction_type,
)
from .gmheights import AlgebraicNumber, Height, SatVerdict, sat_membership, weil_height
from .numkernel import IntPolynomial, factorint, resultant
from .padics import PadicNumber, vp

DEPTH_SERIES = 12
DEPTH_LIMIT = 14


# ---------------------------------------------------------------------------
# breakdown containers


@dataclass(frozen=True)
class LocalEntry:
    value: float
    method: str  # series | closed_form | limit
    error: float
    exact_coeff: Fraction | None = None  # finite places: value = coeff * log p


@dataclass
class HeightBreakdown:
    curve: EllipticCurve
    point: EcPoint
    entries: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return sum(e.value for e in self.entries.values())

    @property
    def total_error(self) -> float:
        return sum(e.error for e in self.entries.values())


@dataclass(frozen=True)
class NtHeight:
    value: float
    mode: str
    error: float
    torsion_order: int | None = None
    breakdown: HeightBreakdown | None = None


# ---------------------------------------------------------------------------
# orbit engines


def _series_constant(E: EllipticCurve, p=None) -> float:
    """Coarse bound for |lambda_v(Q) - (1/2) log max(1, |x(Q)|_v)|."""
    if p is None:
        a, b, d = abs(float(E.A)), abs(float(E.B)), abs(float(E.discriminant))
        return max(math.log(a + 1), math.log(b + 1)) + abs(math.log(max(d, 1e-9))) / 4 + 4.0
    d = abs(vp(E.discriminant, p))
    return (d / 4 + 2) * math.log(p)


def arch_local_series_from_x(E: EllipticCurve, x0, depth: int, dps: int = 50) -> float:
    """Archimedean local height from the x-coordinate only (x may be complex)."""
    with mp.workdps(dps):
        A = mp.mpf(E.A.numerator) / E.A.denominator
        B = mp.mpf(E.B.numerator) / E.B.denominator
        logdisc = mp.log(abs(mp.mpf(E.discriminant.numerator)) / E.discriminant.denominator)
        x = mp.mpc(x0)
        acc = mp.mpf(0)
        for k in range(depth):
            rhs = x**3 + A * x + B
            if rhs == 0:
                raise TorsionOrbitError("doubling orbit met a two-torsion point; see is_torsion")
            acc += mp.mpf(4) ** (-(k + 1)) * (mp.log(abs(4 * rhs)) / 2 - logdisc / 4)
            x = (x**4 - 2 * A * x**2 - 8 * B * x + A**2) / (4 * rhs)
        acc += mp.mpf(4) ** (-depth) * mp.log(max(1, abs(x))) / 2
        return float(acc)


def padic_local_series_coeff(E: EllipticCurve, P: EcPoint, p: int, depth: int) -> Fraction:
    """Exact rational c with lambda_p(P) = c * log p at the series depth."""
    vdisc = vp(E.discriminant, p)
    for prec in (240, 600, 1500):
        try:
            A = PadicNumber.from_fraction(E.A, p, prec)
            B = PadicNumber.from_fraction(E.B, p, prec)
            two = PadicNumber.from_fraction(2, p, prec)
            four = PadicNumber.from_fraction(4, p, prec)
            x = PadicNumber.from_fraction(P.x, p, prec)
            acc = Fraction(0)
            for k in range(depth):
                rhs = x * x * x + A * x + B
                if rhs.is_zero:
                    raise TorsionOrbitError(
                        "doubling orbit met a two-torsion point; see is_torsion"
                    )
                v4rhs = 2 * two.val + rhs.valuation()
                if v4rhs % 2 != 0:
                    raise PrecisionError("odd valuation for (2y)^2")
                v2y = v4rhs // 2
                acc += Fraction(1, 4 ** (k + 1)) * (-v2y + Fraction(vdisc, 4))
                num = x * x * x * x - two * A * x * x - (four + four) * B * x + A * A
                x = num / (four * rhs)
                if not x.is_zero and x.prec < 40:
                    raise PrecisionError("p-adic orbit lost too much precision")
            acc += Fraction(1, 4**depth) * Fraction(max(0, -x.valuation()), 2)
            return acc
        except PrecisionError:
            continue
    raise PrecisionError(f"p-adic series did not stabilize at p={p}")


def _torsion_guard(E: EllipticCurve, P: EcPoint):
    if P.is_infinity or P.y == 0:
        raise TorsionOrbitError("point is trivial or two-torsion; see is_torsion")
    n = is_torsion(E, P)
    if n is not None and n & (n - 1) == 0:
        raise TorsionOrbitError(f"order-{n} point: doubling orbit reaches O_E; see is_torsion")


def local_height_series(E: EllipticCurve, P: EcPoint, place, depth: int = DEPTH_SERIES) -> float:
    """Local Neron height at a place ('inf' or a prime), by the duplication series."""
    _torsion_guard(E, P)
    if place == "inf":
        return arch_local_series_from_x(E, complex(float(P.x), 0.0), depth)
    return float(padic_local_series_coeff(E, P, place, depth)) * math.log(place)


def local_height_good_closed_coeff(E: EllipticCurve, P: EcPoint, p: int) -> Fraction:
    """(1/2) max(0, -vp(x(P))) -- the good-reduction closed form, as the
    exact coefficient of log p."""
    if reduction_type(E, p) != "good":
        raise DomainError(f"closed form needs good reduction at {p}")
    if P.is_infinity:
        raise ValidationError("closed form needs P != O")
    return Fraction(max(0, -vp(P.x, p)), 2)


def local_height_good_closed(E: EllipticCurve, P: EcPoint, p: int) -> float:
    return float(local_height_good_closed_coeff(E, P, p)) * math.log(p)


# ---------------------------------------------------------------------------
# limit mode


def _duplication_resultant(E: EllipticCurve) -> int:
    A, B = int(E.A), int(E.B)
    num = IntPolynomial.make([A * A, -8 * B, -2 * A, 0, 1])
    den = IntPolynomial.make([B, A, 0, 1])
    r = resultant(num, den)
    return abs(int(r))


def _gcd_support(E: EllipticCurve) -> list[int]:
    disc = int(E.discriminant)
    support = {2} | set(factorint(disc))
    res = _duplication_resultant(E)
    if res:
        support |= set(factorint(res))
    return sorted(support)


def nt_height_limit(E: EllipticCurve, P: EcPoint, depth: int = DEPTH_LIMIT, dps: int = 60) -> float:
    """hat h(P) = lim 4^-n (1/2) h(x([2^n]P)) without exact big integers:
    float log-scale pair + exact gcd removal at the resultant primes."""
    if not E.is_integral:
        raise DomainError("limit mode runs on an integral model")
    support = _gcd_support(E)
    K = 64 + 6 * depth
    mods = {p: p**K for p in support}
    A, B = int(E.A), int(E.B)
    a0, b0 = P.x.numerator, P.x.denominator
    state = {p: (a0 % m, b0 % m) for p, m in mods.items()}
    with mp.workdps(dps):
        u, v = mp.mpf(a0), mp.mpf(b0)
        sc = max(abs(u), abs(v))
        m_log = mp.log(sc)
        u, v = u / sc, v / sc
        for _ in range(depth):
            fu = u**4 - 2 * A * u**2 * v**2 - 8 * B * u * v**3 + A**2 * v**4
            gv = 4 * v * (u**3 + A * u * v**2 + B * v**3)
            sc = max(abs(fu), abs(gv))
            if sc == 0:
                raise TorsionOrbitError("orbit reached O_E; see is_torsion")
            glog = mp.mpf(0)
            for p, m in mods.items():
                ap, bp = state[p]
                fp = (
                    pow(ap, 4, m)
                    - 2 * A * pow(ap, 2, m) * pow(bp, 2, m)
                    - 8 * B * ap * pow(bp, 3, m)
                    + A * A * pow(bp, 4, m)
                ) % m
                gp = 4 * bp * (pow(ap, 3, m) + A * ap * pow(bp, 2, m) + B * pow(bp, 3, m)) % m
                t = 0
                while t < K and fp % p == 0 and gp % p == 0:
                    fp //= p
                    gp //= p
                    t += 1
                if t >= K - 8:
                    raise PrecisionError(f"modular pair degenerated at p={p}")
                state[p] = (fp % m, gp % m)
                if t:
                    glog += t * mp.log(p)
            m_log = 4 * m_log + mp.log(sc) - glog
            u, v = fu / sc, gv / sc
        return float(mp.mpf(4) ** (-depth) * m_log / 2)


# ---------------------------------------------------------------------------
# public heights


def _contributing_primes(E: EllipticCurve, P: EcPoint) -> list[int]:
    support = set(factorint(int(E.discriminant))) | {2}
    if P.x is not None and P.x.denominator > 1:
        support |= set(factorint(P.x.denominator))
    return sorted(support)


def nt_height(
    E: EllipticCurve,
    P: EcPoint,
    mode: str = "local_sum",
    depth: int | None = None,
) -> NtHeight:
    """Canonical height, normalized so that sum_v lambda_v = hat h."""
    if mode not in ("local_sum", "limit"):
        raise ValidationError(f"unknown mode {mode!r}")
    E2, P2, _ = integral_model(E, P)
    order = is_torsion(E2, P2)
    if order is not None:
        bd = HeightBreakdown(E2, P2)
        return NtHeight(0.0, mode, 0.0, order, bd)
    if mode == "limit":
        depth = DEPTH_LIMIT if depth is None else depth
        value = nt_height_limit(E2, P2, depth)
        return NtHeight(value, "limit", _series_constant(E2) * 4.0**-depth, None, None)
    depth = DEPTH_SERIES if depth is None else depth
    bd = HeightBreakdown(E2, P2)
    arch = arch_local_series_from_x(E2, complex(float(P2.x), 0.0), depth)
    bd.entries["inf"] = LocalEntry(arch, "series", _series_constant(E2) * 4.0**-depth)
    for p in _contributing_primes(E2, P2):
        coeff = padic_local_series_coeff(E2, P2, p, depth)
        err = 0.0
        method = "series"
        if p >= 5 and reduction_type(E2, p) == "good":
            closed = local_height_good_closed_coeff(E2, P2, p)
            if closed != coeff:
                raise AssertionError(
                    f"good-reduction closed form {closed} != series {coeff} at p={p}"
                )
            method = "series=closed_form"
        else:
            err = _series_constant(E2, p) * 4.0**-depth
        bd.entries[p] = LocalEntry(float(coeff) * math.log(p), method, err, coeff)
    total = bd.total
    return NtHeight(total, "local_sum", bd.total_error, None, bd)


def partial_height(E: EllipticCurve, P: EcPoint, place, depth: int = DEPTH_SERIES) -> float:
    """hat h_v over Q: lambda_v(P) for P != O, and 0 at O."""
    if P.is_infinity:
        return 0.0
    E2, P2, _ = integral_model(E, P)
    return local_height_series(E2, P2, place, depth)


def parallelogram_check(
    E: EllipticCurve, P: EcPoint, Q: EcPoint, tol: float = 1e-5, depth: int | None = None
):
    """Residual of hat h(P+Q) + hat h(P-Q) - 2 hat h(P) - 2 hat h(Q)."""
    s = ec_add(E, P, Q)
    d = ec_add(E, P, ec_mul(E, -1, Q))
    vals = [nt_height(E, R, "local_sum", depth).value for R in (s, d)]
    vals += [nt_height(E, R, "local_sum", depth).value for R in (P, Q)]
    residual = vals[0] + vals[1] - 2 * (vals[2] + vals[3])
    return abs(residual) <= tol, residual


def semiabelian_height(alphas: list[AlgebraicNumber], E: EllipticCurve, P: EcPoint) -> Height:
    """hat h_G(alpha, P) = sum h(alpha_i) + hat h(P)."""
    value, err = 0.0, 0.0
    for alpha in alphas:
        h = weil_height(alpha)
        value += h.value
        err += h.error
    nt = nt_height(E, P)
    return Height(value + nt.value, err + nt.error)


@dataclass(frozen=True)
class GammaSatVerdict:
    status: str  # member | non_member | inconclusive
    m: int | None = None
    component_verdicts: tuple = ()
    torsion_order: int | None = None
    reason: str = ""

    @property
    def is_member(self) -> bool:
        return self.status == "member"


def gamma_sat_check(
    alphas: list[AlgebraicNumber], E: EllipticCurve, P: EcPoint, a, bound: int = 30
) -> GammaSatVerdict:
    """Membership of (alpha_1..alpha_n, P) in (<a>_sat)^n x {O_E}: every
    component must land in <a>_sat and P must be torsion; the witness is
    the product of the component witnesses and the torsion order."""
    verdicts: list[SatVerdict] = [sat_membership(alpha, a, bound) for alpha in alphas]
    for v in verdicts:
        if v.status == "non_member":
            return GammaSatVerdict("non_member", None, tuple(verdicts), None, v.reason)
    order = is_torsion(E, P)
    if order is None:
        return GammaSatVerdict(
            "non_member", None, tuple(verdicts), None, "elliptic component is not torsion"
        )
    if any(v.status == "inconclusive" for v in verdicts):
        return GammaSatVerdict(
            "inconclusive", None, tuple(verdicts), order, "some component searches were exhausted"
        )
    m = order
    for v in verdicts:
        m *= v.n
    return GammaSatVerdict("member", m, tuple(verdicts), order, "all components certified")
