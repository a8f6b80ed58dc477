"""Weil heights of algebraic numbers, root-of-unity detection, and the
saturated-group elements zeta_{p^r}^u * a^(m/p^s).

Supported constructors: rationals, roots of unity, radicals a^(m/n), and
cyclotomic-times-radical products.  Minimal polynomials come from explicit
cyclotomic/radical composition; heights from the Mahler-measure identity
over certified root boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import mpmath as mp

from .errors import (
    InconclusiveError,
    PrecisionError,
    ReducibleRadicalError,
    UnsupportedConstructionError,
    ValidationError,
)
from .numkernel import (
    IntPolynomial,
    capelli_irreducible,
    cyclotomic,
    euler_phi,
    factor_fraction,
    is_prime,
    poly_roots,
    rational_is_kth_power,
)


@lru_cache(maxsize=1024)
def cached_roots(f: IntPolynomial):
    return tuple(poly_roots(f))


@dataclass(frozen=True)
class Height:
    value: float
    error: float

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ExactHeight:
    """Height of the form coeff * log(log_arg), exact."""

    coeff: Fraction
    log_arg: int

    @property
    def value(self) -> float:
        if self.coeff == 0 or self.log_arg == 1:
            return 0.0
        return float(self.coeff) * math.log(self.log_arg)


def rational_height(q) -> float:
    """h(p/q) = log max(|p|, |q|)."""
    q = Fraction(q)
    if q == 0:
        raise ValidationError("h(0) is undefined on G_m")
    return math.log(max(abs(q.numerator), q.denominator))


# ---------------------------------------------------------------------------
# algebraic numbers


def _scaled_cyclotomic(order: int, q: Fraction) -> IntPolynomial:
    """Minimal polynomial of q * zeta with zeta a primitive root of unity
    of the given order and q a nonzero rational."""
    nu, de = q.numerator, q.denominator
    phi = cyclotomic(order)
    d = phi.degree
    cs = [phi.coeffs[i] * nu ** (d - i) * de**i for i in range(d + 1)]
    return IntPolynomial.make(cs).primitive()


@dataclass(frozen=True)
class AlgebraicNumber:
    """An algebraic number: irreducible minimal polynomial plus a selected
    root.  Constructor-built values also carry their multiplicative shape
    value = exp(2*pi*i*theta) * base^(1/index) with base a positive rational."""

    minpoly: IntPolynomial
    root_index: int | None = None
    theta: Fraction | None = None
    base: Fraction | None = None
    index: int = 1

    @property
    def degree(self) -> int:
        return self.minpoly.degree

    @property
    def has_shape(self) -> bool:
        return self.theta is not None and self.base is not None

    def numeric(self, dps: int = 50):
        """mpmath complex value of the selected root."""
        if self.has_shape:
            with mp.workdps(dps):
                phase = mp.expjpi(2 * mp.mpf(self.theta.numerator) / self.theta.denominator)
                mag = mp.mpf(self.base.numerator) ** (mp.mpf(1) / self.index)
                mag /= mp.mpf(self.base.denominator) ** (mp.mpf(1) / self.index)
                return phase * mag
        boxes = cached_roots(self.minpoly)
        return mp.mpc(boxes[self.root_index].center)

    def resolve_root_index(self) -> int:
        if self.root_index is not None:
            return self.root_index
        if not self.has_shape:
            raise ValidationError("cannot locate the root without shape data")
        boxes = cached_roots(self.minpoly)
        with mp.workdps(40):
            v = self.numeric(40)
            dists = [abs(complex(v) - b.center) for b in boxes]
        order = sorted(range(len(boxes)), key=dists.__getitem__)
        best = order[0]
        if len(order) > 1 and dists[order[1]] < 10 * dists[best] + 1e-30:
            raise PrecisionError("selected root is not numerically separated")
        return best

    def box(self):
        return cached_roots(self.minpoly)[self.resolve_root_index()]


def algebraic_rational(q) -> AlgebraicNumber:
    q = Fraction(q)
    if q == 0:
        raise ValidationError("0 is not in G_m")
    mp_ = IntPolynomial.make([-q.numerator, q.denominator])
    theta = Fraction(0) if q > 0 else Fraction(1, 2)
    return AlgebraicNumber(mp_, 0, theta, abs(q), 1)


def root_of_unity(n: int, u: int = 1) -> AlgebraicNumber:
    if n < 1:
        raise ValidationError("order must be >= 1")
    theta = Fraction(u % n, n)
    return algebraic_from_parts(theta, Fraction(1), 1)


def radical(a, n: int) -> AlgebraicNumber:
    """The real n-th root of the rational a (a > 0, or n odd)."""
    a = Fraction(a)
    if a == 0:
        raise ValidationError("radical needs a != 0")
    if n < 1:
        raise ValidationError("radical index must be >= 1")
    if a < 0 and n % 2 == 0:
        raise UnsupportedConstructionError("even root of a negative rational")
    theta = Fraction(0) if a > 0 else Fraction(1, 2)
    return algebraic_from_parts(theta, abs(a), n)


def _reduce_radical(base: Fraction, n: int) -> tuple[Fraction, int]:
    """Rewrite base^(1/n) = w^(1/n') with the exponent vector of w coprime
    to n' (base > 0)."""
    if base == 1:
        return Fraction(1), 1
    _, vec = factor_fraction(base)
    g = n
    for e in vec.values():
        g = gcd(g, abs(e))
    if g == 1:
        return base, n
    w = Fraction(1)
    for prime, e in vec.items():
        w *= Fraction(prime) ** (e // g)
    return w, n // g


def algebraic_from_parts(theta, base, index: int) -> AlgebraicNumber:
    """Construct exp(2*pi*i*theta) * base^(1/index) with base > 0 rational.

    The minimal polynomial is built by scaling a cyclotomic polynomial and
    composing with X^index; the composition stays irreducible for odd index
    (conjugation argument), and for even index exactly when the pure
    equation passes the Capelli test.
    """
    theta = Fraction(theta) % 1
    base = Fraction(base)
    if base <= 0:
        raise ValidationError("base must be a positive rational")
    if index < 1:
        raise ValidationError("index must be >= 1")
    w, n = _reduce_radical(base, index)

    if w == 1:
        # pure root of unity (or 1 itself)
        order = theta.denominator
        if order == 1:
            return AlgebraicNumber(IntPolynomial.make([-1, 1]), 0, Fraction(0), Fraction(1), 1)
        minpoly = cyclotomic(order) if order > 2 else _scaled_cyclotomic(order, Fraction(1))
        return AlgebraicNumber(minpoly, None, theta, Fraction(1), 1)

    if n == 1:
        q = w if theta == 0 else (-w if theta == Fraction(1, 2) else None)
        if q is not None:
            return algebraic_rational(q)
        minpoly = _scaled_cyclotomic(theta.denominator, w)
        return AlgebraicNumber(minpoly, None, theta, w, 1)

    inner = (theta * n) % 1
    nprime = inner.denominator
    if nprime == 1:
        zq = w
    elif nprime == 2:
        zq = -w
    else:
        zq = None

    if zq is not None:
        if not capelli_irreducible(zq, n):
            raise UnsupportedConstructionError(
                f"X^{n} - ({zq}) is reducible; value lies in a smaller field"
            )
        mp_ = IntPolynomial.make(
            [-zq.numerator] + [0] * (n - 1) + [zq.denominator]
        ).primitive()
        return AlgebraicNumber(mp_, None, theta, w, n)

    if n % 2 == 0:
        raise UnsupportedConstructionError(
            "cyclotomic-times-radical products need an odd radical index"
        )
    # minimal polynomial of zeta' * w where zeta' = exp(2*pi*i*inner);
    # composing with X^n stays irreducible for odd n: a q-th root of
    # zeta' * w in Q(zeta') would force w^2, hence w, into Q^q.
    zeta_times_w = _scaled_cyclotomic(nprime, w)
    minpoly = zeta_times_w.compose_power(n).primitive()
    return AlgebraicNumber(minpoly, None, theta, w, n)


# ---------------------------------------------------------------------------
# heights


def weil_height(alpha: AlgebraicNumber) -> Height:
    """Weil height via the Mahler measure:
    h = (log|lead| + sum log max(1, |root|)) / degree, natural log."""
    f = alpha.minpoly
    boxes = cached_roots(f)
    d = f.degree
    total = math.log(abs(f.leading))
    err = 0.0
    for b in boxes:
        m = abs(b.center)
        lo, hi = max(m - b.radius, 1e-300), m + b.radius
        total += math.log(m) if m > 1 else 0.0
        err += max(0.0, math.log(max(1.0, hi))) - max(0.0, math.log(max(1.0, lo)))
    value = total / d
    return Height(max(value, 0.0), err / d + 1e-14)


@lru_cache(maxsize=8)
def _phi_values(limit: int) -> tuple[int, ...]:
    phi = list(range(limit + 1))
    for p in range(2, limit + 1):
        if phi[p] == p:  # p prime
            for k in range(p, limit + 1, p):
                phi[k] -= phi[k] // p
    return tuple(phi)


def is_root_of_unity(alpha: AlgebraicNumber) -> int | None:
    """The exact order of alpha when it is a root of unity, else None."""
    f = alpha.minpoly
    d = f.degree
    if abs(f.leading) != 1 or abs(f.coeffs[0]) != 1:
        return None
    for b in cached_roots(f):
        if abs(abs(b.center) - 1.0) > b.radius + 1e-9:
            return None
    bound = 2 * d * d + 2
    phi = _phi_values(bound)
    for order in range(1, bound + 1):
        if phi[order] == d and cyclotomic(order) == f:
            return order
    return None


def heights_agree(h1: Height, h2: float, tol: float = 1e-9) -> bool:
    return abs(h1.value - h2) <= tol + h1.error


# ---------------------------------------------------------------------------
# saturated-group elements


@dataclass(frozen=True)
class SatElement:
    """zeta_{p^r}^u * a^(m/p^s), canonical form."""

    p: int
    a: Fraction
    u: int
    r: int
    m: int
    s: int

    @staticmethod
    def make(p: int, a, u: int = 0, r: int = 0, m: int = 1, s: int = 0) -> "SatElement":
        a = Fraction(a)
        if p == 2 or not is_prime(p):
            raise ValidationError("saturation prime must be odd")
        if a in (0, 1, -1):
            raise ValidationError("base must avoid {0, 1, -1}")
        if r < 0 or s < 0:
            raise ValidationError("levels must be nonnegative")
        while s > 0 and m % p == 0:
            m //= p
            s -= 1
        if m == 0:
            s = 0
        u %= p**r
        while r > 0 and u % p == 0:
            u //= p
            r -= 1
        if u == 0:
            r = 0
        return SatElement(p, a, u, r, m, s)

    @property
    def exact_height(self) -> ExactHeight:
        la = max(abs(self.a.numerator), self.a.denominator)
        return ExactHeight(Fraction(abs(self.m), self.p**self.s), la)

    def __pow__(self, k: int) -> "SatElement":
        return SatElement.make(self.p, self.a, self.u * k, self.r, self.m * k, self.s)

    def __mul__(self, other: "SatElement") -> "SatElement":
        if (self.p, self.a) != (other.p, other.a):
            raise ValidationError("elements live over different bases")
        r = max(self.r, other.r)
        u = self.u * self.p ** (r - self.r) + other.u * self.p ** (r - other.r)
        s = max(self.s, other.s)
        m = self.m * self.p ** (s - self.s) + other.m * self.p ** (s - other.s)
        return SatElement.make(self.p, self.a, u, r, m, s)

    def realize(self, check_numeric: bool = False) -> tuple[AlgebraicNumber, ExactHeight]:
        """Minimal polynomial and exact height of the value."""
        q = self.a**self.m
        if self.s > 0 and rational_is_kth_power(q, self.p):
            raise ReducibleRadicalError(
                f"{self.a}^{self.m} is a {self.p}-th power; reduce the exponent first"
            )
        theta = Fraction(self.u, self.p**self.r)
        if q < 0:
            theta += Fraction(1, 2)
        alg = algebraic_from_parts(theta, abs(q), self.p**self.s)
        exact = self.exact_height
        if check_numeric:
            h = weil_height(alg)
            if not heights_agree(h, exact.value):
                raise PrecisionError(
                    f"numeric height {h.value} vs exact {exact.value} for {self}"
                )
        return alg, exact


def sat_element_realize(e: SatElement, check_numeric: bool = False):
    return e.realize(check_numeric=check_numeric)


# ---------------------------------------------------------------------------
# membership in <a>_sat


@dataclass(frozen=True)
class SatVerdict:
    status: str  # member | non_member | inconclusive
    n: int | None = None
    m: int | None = None
    zeta_order: int | None = None
    reason: str = ""

    @property
    def is_member(self) -> bool:
        return self.status == "member"


def _vector_ratio(vec_x: dict[int, int], vec_a: dict[int, int]):
    """m/n with vec_x * n = vec_a * m, or None when the vectors are not
    proportional (a certified valuation obstruction)."""
    if set(vec_x) != set(vec_a):
        return None
    ratio = None
    for prime, e in vec_x.items():
        r = Fraction(e, vec_a[prime])
        if ratio is None:
            ratio = r
        elif ratio != r:
            return None
    return ratio


def sat_membership(alpha: AlgebraicNumber, a, bound: int = 30) -> SatVerdict:
    """Decide whether some power of alpha lands in <a> (up to roots of unity).

    Shape-carrying inputs are decided exactly; otherwise the verdict comes
    from certified obstructions (norm valuations, height mismatch) or is
    reported inconclusive after the bounded search.
    """
    a = Fraction(a)
    if a in (0, 1, -1):
        raise ValidationError("base must avoid {0, 1, -1}")
    if bound < 1:
        raise ValidationError("bound must be >= 1")

    order = is_root_of_unity(alpha)
    if order is not None:
        return SatVerdict("member", 1, 0, order, "alpha is a root of unity")

    _, vec_a = factor_fraction(a)

    if alpha.has_shape:
        w, n0 = alpha.base, alpha.index
        _, vec_w = factor_fraction(w)
        if not vec_w:
            raise AssertionError("unit base should have been caught as a root of unity")
        ratio = _vector_ratio(vec_w, vec_a)
        if ratio is None:
            return SatVerdict(
                "non_member", reason="valuation obstruction: exponent vectors not proportional"
            )
        j, mm = ratio.denominator, ratio.numerator
        n = n0 * j
        # alpha^n * a^-mm = zeta_theta^n * (w^j / a^mm); the rational part is +-1
        eps = w**j / a**mm
        th = (alpha.theta * n + (Fraction(1, 2) if eps < 0 else 0)) % 1
        return SatVerdict("member", n, mm, th.denominator, "exact multiplicative shape")

    # norm-valuation obstruction: n * v_q(Norm alpha) = m * deg * v_q(a)
    f = alpha.minpoly
    norm = Fraction(abs(f.coeffs[0]), abs(f.leading))
    if norm != 0:
        _, vec_n = factor_fraction(norm) if norm != 1 else (1, {})
        for prime in vec_n:
            if prime not in vec_a:
                return SatVerdict(
                    "non_member",
                    reason=f"valuation obstruction: v_{prime}(Norm) != 0 but v_{prime}(a) = 0",
                )

    h = weil_height(alpha)
    ha = rational_height(a)
    tol = 1e-9 + h.error
    compatible = []
    for j in range(1, bound + 1):
        k = round(h.value * j / ha)
        if abs(k) <= bound and abs(h.value - float(Fraction(k, j)) * ha) <= tol:
            compatible.append((j, k))
    if not compatible:
        return SatVerdict(
            "non_member",
            reason=f"height mismatch: h(alpha) is not (m/n) h(a) for n <= {bound}",
        )
    return SatVerdict(
        "inconclusive",
        reason="height compatible but no symbolic certificate within the bound",
    )
