"""Short Weierstrass curves y^2 = x^3 + Ax + B over Q: exact point
arithmetic, reduction data, Frobenius traces, torsion detection, division
polynomials, and the formal group law at the origin."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from .errors import DomainError, ValidationError
from .numkernel import IntPolynomial, factorint, is_prime, legendre

# ---------------------------------------------------------------------------
# curves and points


@dataclass(frozen=True)
class EllipticCurve:
    A: Fraction
    B: Fraction

    @staticmethod
    def make(A, B) -> "EllipticCurve":
        A, B = Fraction(A), Fraction(B)
        E = EllipticCurve(A, B)
        if E.discriminant == 0:
            raise ValidationError(f"singular curve: A={A}, B={B}")
        return E

    @property
    def discriminant(self) -> Fraction:
        return -16 * (4 * self.A**3 + 27 * self.B**2)

    @property
    def is_integral(self) -> bool:
        return self.A.denominator == 1 and self.B.denominator == 1

    def rhs(self, x: Fraction) -> Fraction:
        return x**3 + self.A * x + self.B

    def point(self, x, y) -> "EcPoint":
        P = EcPoint(Fraction(x), Fraction(y))
        residual = P.y**2 - self.rhs(P.x)
        if residual != 0:
            raise ValidationError(
                f"point ({x}, {y}) is off the curve: y^2 - x^3 - Ax - B = {residual}"
            )
        return P

    def __str__(self) -> str:
        return f"y^2 = x^3 + {self.A}*x + {self.B}"


@dataclass(frozen=True)
class EcPoint:
    x: Fraction | None
    y: Fraction | None

    @staticmethod
    def infinity() -> "EcPoint":
        return EcPoint(None, None)

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self) -> str:
        return "O" if self.is_infinity else f"({self.x}, {self.y})"


def _check_on_curve(E: EllipticCurve, P: EcPoint):
    if P.is_infinity:
        return
    if P.y**2 != E.rhs(P.x):
        raise ValidationError(f"point {P} is not on {E}")


def ec_neg(P: EcPoint) -> EcPoint:
    if P.is_infinity:
        return P
    return EcPoint(P.x, -P.y)


def ec_add(E: EllipticCurve, P: EcPoint, Q: EcPoint) -> EcPoint:
    _check_on_curve(E, P)
    _check_on_curve(E, Q)
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    if P.x == Q.x:
        if P.y == -Q.y:
            return EcPoint.infinity()
        lam = (3 * P.x**2 + E.A) / (2 * P.y)
    else:
        lam = (Q.y - P.y) / (Q.x - P.x)
    x3 = lam**2 - P.x - Q.x
    y3 = lam * (P.x - x3) - P.y
    return EcPoint(x3, y3)


def ec_mul(E: EllipticCurve, n: int, P: EcPoint) -> EcPoint:
    _check_on_curve(E, P)
    if n < 0:
        return ec_mul(E, -n, ec_neg(P))
    R = EcPoint.infinity()
    Q = P
    while n:
        if n & 1:
            R = ec_add(E, R, Q)
        Q = ec_add(E, Q, Q)
        n >>= 1
    return R


def integral_model(E: EllipticCurve, P: EcPoint | None = None):
    """Scale (A, B) -> (u^4 A, u^6 B) to clear denominators; points map by
    (x, y) -> (u^2 x, u^3 y)."""
    primes: dict[int, int] = {}
    for q, e in factorint(E.A.denominator).items() if E.A.denominator > 1 else ():
        primes[q] = max(primes.get(q, 0), -(-e // 4))
    for q, e in factorint(E.B.denominator).items() if E.B.denominator > 1 else ():
        primes[q] = max(primes.get(q, 0), -(-e // 6))
    u = 1
    for q, e in primes.items():
        u *= q**e
    E2 = EllipticCurve.make(E.A * u**4, E.B * u**6)
    if P is None or P.is_infinity:
        return E2, P, u
    return E2, EcPoint(P.x * u**2, P.y * u**3), u


# ---------------------------------------------------------------------------
# reduction data


def _minimal_at(E: EllipticCurve, p: int) -> tuple[int, int]:
    if not E.is_integral:
        raise DomainError("reduction data needs integer coefficients")
    A, B = int(E.A), int(E.B)
    while A % p**4 == 0 and B % p**6 == 0 and (A, B) != (0, 0):
        A //= p**4
        B //= p**6
    if A == 0 and B == 0:
        raise ValidationError("singular curve")
    return A, B


def reduction_type(E: EllipticCurve, p: int) -> str:
    """good | mult_split | mult_nonsplit | additive, for p >= 5."""
    if p in (2, 3) or not is_prime(p):
        raise DomainError(f"reduction type unsupported at p = {p}")
    A, B = _minimal_at(E, p)
    disc = -16 * (4 * A**3 + 27 * B**2)
    if disc % p != 0:
        return "good"
    if A % p == 0:
        return "additive"
    # node at x0 = -3B / 2A mod p; tangent cone y^2 = 3 x0 (x - x0)^2
    x0 = -3 * B * pow(2 * A, -1, p) % p
    return "mult_split" if legendre(3 * x0 % p, p) == 1 else "mult_nonsplit"


def ap_count(E: EllipticCurve, p: int) -> int:
    """Trace of Frobenius a_p = p + 1 - #E(F_p) by exhaustive point count."""
    if reduction_type(E, p) != "good":
        raise DomainError(f"bad reduction at {p}")
    A, B = _minimal_at(E, p)
    a = -sum(legendre((x * x * x + A * x + B) % p, p) for x in range(p))
    if a * a > 4 * p:
        raise AssertionError(f"Hasse bound violated at p={p}")
    return a


def is_supersingular(E: EllipticCurve, p: int) -> bool:
    """For p >= 5 with good reduction: supersingular iff a_p = 0."""
    return ap_count(E, p) == 0


def supersingular_scan(E: EllipticCurve, p_max: int) -> list[tuple[int, int, bool]]:
    out = []
    for p in range(5, p_max + 1):
        if not is_prime(p):
            continue
        try:
            a = ap_count(E, p)
        except DomainError:
            continue
        out.append((p, a, a == 0))
    return out


# ---------------------------------------------------------------------------
# torsion

MAX_TORSION_SEARCH = 16


def is_torsion(E: EllipticCurve, P: EcPoint) -> int | None:
    """Exact order when P is torsion (Mazur: order <= 12 over Q), else None.

    Integrality of torsion points (Lutz-Nagell) is used to cut the multiple
    search short; the search itself is authoritative."""
    _check_on_curve(E, P)
    if P.is_infinity:
        return 1
    E2, Q, _ = integral_model(E, P)
    disc = E2.discriminant

    def integral(R: EcPoint) -> bool:
        return R.x.denominator == 1 and R.y.denominator == 1

    if not integral(Q):
        return None
    if Q.y != 0 and disc % (Q.y**2) != 0:
        return None
    R = Q
    for n in range(1, MAX_TORSION_SEARCH + 1):
        if R.is_infinity:
            return n
        if not integral(R):
            return None
        R = ec_add(E2, R, Q)
    return None


def torsion_scan(E: EllipticCurve, xbound: int = 50) -> list[tuple[EcPoint, int]]:
    """All torsion points with integer |x| <= xbound on an integral model."""
    if not E.is_integral:
        raise DomainError("torsion scan needs integer coefficients")
    found = []
    for x in range(-xbound, xbound + 1):
        t = E.rhs(Fraction(x))
        if t < 0 or t.denominator != 1:
            continue
        y = isqrt(int(t))
        if y * y != int(t):
            continue
        for yy in {y, -y}:
            P = E.point(x, yy)
            n = is_torsion(E, P)
            if n is not None:
                found.append((P, n))
    found.sort(key=lambda t: (t[1], t[0].x, t[0].y))
    return found


# ---------------------------------------------------------------------------
# division polynomials: elements a(x) + y*b(x) modulo y^2 = x^3 + Ax + B


def _padd(a, b):
    n = max(len(a), len(b))
    return [
        (a[i] if i < len(a) else Fraction(0)) + (b[i] if i < len(b) else Fraction(0))
        for i in range(n)
    ]


def _pscale(a, c):
    return [c * x for x in a]


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out or [Fraction(0)]


def _pstrip(a):
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


class _RingElt:
    """a(x) + y*b(x) with y^2 reduced to x^3 + Ax + B."""

    __slots__ = ("a", "b", "R")

    def __init__(self, a, b, R):
        self.a = _pstrip(list(a))
        self.b = _pstrip(list(b))
        self.R = R

    def __mul__(self, other):
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        aa = _padd(_pmul(a1, a2), _pmul(self.R, _pmul(b1, b2)))
        bb = _padd(_pmul(a1, b2), _pmul(a2, b1))
        return _RingElt(aa, bb, self.R)

    def __sub__(self, other):
        return _RingElt(
            _padd(self.a, _pscale(other.a, Fraction(-1))),
            _padd(self.b, _pscale(other.b, Fraction(-1))),
            self.R,
        )

    def div_2y(self):
        """(a + y b) / (2y); requires R | a."""
        if _pstrip(self.a[:]) != [Fraction(0)]:
            q, r = _pdivmod(self.a, self.R)
            if _pstrip(r) != [Fraction(0)]:
                raise AssertionError("division by 2y left a remainder")
            new_b = _pscale(q, Fraction(1, 2))
        else:
            new_b = [Fraction(0)]
        new_a = _pscale(self.b, Fraction(1, 2))
        return _RingElt(new_a, new_b, self.R)


def _pdivmod(a, b):
    a = [Fraction(x) for x in a]
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(_pstrip(a)) >= len(b) and _pstrip(a) != [Fraction(0)]:
        d = len(a) - len(b)
        c = a[-1] / b[-1]
        q[d] = c
        for j in range(len(b)):
            a[d + j] -= c * b[j]
        a.pop()
    return q, a


def division_polynomial(E: EllipticCurve, N: int) -> IntPolynomial:
    """The x-only division polynomial psi_N for odd N >= 1 (integral model).

    Roots are exactly the x-coordinates of the nontrivial points of E[N]."""
    if N < 1 or N % 2 == 0:
        raise ValidationError("division_polynomial implemented for odd N")
    if not E.is_integral:
        raise DomainError("division polynomials need integer coefficients")
    A, B = Fraction(E.A), Fraction(E.B)
    R = [B, A, Fraction(0), Fraction(1)]
    zero = _RingElt([0], [0], R)
    one = _RingElt([1], [0], R)
    two_y = _RingElt([0], [2], R)
    psi3 = _RingElt(
        [-(A**2), 12 * B, 6 * A, Fraction(0), Fraction(3)], [0], R
    )
    psi4b = [
        -8 * B**2 - A**3,
        -4 * A * B,
        -5 * A**2,
        20 * B,
        5 * A,
        Fraction(0),
        Fraction(4),
    ]
    psi4 = _RingElt([0], psi4b, R)
    psi: dict[int, _RingElt] = {0: zero, 1: one, 2: two_y, 3: psi3, 4: psi4}

    def get(n: int) -> _RingElt:
        if n in psi:
            return psi[n]
        m = n // 2
        if n % 2 == 1:
            out = get(m + 2) * get(m) * get(m) * get(m) - get(m - 1) * get(m + 1) * get(m + 1) * get(m + 1)
        else:
            out = (get(m + 2) * get(m - 1) * get(m - 1) - get(m - 2) * get(m + 1) * get(m + 1)) * get(m)
            out = out.div_2y()
        psi[n] = out
        return out

    elt = get(N)
    if _pstrip(elt.b[:]) != [Fraction(0)]:
        raise AssertionError("odd division polynomial has a y part")
    den = 1
    for c in elt.a:
        den = den * c.denominator // gcd(den, c.denominator)
    return IntPolynomial.make([int(c * den) for c in elt.a])


# ---------------------------------------------------------------------------
# formal group law in the parameter t = -x/y


class TruncPoly:
    """Truncated multivariate polynomial over Q (total degree <= maxdeg)."""

    __slots__ = ("nvars", "maxdeg", "terms")

    def __init__(self, nvars: int, maxdeg: int, terms=None):
        self.nvars = nvars
        self.maxdeg = maxdeg
        self.terms: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for e, c in terms.items():
                c = Fraction(c)
                if c and sum(e) <= maxdeg:
                    self.terms[e] = c

    @staticmethod
    def var(i: int, nvars: int, maxdeg: int) -> "TruncPoly":
        e = tuple(1 if j == i else 0 for j in range(nvars))
        return TruncPoly(nvars, maxdeg, {e: Fraction(1)})

    @staticmethod
    def const(c, nvars: int, maxdeg: int) -> "TruncPoly":
        return TruncPoly(nvars, maxdeg, {tuple(0 for _ in range(nvars)): Fraction(c)})

    def copy(self) -> "TruncPoly":
        return TruncPoly(self.nvars, self.maxdeg, dict(self.terms))

    def __add__(self, other):
        out = self.copy()
        for e, c in other.terms.items():
            out.terms[e] = out.terms.get(e, Fraction(0)) + c
            if not out.terms[e]:
                del out.terms[e]
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c) -> "TruncPoly":
        c = Fraction(c)
        return TruncPoly(self.nvars, self.maxdeg, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other):
        out = TruncPoly(self.nvars, self.maxdeg)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if sum(e) > self.maxdeg:
                    continue
                out.terms[e] = out.terms.get(e, Fraction(0)) + c1 * c2
                if not out.terms[e]:
                    del out.terms[e]
        return out

    def pow(self, k: int) -> "TruncPoly":
        out = TruncPoly.const(1, self.nvars, self.maxdeg)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def min_degree(self) -> int:
        return min((sum(e) for e in self.terms), default=self.maxdeg + 1)

    def invert_unit(self) -> "TruncPoly":
        """1/self when the constant term is a unit: 1/(c(1+eps)) = sum (-eps)^k / c."""
        c0 = self.terms.get(tuple(0 for _ in range(self.nvars)))
        if not c0:
            raise ValidationError("not a unit series")
        eps = (self - TruncPoly.const(c0, self.nvars, self.maxdeg)).scale(Fraction(1) / c0)
        step = eps.min_degree()
        if step == 0:
            raise ValidationError("series has no valuation gap")
        out = TruncPoly.const(1, self.nvars, self.maxdeg)
        term = TruncPoly.const(1, self.nvars, self.maxdeg)
        neg = eps.scale(-1)
        for _ in range(self.maxdeg // step + 1):
            term = term * neg
            if not term.terms:
                break
            out = out + term
        return out.scale(Fraction(1) / c0)

    def substitute(self, values: list["TruncPoly"]) -> "TruncPoly":
        """Evaluate at the given series (all sharing nvars/maxdeg)."""
        nv, md = values[0].nvars, values[0].maxdeg
        out = TruncPoly(nv, md)
        powers: list[dict[int, TruncPoly]] = [dict() for _ in range(self.nvars)]

        def power(i: int, k: int) -> TruncPoly:
            if k not in powers[i]:
                powers[i][k] = values[i].pow(k)
            return powers[i][k]

        for e, c in self.terms.items():
            term = TruncPoly.const(c, nv, md)
            for i, k in enumerate(e):
                if k:
                    term = term * power(i, k)
            out = out + term
        return out

    def coefficient(self, e: tuple[int, ...]) -> Fraction:
        return self.terms.get(e, Fraction(0))

    def __eq__(self, other):
        return (
            isinstance(other, TruncPoly)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __repr__(self):
        items = sorted(self.terms.items())
        return " + ".join(f"{c}*t^{e}" for e, c in items) or "0"


@dataclass(frozen=True)
class FormalGroupData:
    order: int
    F: TruncPoly  # two variables
    inverse: TruncPoly  # one variable


def _w_series(E: EllipticCurve, maxdeg: int) -> TruncPoly:
    """w(t) with w = t^3 + A t w^2 + B w^3 (so x = t/w, y = -1/w)."""
    A, B = E.A, E.B
    t = TruncPoly.var(0, 1, maxdeg)
    w = t.pow(3)
    for _ in range(maxdeg):
        w_new = t.pow(3) + (t * w * w).scale(A) + (w * w * w).scale(B)
        if w_new == w:
            break
        w = w_new
    return w


def formal_group(E: EllipticCurve, n: int) -> FormalGroupData:
    """Formal group law F(t1, t2) of E at the origin, to total degree n."""
    if n < 3:
        raise ValidationError("truncation order must be >= 3")
    A, B = E.A, E.B
    md = n + 3
    w1 = _w_series(E, md)
    t1 = TruncPoly.var(0, 2, md)
    t2 = TruncPoly.var(1, 2, md)
    # divided difference lambda = (w(t2) - w(t1)) / (t2 - t1)
    lam = TruncPoly(2, md)
    for (k,), c in w1.terms.items():
        for i in range(k):
            e = (i, k - 1 - i)
            lam.terms[e] = lam.terms.get(e, Fraction(0)) + c
    w_t1 = w1.substitute([t1])
    nu = w_t1 - lam * t1
    den = TruncPoly.const(1, 2, md) + (lam * lam).scale(A) + (lam * lam * lam).scale(B)
    num = (lam * nu).scale(2 * A) + (lam * lam * nu).scale(3 * B)
    z3 = (t1 + t2).scale(-1) - num * den.invert_unit()
    F = z3.scale(-1)
    F = TruncPoly(2, n, F.terms)  # truncate to requested order
    inv = TruncPoly(1, n, {(1,): Fraction(-1)})
    return FormalGroupData(n, F, inv)
