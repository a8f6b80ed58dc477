"""Exact integer/rational kernel.

Integer polynomials, certified complex root isolation, irreducibility of
pure equations X^n - a, and the small number-theory helpers everything
else leans on.  All rational arithmetic is exact; floating point appears
only inside root boxes.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import mpmath as mp

from .errors import PrecisionError, ValidationError

# ---------------------------------------------------------------------------
# primes and factoring (desk scale: trial division + Brent rho)

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, b in enumerate(sieve) if b]


def _brent_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = _random.Random(0xC0FFEE ^ n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if g != n:
            return g


def factorint(n: int) -> dict[int, int]:
    """Prime factorization of |n| (n != 0) as {p: exponent}."""
    n = abs(n)
    if n == 0:
        raise ValidationError("cannot factor 0")
    out: dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while f * f <= n and f < 100_000:
        if n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        else:
            f += wheel[i]
            i = (i + 1) % 8
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _brent_rho(m)
        stack.extend((d, m // d))
    return out


def factor_fraction(q: Fraction) -> tuple[int, dict[int, int]]:
    """Sign and prime-exponent vector (negative exponents for the denominator)."""
    if q == 0:
        raise ValidationError("cannot factor 0")
    sign = 1 if q > 0 else -1
    vec: dict[int, int] = dict(factorint(q.numerator))
    for p, e in factorint(q.denominator).items():
        vec[p] = vec.get(p, 0) - e
    return sign, {p: e for p, e in vec.items() if e}


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    t = pow(a, (p - 1) // 2, p)
    return 1 if t == 1 else -1


def iroot(n: int, k: int) -> tuple[int, bool]:
    """Floor k-th root of n >= 0 and whether it is exact."""
    if n < 0 or k < 1:
        raise ValidationError("iroot needs n >= 0, k >= 1")
    if n in (0, 1) or k == 1:
        return n, True
    r = int(round(n ** (1.0 / k)))
    while r > 0 and r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r, r**k == n


def rational_is_kth_power(q: Fraction, k: int) -> bool:
    """Exact test for q in (Q*)^k."""
    q = Fraction(q)
    if q == 0:
        return False
    if q < 0:
        if k % 2 == 0:
            return False
        return rational_is_kth_power(-q, k)
    _, nexact = iroot(q.numerator, k)
    if not nexact:
        return False
    _, dexact = iroot(q.denominator, k)
    return dexact


def rational_kth_root(q: Fraction, k: int) -> Fraction | None:
    """The rational k-th root of q when it exists (real root for odd k)."""
    q = Fraction(q)
    if q < 0:
        if k % 2 == 0:
            return None
        r = rational_kth_root(-q, k)
        return None if r is None else -r
    rn, en = iroot(q.numerator, k)
    rd, ed = iroot(q.denominator, k)
    if en and ed:
        return Fraction(rn, rd)
    return None


# ---------------------------------------------------------------------------
# integer polynomials, constant term first


@dataclass(frozen=True)
class IntPolynomial:
    coeffs: tuple[int, ...]

    @staticmethod
    def make(cs) -> "IntPolynomial":
        cs = [int(c) for c in cs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        return IntPolynomial(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def __call__(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        if self.degree == 0:
            return IntPolynomial.make([0])
        return IntPolynomial.make([i * c for i, c in enumerate(self.coeffs)][1:])

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, abs(c))
        return g or 1

    def primitive(self) -> "IntPolynomial":
        g = self.content()
        cs = [c // g for c in self.coeffs]
        if cs[-1] < 0:
            cs = [-c for c in cs]
        return IntPolynomial.make(cs)

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return IntPolynomial.make([x + y for x, y in zip(a, b)])

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial.make([-c for c in self.coeffs])

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial.make(out)

    def scale(self, k: int) -> "IntPolynomial":
        return IntPolynomial.make([k * c for c in self.coeffs])

    def compose_power(self, n: int) -> "IntPolynomial":
        """f(X^n)."""
        out = [0] * (self.degree * n + 1)
        for i, c in enumerate(self.coeffs):
            out[i * n] = c
        return IntPolynomial.make(out)


def poly_divmod_exact(f: IntPolynomial, g: IntPolynomial) -> IntPolynomial:
    """Quotient f/g when g divides f over Z; raises otherwise."""
    num = [Fraction(c) for c in f.coeffs]
    den = [Fraction(c) for c in g.coeffs]
    if g.is_zero:
        raise ZeroDivisionError
    q = [Fraction(0)] * (len(num) - len(den) + 1)
    r = num[:]
    for i in range(len(q) - 1, -1, -1):
        c = r[i + len(den) - 1] / den[-1]
        q[i] = c
        if c:
            for j, d in enumerate(den):
                r[i + j] -= c * d
    if any(r):
        raise ValidationError("polynomial division is not exact")
    if any(c.denominator != 1 for c in q):
        raise ValidationError("quotient is not integral")
    return IntPolynomial.make([int(c) for c in q])


def _frac_strip(v: list[Fraction]) -> list[Fraction]:
    while len(v) > 1 and v[-1] == 0:
        v.pop()
    return v


def _frac_rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    """Remainder of a by b over Q, both constant-first, b nonzero."""
    r = a[:]
    while len(r) >= len(b) and any(r):
        c = r[-1] / b[-1]
        for j in range(len(b)):
            r[len(r) - len(b) + j] -= c * b[j]
        r.pop()
        _frac_strip(r)
        if r == [Fraction(0)]:
            break
    return _frac_strip(r or [Fraction(0)])


def poly_gcd(f: IntPolynomial, g: IntPolynomial) -> IntPolynomial:
    """Primitive gcd over Z (via monic remainder sequence over Q)."""
    a = _frac_strip([Fraction(c) for c in f.coeffs])
    b = _frac_strip([Fraction(c) for c in g.coeffs])
    while b != [Fraction(0)]:
        a, b = b, _frac_rem(a, b)
    lcm_den = 1
    for c in a:
        lcm_den = lcm_den * c.denominator // gcd(lcm_den, c.denominator)
    return IntPolynomial.make([int(c * lcm_den) for c in a]).primitive()


def _gcd_is_one_mod_p(f: IntPolynomial, g: IntPolynomial) -> bool:
    """True when gcd(f, g) = 1 over Q, certified modulo one good prime."""
    for p in (2147483629, 2147483587, 2147482951):
        if f.leading % p == 0 or g.leading % p == 0:
            continue
        a = [c % p for c in f.coeffs]
        b = [c % p for c in g.coeffs]
        while any(b):
            while len(b) > 1 and b[-1] == 0:
                b.pop()
            if len(b) == 1:
                break
            inv = pow(b[-1], -1, p)
            r = a[:]
            while len(r) >= len(b):
                while len(r) > 1 and r[-1] == 0:
                    r.pop()
                if len(r) < len(b):
                    break
                c = r[-1] * inv % p
                for j in range(len(b)):
                    r[len(r) - len(b) + j] = (r[len(r) - len(b) + j] - c * b[j]) % p
                r.pop()
            a, b = b, (r if any(r) else [0])
        while len(b) > 1 and b[-1] == 0:
            b.pop()
        return len(b) == 1 and b[0] != 0
    return False


def yun_squarefree(f: IntPolynomial) -> list[tuple[IntPolynomial, int]]:
    """Squarefree decomposition f = c * prod g_i^i, returning [(g_i, i)]."""
    f = f.primitive()
    fp = f.derivative()
    if _gcd_is_one_mod_p(f, fp):
        return [(f, 1)]
    a = poly_gcd(f, fp)
    if a.degree == 0:
        return [(f, 1)]
    b = poly_divmod_exact(f, a)
    c = poly_divmod_exact(fp, a)
    d = c - b.derivative()
    out = []
    i = 1
    while True:
        if b.degree == 0:
            break
        g = poly_gcd(b, d)
        if g.degree > 0:
            out.append((g.primitive(), i))
        b2 = poly_divmod_exact(b, g) if g.degree > 0 else b
        c2 = poly_divmod_exact(d, g) if g.degree > 0 else d
        d = c2 - b2.derivative()
        b = b2
        i += 1
    return out


def resultant(f: IntPolynomial, g: IntPolynomial) -> Fraction:
    """Resultant via the Euclidean remainder sequence (exact, desk scale)."""
    a = [Fraction(c) for c in f.coeffs]
    b = [Fraction(c) for c in g.coeffs]

    def deg(v):
        d = len(v) - 1
        while d > 0 and v[d] == 0:
            d -= 1
        return d if any(v) else -1

    res = Fraction(1)
    while True:
        da, db = deg(a), deg(b)
        if db < 0:
            return Fraction(0)
        if db == 0:
            return res * b[0] ** da
        r = a[: da + 1]
        while deg(r) >= db:
            dr = deg(r)
            c = r[dr] / b[db]
            for j in range(db + 1):
                r[dr - db + j] -= c * b[j]
        dr = deg(r)
        if dr < 0:
            return Fraction(0)
        res *= Fraction(-1) ** (da * db) * b[db] ** (da - dr)
        a, b = b[: db + 1], r[: dr + 1]


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> IntPolynomial:
    """The n-th cyclotomic polynomial."""
    if n < 1:
        raise ValidationError("cyclotomic index must be >= 1")
    xn1 = IntPolynomial.make([-1] + [0] * (n - 1) + [1])
    if n == 1:
        return xn1
    q = xn1
    for d in range(1, n):
        if n % d == 0:
            q = poly_divmod_exact(q, cyclotomic(d))
    return q


def euler_phi(n: int) -> int:
    out = n
    for p in factorint(n):
        out = out // p * (p - 1)
    return out


# ---------------------------------------------------------------------------
# certified root isolation


@dataclass(frozen=True)
class RootBox:
    center: complex
    radius: float


REL_RADIUS = 2.0**-40


def _horner_mpc(coeffs: tuple[int, ...], z):
    acc = mp.mpc(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _aberth_sweeps(coeffs, dcoeffs, zs, dps, max_sweeps=40):
    with mp.workdps(dps):
        z = [mp.mpc(re, im) for re, im in zs]
        n = len(z)
        tol = mp.mpf(10) ** (-dps + 6)
        for _ in range(max_sweeps):
            moved = mp.mpf(0)
            for i in range(n):
                p = _horner_mpc(coeffs, z[i])
                if p == 0:
                    continue
                dp = _horner_mpc(dcoeffs, z[i])
                if dp == 0:
                    z[i] += mp.mpf(10) ** (-dps // 2)
                    continue
                w = p / dp
                s = mp.mpc(0)
                for j in range(n):
                    if j != i:
                        d = z[i] - z[j]
                        if d == 0:
                            d = mp.mpf(10) ** (-dps)
                        s += 1 / d
                denom = 1 - w * s
                corr = w if denom == 0 else w / denom
                z[i] -= corr
                moved = max(moved, abs(corr))
            if moved < tol:
                break
        return [(mp.mpf(w.real), mp.mpf(w.imag)) for w in z]


def _sqrt_up(q: Fraction) -> Fraction:
    if q < 0:
        raise ValueError
    if q == 0:
        return Fraction(0)
    n, d = q.numerator, q.denominator
    return Fraction(isqrt(n * d) + 1, d)


def _sqrt_down(q: Fraction) -> Fraction:
    if q <= 0:
        return Fraction(0)
    n, d = q.numerator, q.denominator
    return Fraction(isqrt(n * d), d)


_CERT_BITS = 96


def _to_scaled_int(x, bits: int) -> int:
    """round(x * 2**bits) exactly, for float or mpf input."""
    if isinstance(x, float):
        fr = Fraction(x) * (1 << bits)
        return (fr.numerator + fr.denominator // 2) // fr.denominator
    with mp.workprec(bits + 80):
        return int(mp.floor(mp.ldexp(mp.mpf(x), bits) + mp.mpf("0.5")))


def _eval_scaled(coeffs: tuple[int, ...], zr: int, zi: int, bits: int) -> tuple[int, int]:
    """2**(bits*deg) * f((zr + i*zi)/2**bits) as an exact Gaussian integer."""
    d = len(coeffs) - 1
    ar, ai = coeffs[-1], 0
    for k in range(d - 1, -1, -1):
        ar, ai = ar * zr - ai * zi + (coeffs[k] << (bits * (d - k))), ar * zi + ai * zr
    return ar, ai


def _certify(g: IntPolynomial, approx, rel_target: Fraction):
    """Certify one simple root of g per disk.

    Uses the exact bound min_i |z - root_i| <= deg * |g(z)/g'(z)| together
    with pairwise disjointness of the resulting disks.  Returns
    (center_re, center_im, radius) triples as exact rationals, or None if
    the approximations are too coarse.
    """
    B = _CERT_BITS
    one = 1 << B
    d = g.degree
    gp = g.derivative()
    raw = []
    for re_a, im_a in approx:
        zr, zi = _to_scaled_int(re_a, B), _to_scaled_int(im_a, B)
        nr, ni = _eval_scaled(g.coeffs, zr, zi, B)
        dr, di = _eval_scaled(gp.coeffs, zr, zi, B)
        den2 = dr * dr + di * di
        if den2 == 0:
            return None
        # r^2 = d^2 |g|^2 / |g'|^2 = d^2 (nr^2+ni^2) / (den2 * 2**(2B));
        # rq is an integer upper bound for r in units of 2**-B.
        rq = isqrt(d * d * (nr * nr + ni * ni) // den2) + 1
        mod_lo = isqrt(zr * zr + zi * zi) - rq  # |z| lower bound, same units
        if Fraction(rq, one) > rel_target * max(Fraction(1), Fraction(mod_lo, one)):
            return None
        raw.append((zr, zi, rq))
    for i in range(len(raw)):
        zri, zii, ri = raw[i]
        for j in range(i + 1, len(raw)):
            zrj, zij, rj = raw[j]
            dre, dim = zri - zrj, zii - zij
            if dre * dre + dim * dim <= (ri + rj) ** 2:
                return None
    return [(Fraction(zr, one), Fraction(zi, one), Fraction(rq, one)) for zr, zi, rq in raw]


def _initial_guesses(g: IntPolynomial):
    import numpy as np

    cs = [float(c) for c in g.coeffs]
    m = max(abs(c) for c in cs)
    cs = [c / m for c in cs]
    try:
        roots = np.roots(list(reversed(cs)))
        if len(roots) == g.degree and all(np.isfinite(roots.real)) and all(np.isfinite(roots.imag)):
            return [(mp.mpf(float(r.real)), mp.mpf(float(r.imag))) for r in roots]
    except Exception:
        pass
    with mp.workdps(30):
        roots = mp.polyroots([mp.mpf(c) for c in reversed(g.coeffs)], maxsteps=200, extraprec=80)
    return [(mp.mpf(r.real), mp.mpf(r.imag)) for r in roots]


def _newton_polish_double(g: IntPolynomial, guesses, sweeps: int = 3):
    """Cheap double-precision Newton polish; coefficients scaled to avoid overflow."""
    m = max(abs(c) for c in g.coeffs)
    cs = [c / m for c in g.coeffs]
    dcs = [i * c for i, c in enumerate(cs)][1:]
    out = []
    for re, im in guesses:
        z = complex(float(re), float(im))
        for _ in range(sweeps):
            p = 0j
            for c in reversed(cs):
                p = p * z + c
            dp = 0j
            for c in reversed(dcs):
                dp = dp * z + c
            if dp == 0:
                break
            z -= p / dp
        out.append((z.real, z.imag))
    return out


def _isolate_simple(g: IntPolynomial) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Certified disjoint disks for the (simple) roots of squarefree g."""
    if g.degree == 1:
        root = Fraction(-g.coeffs[0], g.coeffs[1])
        return [(root, Fraction(0), Fraction(0))]
    rel_target = Fraction(1, 2**40) / 4
    guesses = _initial_guesses(g)
    polished = _newton_polish_double(g, guesses)
    disks = _certify(g, polished, rel_target)
    if disks is not None:
        return disks
    dcoeffs = g.derivative().coeffs
    for dps in (40, 80, 160, 320, 640):
        guesses = _aberth_sweeps(g.coeffs, dcoeffs, guesses, dps)
        disks = _certify(g, guesses, rel_target)
        if disks is not None:
            return disks
    raise PrecisionError(f"root isolation did not converge for {g.coeffs}")


def poly_roots(f: IntPolynomial, rel_radius: float = REL_RADIUS) -> list[RootBox]:
    """Certified root boxes of f, counted with multiplicity.

    Each box contains exactly one root of f; boxes of distinct roots are
    disjoint; radius <= rel_radius * max(1, |center|).
    """
    if f.is_zero or f.degree < 1:
        raise ValidationError("poly_roots needs a nonzero polynomial of degree >= 1")
    boxes: list[RootBox] = []
    for g, mult in yun_squarefree(f):
        for re, im, rad in _isolate_simple(g):
            c = complex(float(re), float(im))
            # conversion slack: float(center) may sit off the exact center
            slack = 2.3e-16 * (abs(c) + 1e-300)
            box = RootBox(c, float(rad) * (1 + 1e-9) + slack)
            boxes.extend([box] * mult)
    boxes.sort(key=lambda b: (b.center.real, b.center.imag))
    cauchy = 1.0 + max(abs(c) for c in f.coeffs[:-1]) / abs(f.leading) if f.degree >= 1 else 1.0
    for b in boxes:
        if abs(b.center) > cauchy + b.radius + 1e-9:
            raise PrecisionError("root outside Cauchy bound")
    return boxes


# ---------------------------------------------------------------------------
# irreducibility of X^n - a over Q


def capelli_irreducible(a: Fraction, n: int) -> bool:
    """Is X^n - a irreducible over Q?

    Criterion: a is not a q-th power for any prime q | n, and when 4 | n,
    a is not of the form -4 c^4.
    """
    a = Fraction(a)
    if a == 0:
        raise ValidationError("capelli_irreducible needs a != 0")
    if n < 1:
        raise ValidationError("capelli_irreducible needs n >= 1")
    if n == 1:
        return True
    for q in factorint(n):
        if rational_is_kth_power(a, q):
            return False
    if n % 4 == 0 and a < 0 and rational_is_kth_power(-a / 4, 4):
        return False
    return True
