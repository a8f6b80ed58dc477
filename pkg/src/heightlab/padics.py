"""Q_p arithmetic, p-th power tests, iterated p-th roots, Hensel lifting,
and exact w-adic valuations of elements in truncated cyclotomic-radical
towers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import (
    AmbiguousValuationError,
    HeightlabError,
    PrecisionError,
    ValidationError,
)
from .numkernel import IntPolynomial, cyclotomic, euler_phi, is_prime

DEFAULT_PRECISION = 60


class NoRootFoundError(HeightlabError):
    exit_code = 3


def vp(x, p: int):
    """p-adic valuation of a rational; +inf for 0.  Normalized |p|_p = 1/p."""
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    x = Fraction(x)
    if x == 0:
        return math.inf
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part_mod(x: Fraction, p: int, k: int) -> int:
    """The unit x / p^vp(x) reduced mod p^k."""
    x = Fraction(x)
    if x == 0:
        raise ValidationError("0 has no unit part")
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
    while den % p == 0:
        den //= p
    m = p**k
    return num * pow(den, -1, m) % m


# ---------------------------------------------------------------------------
# p-adic numbers: value = unit * p^val + O(p^(val+prec)), unit coprime to p


@dataclass(frozen=True)
class PadicNumber:
    p: int
    val: int
    unit: int
    prec: int

    @staticmethod
    def from_fraction(x, p: int, prec: int = DEFAULT_PRECISION) -> "PadicNumber":
        x = Fraction(x)
        if x == 0:
            return PadicNumber(p, prec, 0, 0)
        v = vp(x, p)
        return PadicNumber(p, v, unit_part_mod(x, p, prec), prec)

    @staticmethod
    def from_int_mod(w: int, p: int, abs_prec: int) -> "PadicNumber":
        """The class of the integer w known modulo p^abs_prec."""
        w %= p**abs_prec
        if w == 0:
            return PadicNumber(p, abs_prec, 0, 0)
        v = 0
        while w % p == 0:
            w //= p
            v += 1
        return PadicNumber(p, v, w % p ** (abs_prec - v), abs_prec - v)

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def abs_prec(self) -> int:
        return self.val + self.prec

    def _require_nonzero(self):
        if self.is_zero:
            raise PrecisionError(
                f"value indistinguishable from 0 (known O({self.p}^{self.val}))"
            )

    def valuation(self) -> int:
        self._require_nonzero()
        return self.val

    def __mul__(self, other: "PadicNumber") -> "PadicNumber":
        p = self.p
        if self.is_zero or other.is_zero:
            # (0 mod p^a) * (anything with valuation >= v) is 0 mod p^(a+v)
            return PadicNumber(p, self.val + other.val, 0, 0)
        prec = min(self.prec, other.prec)
        return PadicNumber(p, self.val + other.val, self.unit * other.unit % p**prec, prec)

    def __truediv__(self, other: "PadicNumber") -> "PadicNumber":
        other._require_nonzero()
        p = self.p
        prec = min(self.prec, other.prec) if not self.is_zero else other.prec
        if self.is_zero:
            return PadicNumber(p, self.val - other.val, 0, 0)
        inv = pow(other.unit, -1, p**prec)
        return PadicNumber(p, self.val - other.val, self.unit * inv % p**prec, prec)

    def __neg__(self) -> "PadicNumber":
        if self.is_zero:
            return self
        m = self.p**self.prec
        return PadicNumber(self.p, self.val, (-self.unit) % m, self.prec)

    def __add__(self, other: "PadicNumber") -> "PadicNumber":
        p = self.p
        if self.is_zero and other.is_zero:
            return PadicNumber(p, min(self.val, other.val), 0, 0)
        if self.is_zero:
            self, other = other, self
        if other.is_zero:
            # known only mod p^other.val
            cap = min(self.abs_prec, other.val)
            if cap <= self.val:
                return PadicNumber(p, cap, 0, 0)
            return PadicNumber(p, self.val, self.unit % p ** (cap - self.val), cap - self.val)
        v = min(self.val, other.val)
        cap = min(self.abs_prec, other.abs_prec)
        m = cap - v
        if m <= 0:
            return PadicNumber(p, cap, 0, 0)
        s = (self.unit * p ** (self.val - v) + other.unit * p ** (other.val - v)) % p**m
        if s == 0:
            return PadicNumber(p, cap, 0, 0)
        t = 0
        while s % p == 0:
            s //= p
            t += 1
        return PadicNumber(p, v + t, s % p ** (m - t), m - t)

    def __sub__(self, other: "PadicNumber") -> "PadicNumber":
        return self + (-other)

    def __pow__(self, n: int) -> "PadicNumber":
        if n < 0:
            return PadicNumber.from_fraction(1, self.p, self.prec) / self**-n
        out = PadicNumber.from_fraction(1, self.p, self.prec if not self.is_zero else 40)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def lift_int(self) -> int:
        """An integer representative of value * p^-val (the unit), mod p^prec."""
        self._require_nonzero()
        return self.unit

    def __repr__(self) -> str:
        if self.is_zero:
            return f"O({self.p}^{self.val})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.abs_prec})"


# ---------------------------------------------------------------------------
# p-th power testing and the maximal-power exponent


def is_pth_power(a, p: int) -> bool:
    """Is a in (Q_p*)^p?  For odd p: p | vp(a) and unit^(p-1) = 1 mod p^2."""
    a = Fraction(a)
    if a == 0:
        raise ValidationError("is_pth_power needs a != 0")
    if p == 2 or not is_prime(p):
        raise ValidationError("is_pth_power needs an odd prime")
    v = vp(a, p)
    if v % p != 0:
        return False
    u = unit_part_mod(a, p, 2)
    return pow(u, p - 1, p * p) == 1


def _unit_is_pkth_power(u: int, p: int, k: int) -> bool:
    """u (coprime to p) in (Z_p*)^(p^k), via u^(p-1) = 1 mod p^(k+1)."""
    return pow(u, p - 1, p ** (k + 1)) == 1


def _padic_unit_pth_root(u: int, p: int, abs_prec: int) -> int:
    """The p-th root of the unit u mod p^abs_prec (exists and is unique for
    odd p once u^(p-1) = 1 mod p^2).  Seed: least nonnegative solution mod p^3."""
    m3 = p**3
    seed = None
    for w in range(1, m3):
        if w % p and pow(w, p, m3) == u % m3:
            seed = w
            break
    if seed is None:
        raise NoRootFoundError(f"{u} has no p-th root mod {p}^3")
    # Newton on f(w) = w^p - u, v(f') = 1
    target = abs_prec + 2
    mod = p**target
    w = seed
    reach = 3
    while reach < target:
        reach = min(2 * reach - 2, target)
        mr = p**reach
        fw = (pow(w, p, mr * p) - u) % (mr * p)
        fpw = p * pow(w, p - 1, mr)
        t = fpw // p
        w = (w - (fw // p) * pow(t, -1, mr)) % mr
    return w % p**abs_prec


def pth_root(x: PadicNumber, p: int | None = None) -> PadicNumber:
    """A p-th root of x in Q_p (x must be a p-th power)."""
    p = x.p if p is None else p
    x._require_nonzero()
    if x.val % p != 0:
        raise NoRootFoundError("valuation not divisible by p")
    if not _unit_is_pkth_power(x.unit, p, 1):
        raise NoRootFoundError("unit part is not a p-th power")
    if x.prec < 4:
        raise PrecisionError("need at least 4 digits to extract a p-th root")
    root_prec = x.prec - 2
    w = _padic_unit_pth_root(x.unit % p**x.prec, p, root_prec)
    return PadicNumber(p, x.val // p, w % p**root_prec, root_prec)


def lambda_exponent(a, p: int, prec: int = DEFAULT_PRECISION) -> tuple[int, PadicNumber]:
    """Largest lam with a in (Q_p*)^(p^lam), plus b with b^(p^lam) = a and
    b not a p-th power, to the requested precision."""
    a = Fraction(a)
    if a in (0, 1, -1):
        raise ValidationError("lambda_exponent needs a not in {0, 1, -1}")
    if p == 2 or not is_prime(p):
        raise ValidationError("lambda_exponent needs an odd prime")
    # upper bound on lam: p^lam divides vp(a), and the unit must be a
    # p^lam-th power, which forces p^lam | vp(u^(p-1) - 1) - 1 territory;
    # iterate with enough working digits and fail loudly if they run out.
    work = prec + 8
    cur = PadicNumber.from_fraction(a, p, work)
    lam = 0
    while True:
        if cur.val % p != 0 or not _unit_is_pkth_power(cur.unit, p, 1):
            break
        if cur.prec < 4:
            raise PrecisionError(
                f"lambda_exponent needs more than {prec} digits for a={a}, p={p}"
            )
        cur = pth_root(cur, p)
        lam += 1
    if cur.prec < prec:
        # redo with more digits so b carries the advertised precision
        work2 = prec + 8 + 2 * (lam + 1)
        cur = PadicNumber.from_fraction(a, p, work2)
        for _ in range(lam):
            cur = pth_root(cur, p)
    trimmed = PadicNumber(p, cur.val, cur.unit % p**prec, min(cur.prec, prec))
    return lam, trimmed


# ---------------------------------------------------------------------------
# Hensel lifting for integer polynomials


def hensel_root(
    f: IntPolynomial,
    p: int,
    prec: int = DEFAULT_PRECISION,
    seed: int | None = None,
    seed_search_digits: int = 6,
) -> PadicNumber:
    """A root of f in Z_p to precision p^prec.

    The seed must satisfy vp(f(seed)) > 2*vp(f'(seed)); when no seed is
    given, seeds are searched exhaustively mod p, p^2, ..., p^seed_search_digits.
    """
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    fp = f.derivative()

    def strong(w: int) -> int | None:
        fw = f(Fraction(w))
        if fw == 0:
            return 10**9  # exact integer root
        vf = vp(fw, p)
        fpw = fp(Fraction(w))
        vfp = math.inf if fpw == 0 else vp(fpw, p)
        return vf if vf > 2 * vfp else None

    if seed is None:
        found = None
        for k in range(1, seed_search_digits + 1):
            for w in range(p**k):
                if strong(w) is not None:
                    found = w
                    break
            if found is not None:
                break
        if found is None:
            raise NoRootFoundError(
                f"no Hensel seed below {p}^{seed_search_digits} for {f.coeffs}"
            )
        seed = found
    else:
        if strong(seed) is None:
            raise ValidationError("seed does not satisfy the strong Hensel condition")

    fw = int(f(Fraction(seed)))
    if fw == 0:
        return PadicNumber.from_fraction(seed, p, prec)
    delta = vp(int(fp(Fraction(seed))), p)
    target = prec + 2 * delta + 4
    mod = p**target
    w = seed % mod

    def ival(poly: IntPolynomial, x: int, m: int) -> int:
        acc = 0
        for c in reversed(poly.coeffs):
            acc = (acc * x + c) % m
        return acc

    for _ in range(target.bit_length() + 8):
        fw = ival(f, w, mod)
        if fw % p**target == 0:
            break
        fpw = ival(fp, w, mod)
        t = fpw // p**delta
        if t % p == 0:
            raise PrecisionError("derivative valuation drifted during lifting")
        step = (fw // p ** (2 * delta)) * pow(t, -1, mod) % mod
        w = (w - step * p**delta) % mod
    else:
        raise PrecisionError("Hensel iteration did not reach the target precision")
    return PadicNumber.from_int_mod(w % p**prec, p, prec)


# ---------------------------------------------------------------------------
# exact valuations in K(zeta_{p^r}, b^{1/p^s})
#
# |.|_w = p^(-e); e is tracked as an exact Fraction.  Generator data:
# the radical b has integer valuation v_b, zeta_{p^g} - 1 has e = 1/phi(p^g).


@lru_cache(maxsize=None)
def _phi_power_table(p: int, r: int):
    """Reduction table: zeta^k in the basis 1..zeta^(phi-1), k < p^r."""
    phi = euler_phi(p**r)
    mod = cyclotomic(p**r)
    rows = []
    cur = [Fraction(0)] * phi
    cur[0] = Fraction(1)
    for _ in range(max(p**r, 2 * phi)):
        rows.append(tuple(cur))
        nxt = [Fraction(0)] + list(cur[:-1])
        top = cur[-1]
        if top:
            for i in range(phi):
                nxt[i] -= top * mod.coeffs[i]
        cur = nxt
    return tuple(rows)


def _cyc_mul(a, b, p: int, r: int):
    phi = len(a)
    table = _phi_power_table(p, r)
    out = [Fraction(0)] * phi
    for i, ca in enumerate(a):
        if not ca:
            continue
        for j, cb in enumerate(b):
            if not cb:
                continue
            k = i + j
            if k < phi:
                out[k] += ca * cb
            else:
                row = table[k]
                for t in range(phi):
                    if row[t]:
                        out[t] += ca * cb * row[t]
    return out


def _cyc_from_sparse(coeffs: dict[int, Fraction], p: int, r: int):
    phi = euler_phi(p**r)
    table = _phi_power_table(p, r)
    out = [Fraction(0)] * phi
    for u, c in coeffs.items():
        row = table[u % p**r]
        for t in range(phi):
            if row[t]:
                out[t] += c * row[t]
    return out


def cyclotomic_combo_valuation(coeffs: dict[int, Fraction], p: int, r: int):
    """Exact e with |y|_w = p^-e for y = sum c_u zeta_{p^r}^u.

    Q(zeta_{p^r}) has a single place above p (Phi_{p^r} is irreducible over
    Q_p), so every conjugate shares the valuation and e = vp(Norm(y))/phi.
    Returns +inf for y = 0.
    """
    if r == 0:
        total = sum(coeffs.values(), Fraction(0))
        return math.inf if total == 0 else Fraction(vp(total, p))
    n = p**r
    phi = euler_phi(n)
    y_sparse = {u % n: c for u, c in coeffs.items()}
    acc = None
    for t in range(1, n):
        if t % p == 0:
            continue
        conj = {}
        for u, c in y_sparse.items():
            k = u * t % n
            conj[k] = conj.get(k, Fraction(0)) + c
        vec = _cyc_from_sparse(conj, p, r)
        acc = vec if acc is None else _cyc_mul(acc, vec, p, r)
    norm = acc[0]
    if any(acc[1:]):
        raise AssertionError("norm landed outside Q")
    if norm == 0:
        return math.inf
    return Fraction(vp(norm, p), phi)


@dataclass(frozen=True)
class TowerElement:
    """Element of K(zeta_{p^r}, b^{1/p^s}) in the supported fragment:
    rational combinations of monomials zeta^u * b^(j/p^s)."""

    p: int
    r: int
    s: int
    v_b: int
    lam: int
    base_a: Fraction | None
    terms: tuple[tuple[tuple[int, int], Fraction], ...]

    @staticmethod
    def make(p, r, s, v_b, terms, lam=0, base_a=None) -> "TowerElement":
        if not is_prime(p) or p == 2:
            raise ValidationError("tower prime must be odd")
        if r < 0 or s < 0:
            raise ValidationError("levels must be nonnegative")
        base_a = None if base_a is None else Fraction(base_a)
        folded: dict[tuple[int, int], Fraction] = {}
        ps = p**s
        pr = p**r if r > 0 else 1
        for (u, j), c in dict(terms).items():
            c = Fraction(c)
            if c == 0:
                continue
            if j < 0 or j >= ps:
                q, j = divmod(j, ps)
                if lam == 0 and base_a is not None:
                    c *= base_a**q
                else:
                    raise ValidationError(
                        "radical exponent overflow needs a rational base (lam = 0)"
                    )
            u %= pr
            key = (u, j)
            folded[key] = folded.get(key, Fraction(0)) + c
        items = tuple(sorted((k, v) for k, v in folded.items() if v != 0))
        return TowerElement(p, r, s, v_b, lam, base_a, items)

    @staticmethod
    def monomial(p, r, s, v_b, u=0, j=0, coeff=1, lam=0, base_a=None) -> "TowerElement":
        return TowerElement.make(p, r, s, v_b, {(u, j): Fraction(coeff)}, lam, base_a)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __mul__(self, other: "TowerElement") -> "TowerElement":
        if (self.p, self.r, self.s, self.v_b) != (other.p, other.r, other.s, other.v_b):
            raise ValidationError("tower levels differ")
        prod: dict[tuple[int, int], Fraction] = {}
        for (u1, j1), c1 in self.terms:
            for (u2, j2), c2 in other.terms:
                key = (u1 + u2, j1 + j2)
                prod[key] = prod.get(key, Fraction(0)) + c1 * c2
        return TowerElement.make(
            self.p, self.r, self.s, self.v_b, prod, self.lam, self.base_a
        )


def tower_abs(x: TowerElement):
    """Exact exponent e with |x|_w = p^-e, or +inf for 0.

    Terms are grouped by radical exponent j; each group is a cyclotomic
    combination whose valuation is exact (single place above p).  A tie
    between the minimal valuations of different groups cannot be resolved
    in this fragment and raises AmbiguousValuationError.
    """
    if x.is_zero:
        return math.inf
    groups: dict[int, dict[int, Fraction]] = {}
    for (u, j), c in x.terms:
        groups.setdefault(j, {})
        groups[j][u] = groups[j].get(u, Fraction(0)) + c
    vals = []
    for j, combo in groups.items():
        ev = cyclotomic_combo_valuation(combo, x.p, x.r)
        if ev is math.inf:
            continue
        vals.append(ev + Fraction(j * x.v_b, x.p**x.s))
    if not vals:
        return math.inf
    vals.sort()
    if len(vals) > 1 and vals[0] == vals[1]:
        raise AmbiguousValuationError(
            f"tied minimal valuations {vals[0]} across radical exponents"
        )
    return vals[0]
