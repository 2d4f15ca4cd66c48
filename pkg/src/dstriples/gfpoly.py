"""Exact univariate polynomial arithmetic over prime fields F_p.

Polynomials are immutable: a modulus p and a tuple of coefficients in
{0, ..., p-1}, lowest degree first, with no trailing zeros.  The zero
polynomial is the empty tuple; its degree is the sentinel NEG_INF so that
degree arithmetic stays total.

The usual ring operators (+, -, *, //, %, divmod, **) are overloaded.
Complete factorization into monic irreducibles is provided through
squarefree decomposition, distinct-degree splitting and Cantor-Zassenhaus
equal-degree splitting driven by a fixed seeded generator, so the output
is reproducible across runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

NEG_INF = float("-inf")

_EDF_SEED = 0x5D11AC


class ZeroPolynomialError(ZeroDivisionError):
    """Raised when an operation requires a nonzero polynomial."""


class ModulusMismatchError(ValueError):
    """Raised when operands live over different prime fields."""


def _is_prime(n: int) -> bool:
    # Deterministic Miller-Rabin; the witness set is exact for n < 3.3e24.
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
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


@lru_cache(maxsize=None)
def _check_prime(p: int) -> int:
    if not isinstance(p, int) or not _is_prime(p):
        raise ValueError(f"modulus {p!r} is not prime")
    return p


@dataclass(frozen=True)
class PrimeModulus:
    """A prime p, verified by a deterministic primality check."""

    p: int

    def __post_init__(self):
        _check_prime(self.p)


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 is not invertible mod {p}")
    return pow(a, p - 2, p)


def sqrt_mod(a: int, p: int) -> Optional[int]:
    """A square root of a mod p, or None.  Result is in {0, ..., (p-1)//2}."""
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        # Tonelli-Shanks with the first non-residue as generator.
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t, r = t * c % p, r * b % p
    return min(r, p - r)


class FpPoly:
    """A polynomial over F_p in canonical form."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Iterable[int] = ()):
        _check_prime(p)
        cs = [c % p for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("FpPoly is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(p: int) -> "FpPoly":
        return FpPoly(p, ())

    @staticmethod
    def one(p: int) -> "FpPoly":
        return FpPoly(p, (1,))

    @staticmethod
    def constant(p: int, c: int) -> "FpPoly":
        return FpPoly(p, (c,))

    @staticmethod
    def x(p: int) -> "FpPoly":
        return FpPoly(p, (0, 1))

    @staticmethod
    def monomial(p: int, e: int, c: int = 1) -> "FpPoly":
        return FpPoly(p, (0,) * e + (c,))

    # -- basic queries -------------------------------------------------

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def is_one(self) -> bool:
        return self.coeffs == (1,)

    def leading_coefficient(self) -> int:
        if not self.coeffs:
            raise ZeroPolynomialError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def constant_coefficient(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FpPoly)
            and self.p == other.p
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def _same_field(self, other: "FpPoly") -> None:
        if self.p != other.p:
            raise ModulusMismatchError(f"mixed moduli {self.p} and {other.p}")

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = FpPoly.constant(self.p, other)
        self._same_field(other)
        p = self.p
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % p
        return FpPoly(p, out)

    __radd__ = __add__

    def __neg__(self):
        return FpPoly(self.p, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = FpPoly.constant(self.p, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._same_field(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return FpPoly.zero(self.p)
        p = self.p
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return FpPoly(p, [c % p for c in out])

    __rmul__ = __mul__

    def scale(self, c: int) -> "FpPoly":
        c %= self.p
        return FpPoly(self.p, tuple(c * a for a in self.coeffs))

    def __divmod__(self, other: "FpPoly"):
        self._same_field(other)
        if other.is_zero():
            raise ZeroPolynomialError("polynomial division by zero")
        p = self.p
        a = list(self.coeffs)
        b = other.coeffs
        db = len(b) - 1
        if len(a) - 1 < db:
            return FpPoly.zero(p), self
        inv_lead = inv_mod(b[-1], p)
        q = [0] * (len(a) - db)
        for i in range(len(a) - 1, db - 1, -1):
            c = a[i] % p
            if c:
                c = c * inv_lead % p
                q[i - db] = c
                for j, bj in enumerate(b):
                    a[i - db + j] = (a[i - db + j] - c * bj) % p
        return FpPoly(p, q), FpPoly(p, a[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        result = FpPoly.one(self.p)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def pow_mod(self, e: int, modulus: "FpPoly") -> "FpPoly":
        result = FpPoly.one(self.p)
        base = self % modulus
        while e:
            if e & 1:
                result = result * base % modulus
            base = base * base % modulus
            e >>= 1
        return result

    def monic(self) -> "FpPoly":
        if self.is_zero():
            raise ZeroPolynomialError("zero polynomial cannot be made monic")
        lc = self.leading_coefficient()
        return self if lc == 1 else self.scale(inv_mod(lc, self.p))

    def derivative(self) -> "FpPoly":
        p = self.p
        return FpPoly(p, tuple(i * c % p for i, c in enumerate(self.coeffs))[1:])

    def __call__(self, a: int) -> int:
        p = self.p
        a %= p
        y = 0
        for c in reversed(self.coeffs):
            y = (y * a + c) % p
        return y

    def compose(self, g: "FpPoly") -> "FpPoly":
        """f.compose(g) computes f(g(t)) by Horner over F_p[t]."""
        self._same_field(g)
        result = FpPoly.zero(self.p)
        for c in reversed(self.coeffs):
            result = result * g + c
        return result

    def shift_arg(self, a: int, b: int) -> "FpPoly":
        """Substitute t -> a*t + b."""
        return self.compose(FpPoly(self.p, (b, a)))

    # -- text form -------------------------------------------------------

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for e in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[e]
            if c == 0:
                continue
            terms.append(f"{c}*t^{e}" if e else f"{c}")
        return "+".join(terms)

    def __repr__(self):
        return f"FpPoly({self.p}, {self.coeffs})"

    def sort_key(self):
        return (len(self.coeffs), self.coeffs)


def poly_mul(a: FpPoly, b: FpPoly) -> FpPoly:
    return a * b


def poly_divrem(a: FpPoly, b: FpPoly):
    return divmod(a, b)


def poly_gcd(a: FpPoly, b: FpPoly) -> FpPoly:
    """Monic gcd; defined unless both inputs are zero."""
    a._same_field(b)
    if a.is_zero() and b.is_zero():
        raise ZeroPolynomialError("gcd(0, 0) is undefined")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_compose(f: FpPoly, g: FpPoly) -> FpPoly:
    return f.compose(g)


def valuation(a: FpPoly, place) -> int:
    """Largest k with place^k dividing a; place is a finite Place or FpPoly."""
    pi = place.poly if isinstance(place, Place) else place
    if a.is_zero():
        raise ZeroPolynomialError("valuation of the zero polynomial")
    if pi.is_constant():
        raise ValueError("valuation needs a non-constant place")
    k = 0
    while True:
        q, r = divmod(a, pi)
        if not r.is_zero():
            return k
        a = q
        k += 1


def poly_sqrt(a: FpPoly) -> Optional[FpPoly]:
    """s with s*s == a, leading coefficient in {1, ..., (p-1)//2}, else None."""
    if a.is_zero():
        return a
    p = a.p
    d = a.degree
    if d % 2:
        return None
    lc_root = sqrt_mod(a.leading_coefficient(), p)
    if lc_root is None or lc_root == 0:
        return None
    m = d // 2
    # Determine coefficients of s from the top; 2*lc is invertible for p > 2.
    s = [0] * (m + 1)
    s[m] = lc_root
    inv2lc = inv_mod(2 * lc_root, p)
    for k in range(m - 1, -1, -1):
        # coefficient of t^(m+k) in s^2 must match a
        acc = 0
        for i in range(k + 1, m):
            j = m + k - i
            if k < j <= m:
                acc += s[i] * s[j]
        target = (a[m + k] - acc) % p
        s[k] = target * inv2lc % p
    cand = FpPoly(p, s)
    if cand * cand != a:
        return None
    if cand.leading_coefficient() > (p - 1) // 2:
        cand = -cand
    return cand


# -- places ------------------------------------------------------------


class Place:
    """A closed point of P^1 over F_p: a monic irreducible, or infinity."""

    __slots__ = ("p", "poly")

    def __init__(self, p: int, poly: Optional[FpPoly]):
        _check_prime(p)
        if poly is not None:
            if poly.p != p:
                raise ModulusMismatchError("place polynomial has wrong modulus")
            if poly.is_constant():
                raise ValueError("finite place must have degree >= 1")
            poly = poly.monic()
            if not is_irreducible(poly):
                raise ValueError(f"{poly} is not irreducible over F_{p}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "poly", poly)

    def __setattr__(self, name, value):
        raise AttributeError("Place is immutable")

    @staticmethod
    def infinity(p: int) -> "Place":
        return Place(p, None)

    @staticmethod
    def finite(poly: FpPoly) -> "Place":
        return Place(poly.p, poly)

    @staticmethod
    def rational(p: int, a: int) -> "Place":
        """The place t - a."""
        return Place(p, FpPoly(p, (-a % p, 1)))

    @property
    def is_infinity(self) -> bool:
        return self.poly is None

    @property
    def degree(self) -> int:
        return 1 if self.poly is None else int(self.poly.degree)

    def __eq__(self, other):
        return (
            isinstance(other, Place)
            and self.p == other.p
            and self.poly == other.poly
        )

    def __hash__(self):
        return hash((self.p, self.poly))

    def __str__(self):
        return "inf" if self.poly is None else str(self.poly)

    def __repr__(self):
        return f"Place({self.p}, {self.poly!r})"

    def sort_key(self):
        # infinity sorts after all finite places
        if self.poly is None:
            return (1, 0, ())
        return (0,) + self.poly.sort_key()


def is_irreducible(f: FpPoly) -> bool:
    """Rabin irreducibility test; deterministic."""
    if f.is_zero() or f.is_constant():
        return False
    n = int(f.degree)
    if n == 1:
        return True
    p = f.p
    f = f.monic()
    x = FpPoly.x(p)
    h = x.pow_mod(p ** n, f)
    if h != x % f:
        return False
    for q in _prime_divisors(n):
        g = x.pow_mod(p ** (n // q), f) - x
        if g.is_zero() or poly_gcd(g, f).degree > 0:
            return False
    return True


def _prime_divisors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# -- factorization -----------------------------------------------------


@dataclass(frozen=True)
class Factorization:
    """unit * prod(poly^mult) == the factored polynomial, factors sorted."""

    p: int
    unit: int
    factors: tuple  # of (FpPoly monic irreducible, multiplicity)

    def expand(self) -> FpPoly:
        out = FpPoly.constant(self.p, self.unit)
        for poly, mult in self.factors:
            out = out * poly ** mult
        return out

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


def _pth_root(f: FpPoly) -> FpPoly:
    # Over F_p every coefficient is its own p-th root, so f(t) = g(t^p)
    # pulls back to g by keeping every p-th coefficient.
    p = f.p
    return FpPoly(p, f.coeffs[::p])


def squarefree_decomposition(f: FpPoly) -> list:
    """[(g_i, m_i)] with f = lc * prod g_i^m_i, the g_i squarefree monic and coprime."""
    if f.is_zero():
        raise ZeroPolynomialError("cannot decompose the zero polynomial")
    p = f.p
    f = f.monic()
    out = []
    n = 1
    while f.degree > 0:
        d = f.derivative()
        if d.is_zero():
            f = _pth_root(f)
            n *= p
            continue
        g = poly_gcd(f, d)
        h = f // g
        i = 1
        while not h.is_one():
            gg = poly_gcd(g, h)
            piece = h // gg
            if piece.degree > 0:
                out.append((piece, i * n))
            g, h = g // gg, gg
            i += 1
        f = g
    out.sort(key=lambda t: (t[0].sort_key(), t[1]))
    return out


def _distinct_degree(f: FpPoly) -> list:
    """Split a squarefree monic f into [(product of irreducibles of degree d, d)]."""
    p = f.p
    out = []
    x = FpPoly.x(p)
    h = x % f
    d = 0
    while f.degree > 0:
        d += 1
        if 2 * d > f.degree:
            out.append((f, int(f.degree)))
            break
        h = h.pow_mod(p, f)
        g = poly_gcd(h - x, f) if not (h - x).is_zero() else f
        if g.degree > 0:
            out.append((g, d))
            f = f // g
            h = h % f
    return out


def _equal_degree(f: FpPoly, d: int, rng: random.Random) -> list:
    """Cantor-Zassenhaus split of squarefree monic f with all factors of degree d."""
    n = int(f.degree)
    if n == d:
        return [f]
    p = f.p
    stack = [f]
    done = []
    exponent = (p ** d - 1) // 2
    while stack:
        g = stack.pop()
        if g.degree == d:
            done.append(g)
            continue
        while True:
            r = FpPoly(p, [rng.randrange(p) for _ in range(int(g.degree))])
            if r.is_zero() or r.is_constant():
                continue
            s = r.pow_mod(exponent, g) - 1
            if s.is_zero():
                continue
            h = poly_gcd(s, g)
            if 0 < h.degree < g.degree:
                stack.append(h)
                stack.append(g // h)
                break
    return done


def factor(a: FpPoly) -> Factorization:
    """Complete factorization into monic irreducibles; deterministic output."""
    if a.is_zero():
        raise ZeroPolynomialError("cannot factor the zero polynomial")
    p = a.p
    unit = a.leading_coefficient()
    rng = random.Random(_EDF_SEED)
    factors = []
    for squarefree, mult in squarefree_decomposition(a):
        for prod, d in _distinct_degree(squarefree):
            for irr in _equal_degree(prod, d, rng):
                factors.append((irr, mult))
    factors.sort(key=lambda t: t[0].sort_key())
    return Factorization(p, unit, tuple(factors))


def roots(a: FpPoly) -> list:
    """Rational roots with multiplicity, as (root, multiplicity), sorted."""
    if a.is_zero():
        raise ZeroPolynomialError("zero polynomial")
    p = a.p
    out = []
    for poly, mult in factor(a).factors:
        if poly.degree == 1:
            out.append((-poly.constant_coefficient() % p, mult))
    out.sort()
    return out
