"""Weierstrass models y^2 = x^3 + A(t)x + B(t) over F_p(t), p > 3.

Surfaces are kept minimal at every finite place.  The fibre at infinity is
classified on the inverted model A*(s) = s^(4k) A(1/s), B*(s) = s^(6k) B(1/s)
with the least homogenization weight k, rather than through the degree
shortcut n = 6M - deg(f^3 - g^2); the shortcut is asserted as a cross-check
for surfaces built from exact-degree pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

from .gfpoly import (
    Factorization,
    FpPoly,
    Place,
    ZeroPolynomialError,
    factor,
    poly_gcd,
    squarefree_decomposition,
    valuation,
)
from . import kodaira
from .kodaira import FibreType, LocalInvariants, classify_local, local_invariants


class BadCharacteristicError(ValueError):
    """p in {2, 3} is out of scope."""


class BadDegreesError(ValueError):
    """(deg f, deg g) is not (2M, 3M) for a positive integer M."""


class IsotrivialOrSingularError(ValueError):
    """f^3 == g^2, so the discriminant vanishes identically."""


def _check_char(p: int) -> None:
    if p in (2, 3):
        raise BadCharacteristicError("characteristic 2 and 3 are not supported")


def discriminant(A: FpPoly, B: FpPoly) -> FpPoly:
    return (A ** 3 * 4 + B * B * 27) * (-16)


def _val_or_inf(poly: FpPoly, pi: FpPoly):
    return math.inf if poly.is_zero() else valuation(poly, pi)


def minimalize(A: FpPoly, B: FpPoly) -> Tuple[FpPoly, FpPoly, Factorization]:
    """Remove every pi^(4k), pi^(6k) with v(A) >= 4k and v(B) >= 6k.

    Returns the reduced pair and the extracted content as a Factorization
    recording pi -> k.
    """
    p = A.p
    delta = discriminant(A, B)
    if delta.is_zero():
        raise IsotrivialOrSingularError("discriminant vanishes identically")
    if A.is_zero():
        base = B
    elif B.is_zero():
        base = A
    else:
        base = poly_gcd(A, B)
    removed = []
    if base.degree > 0:
        # only parts of multiplicity >= min(4, 6) can matter; walk the
        # squarefree pieces to keep the factorization small
        for piece, mult in squarefree_decomposition(base):
            for pi, _ in factor(piece):
                va = _val_or_inf(A, pi)
                vb = _val_or_inf(B, pi)
                k = min(va // 4, vb // 6)
                if k >= 1:
                    k = int(k)
                    A = A // pi ** (4 * k)
                    B = B // pi ** (6 * k)
                    removed.append((pi, k))
    removed.sort(key=lambda t: t[0].sort_key())
    return A, B, Factorization(p, 1, tuple(removed))


@dataclass(frozen=True)
class WeierstrassSurface:
    p: int
    A: FpPoly
    B: FpPoly

    def __post_init__(self):
        _check_char(self.p)
        if self.A.p != self.p or self.B.p != self.p:
            raise ValueError("coefficients live over the wrong field")

    @staticmethod
    def build(p: int, A: FpPoly, B: FpPoly) -> "WeierstrassSurface":
        """Construct the minimal model with the given coefficients."""
        _check_char(p)
        A2, B2, _ = minimalize(A, B)
        return WeierstrassSurface(p, A2, B2)

    @property
    def delta(self) -> FpPoly:
        return discriminant(self.A, self.B)

    def f_g(self) -> Tuple[FpPoly, FpPoly]:
        """The (f, g) view with A = -3f, B = 2g (valid since p > 3)."""
        from .gfpoly import inv_mod

        f = self.A.scale(inv_mod(-3, self.p))
        g = self.B.scale(inv_mod(2, self.p))
        return f, g


@dataclass(frozen=True)
class DSPair:
    f: FpPoly
    g: FpPoly
    M: int

    @staticmethod
    def of(f: FpPoly, g: FpPoly) -> "DSPair":
        if f.is_zero() or g.is_zero():
            raise BadDegreesError("f and g must be nonzero")
        df, dg = int(f.degree), int(g.degree)
        if df % 2 or dg % 3 or df // 2 != dg // 3 or df == 0:
            raise BadDegreesError(f"degrees ({df}, {dg}) are not (2M, 3M)")
        M = df // 2
        if f ** 3 == g * g:
            raise IsotrivialOrSingularError("f^3 == g^2")
        return DSPair(f, g, M)

    @property
    def difference(self) -> FpPoly:
        return self.f ** 3 - self.g * self.g

    @property
    def defect(self) -> int:
        return int(self.difference.degree)


def from_ds_pair(f: FpPoly, g: FpPoly) -> Tuple[WeierstrassSurface, DSPair]:
    if f.p != g.p:
        raise ValueError("f and g live over different fields")
    _check_char(f.p)
    pair = DSPair.of(f, g)
    surface = WeierstrassSurface.build(f.p, f.scale(-3), g.scale(2))
    return surface, pair


@dataclass(frozen=True)
class FibreAssignment:
    place: Place
    fibre: FibreType
    v_delta: int

    @property
    def invariants(self) -> LocalInvariants:
        return local_invariants(self.fibre)


@dataclass(frozen=True)
class Configuration:
    p: int
    fibres: Tuple[FibreAssignment, ...]
    euler: int
    conductor_degree: int

    def fibre_at(self, place: Place) -> Optional[FibreAssignment]:
        for fa in self.fibres:
            if fa.place == place:
                return fa
        return None

    @property
    def infinity(self) -> Optional[FibreAssignment]:
        return self.fibre_at(Place.infinity(self.p))

    def types_multiset(self) -> Tuple[str, ...]:
        """Geometric multiset of singular fibre types (degree-weighted)."""
        out = []
        for fa in self.fibres:
            out.extend([str(fa.fibre)] * fa.place.degree)
        return tuple(sorted(out))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "fibres": [
                {"place": str(fa.place), "type": str(fa.fibre), "vdelta": fa.v_delta}
                for fa in self.fibres
            ],
            "euler": self.euler,
            "conductor_degree": self.conductor_degree,
        }


def make_configuration(p: int, assignments) -> Configuration:
    """Assemble a Configuration from (place, fibre) pairs, checking totals."""
    fibres = []
    euler = 0
    cond = 0
    for place, fibre in assignments:
        inv = local_invariants(fibre)
        if inv.euler == 0:
            continue
        fibres.append(FibreAssignment(place, fibre, inv.euler))
        euler += place.degree * inv.euler
        cond += place.degree * inv.conductor_exponent
    fibres.sort(key=lambda fa: fa.place.sort_key())
    if euler % 12:
        raise kodaira.InconsistentValuationsError(
            f"euler number {euler} is not divisible by 12"
        )
    return Configuration(p, tuple(fibres), euler, cond)


def _invert(poly: FpPoly, weight: int) -> FpPoly:
    """s^weight * poly(1/s); weight must be >= deg poly."""
    if poly.is_zero():
        return poly
    d = int(poly.degree)
    return FpPoly(poly.p, (0,) * (weight - d) + tuple(reversed(poly.coeffs)))


def infinity_weight(A: FpPoly, B: FpPoly) -> int:
    """Least k with deg A <= 4k and deg B <= 6k."""
    ka = 0 if A.is_zero() else -(-int(A.degree) // 4)
    kb = 0 if B.is_zero() else -(-int(B.degree) // 6)
    return max(ka, kb, 1)


def infinity_fibre(A: FpPoly, B: FpPoly) -> Tuple[FibreType, int]:
    """Kodaira type and Delta-valuation of the fibre at infinity."""
    k = infinity_weight(A, B)
    As = _invert(A, 4 * k)
    Bs = _invert(B, 6 * k)
    s = FpPoly.x(A.p)
    # minimalize at s = 0 only; other places of the inverted model are the
    # finite places already handled
    va = _val_or_inf(As, s)
    vb = _val_or_inf(Bs, s)
    while va >= 4 and vb >= 6:
        As = As // s ** 4
        Bs = Bs // s ** 6
        va -= 4
        vb -= 6
    dstar = discriminant(As, Bs)
    vd = valuation(dstar, s) if not dstar.is_zero() else 0
    return classify_local(va, vb, vd), vd


def configuration(s: WeierstrassSurface) -> Configuration:
    return _configuration_cached(s.p, s.A, s.B)


@lru_cache(maxsize=4096)
def _configuration_cached(p: int, A: FpPoly, B: FpPoly) -> Configuration:
    delta = discriminant(A, B)
    if delta.is_zero():
        raise IsotrivialOrSingularError("discriminant vanishes identically")
    assignments = []
    for pi, mult in factor(delta):
        va = _val_or_inf(A, pi)
        vb = _val_or_inf(B, pi)
        fibre = classify_local(va, vb, mult)
        assignments.append((Place.finite(pi), fibre))
    inf_type, _ = infinity_fibre(A, B)
    if not inf_type.is_smooth:
        assignments.append((Place.infinity(p), inf_type))
    return make_configuration(p, assignments)


# -- bound predicates ---------------------------------------------------

OK = "OK"
WARN = "WARN"
VIOLATES = "VIOLATES"


def c_bounds_check(config: Configuration):
    """Characteristic-0 ceilings per fibre: I_n needs n < (5/6)e, I_m^* needs
    m < 5(e/6 - 1).  The boundary value m = (5/6)e - 6 is flagged WARN."""
    e = config.euler
    verdicts = []
    for fa in config.fibres:
        t = fa.fibre
        verdict = OK
        if t.kind == "I" and t.n > 0:
            if 6 * t.n >= 5 * e:
                verdict = VIOLATES
        elif t.kind == "I*":
            if 6 * t.n >= 5 * e - 30:
                verdict = VIOLATES
            elif 6 * t.n == 5 * e - 36:
                verdict = WARN
        verdicts.append((fa, verdict))
    return verdicts


def c_bounds_ok(config: Configuration) -> bool:
    return all(v != VIOLATES for _, v in c_bounds_check(config))


def ps_bound_check(config: Configuration, insep_degree: int = 1) -> bool:
    """Euler-conductor inequality e <= 6 p^d (deg N - 2)."""
    if insep_degree != 1:
        q = insep_degree
        while q % config.p == 0:
            q //= config.p
        if q != 1:
            raise ValueError(f"{insep_degree} is not a power of {config.p}")
    return config.euler <= 6 * insep_degree * (config.conductor_degree - 2)
