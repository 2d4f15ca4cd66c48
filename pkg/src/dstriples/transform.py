"""Base-change and twist combinators for Weierstrass models over F_p(t).

A RationalMap N(t)/D(t) acts on the base line; pulling a surface back along
it rescales (A, B) by the denominator so the coefficients stay polynomial,
then minimalizes.  Ramification profiles record the full branch data of the
separable part over F_p-rational values; maps branching over an irrational
point are rejected rather than partially handled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple

from .gfpoly import (
    FpPoly,
    Place,
    ZeroPolynomialError,
    factor,
    inv_mod,
    is_irreducible,
    poly_gcd,
)
from .kodaira import FibreType, base_change_type, local_invariants
from .surface import (
    Configuration,
    WeierstrassSurface,
    minimalize,
)

INF = "inf"  # the value infinity of the base line


class DegenerateMapError(ValueError):
    """The map is constant or otherwise unusable."""


class NonSquarefreeError(ValueError):
    """Quadratic twists require a squarefree twisting polynomial."""


class WildRamificationError(ValueError):
    """A separable ramification index is divisible by p."""


class IrrationalBranchingError(ValueError):
    """A critical value lies outside F_p and infinity."""


@dataclass(frozen=True)
class RationalMap:
    """N/D with gcd(N, D) = 1, D monic (possibly 1), non-constant."""

    num: FpPoly
    den: FpPoly

    def __post_init__(self):
        if self.num.p != self.den.p:
            raise ValueError("numerator and denominator over different fields")
        if self.den.is_zero():
            raise DegenerateMapError("zero denominator")
        if self.num.is_constant() and self.den.is_constant():
            raise DegenerateMapError("constant map")

    @staticmethod
    def of(num: FpPoly, den: Optional[FpPoly] = None) -> "RationalMap":
        if den is None:
            den = FpPoly.one(num.p)
        g = poly_gcd(num, den) if not num.is_zero() else den.monic()
        if g.degree > 0:
            num, den = num // g, den // g
        lc = den.leading_coefficient()
        if lc != 1:
            c = inv_mod(lc, den.p)
            num, den = num.scale(c), den.scale(c)
        return RationalMap(num, den)

    @staticmethod
    def polynomial(num: FpPoly) -> "RationalMap":
        return RationalMap.of(num)

    @staticmethod
    def identity(p: int) -> "RationalMap":
        return RationalMap.of(FpPoly.x(p))

    @property
    def p(self) -> int:
        return self.num.p

    @property
    def degree(self) -> int:
        return int(max(self.num.degree, self.den.degree))

    @property
    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def __call__(self, value):
        """Evaluate at a point of F_p union {inf}."""
        p = self.p
        if value == INF:
            dn, dd = self.num.degree, self.den.degree
            if dn > dd:
                return INF
            if dn < dd:
                return 0
            return (
                self.num.leading_coefficient()
                * inv_mod(self.den.leading_coefficient(), p)
                % p
            )
        n, d = self.num(value), self.den(value)
        if d == 0:
            return INF
        return n * inv_mod(d, p) % p

    def compose(self, inner: "RationalMap") -> "RationalMap":
        """self o inner: t -> self(inner(t))."""
        p = self.p
        e = self.degree
        n2, d2 = inner.num, inner.den
        num = FpPoly.zero(p)
        den = FpPoly.zero(p)
        for i, c in enumerate(self.num.coeffs):
            num = num + n2 ** i * d2 ** (e - i) * c
        for i, c in enumerate(self.den.coeffs):
            den = den + n2 ** i * d2 ** (e - i) * c
        return RationalMap.of(num, den)

    def to_dict(self) -> dict:
        return {"num": str(self.num), "den": str(self.den)}

    def sort_key(self):
        return (self.degree, self.num.sort_key(), self.den.sort_key())


def mobius_from_matrix(p: int, a: int, b: int, c: int, d: int) -> RationalMap:
    if (a * d - b * c) % p == 0:
        raise DegenerateMapError("singular matrix")
    return RationalMap.of(FpPoly(p, (b, a)), FpPoly(p, (d, c)))


def _point_vec(p: int, value) -> Tuple[int, int]:
    # projective coordinates (u : v); value = u/v, inf = (1 : 0)
    return (1, 0) if value == INF else (value % p, 1)


def mobius_through(p: int, pairs) -> RationalMap:
    """The Moebius map sending source_i -> target_i for up to 3 pairs.

    Underdetermined maps are completed deterministically.
    """
    pairs = list(pairs)
    if len(pairs) > 3:
        raise ValueError("a Moebius map is determined by 3 points")
    sources = [s for s, _ in pairs]
    targets = [t for _, t in pairs]
    if len(set(sources)) != len(sources) or len(set(targets)) != len(targets):
        raise ValueError("sources and targets must be distinct")
    all_points = [INF] + list(range(p))
    for extra in all_points:
        if len(pairs) >= 3:
            break
        if extra not in sources:
            for image in all_points:
                if image not in targets:
                    pairs.append((extra, image))
                    sources.append(extra)
                    targets.append(image)
                    break
    m_src = _matrix_to_standard(p, [s for s, _ in pairs])
    m_tgt = _matrix_to_standard(p, [t for _, t in pairs])
    a, b, c, d = _mat_mul(p, _mat_inv(p, m_tgt), m_src)
    return mobius_from_matrix(p, a, b, c, d)


def _matrix_to_standard(p: int, pts):
    """Matrix sending (p1, p2, p3) -> ((0:1), (1:1), (1:0))."""
    (u1, v1), (u2, v2), (u3, v3) = (_point_vec(p, x) for x in pts)
    # solve alpha*(u1,v1) + beta*(u3,v3) = (u2,v2)
    det = (u1 * v3 - u3 * v1) % p
    if det == 0:
        raise ValueError("points are not distinct")
    inv = inv_mod(det, p)
    alpha = (u2 * v3 - u3 * v2) * inv % p
    beta = (u1 * v2 - u2 * v1) * inv % p
    # columns:  B = [beta*p3 | alpha*p1] maps (0,1,inf) -> (p1,p2,p3); invert it
    b11, b21 = beta * u3 % p, beta * v3 % p
    b12, b22 = alpha * u1 % p, alpha * v1 % p
    return _mat_inv(p, (b11, b12, b21, b22))


def _mat_inv(p: int, m):
    a, b, c, d = m
    det = (a * d - b * c) % p
    inv = inv_mod(det, p)
    return (d * inv % p, -b * inv % p, -c * inv % p, a * inv % p)


def _mat_mul(p: int, m1, m2):
    a1, b1, c1, d1 = m1
    a2, b2, c2, d2 = m2
    return (
        (a1 * a2 + b1 * c2) % p,
        (a1 * b2 + b1 * d2) % p,
        (c1 * a2 + d1 * c2) % p,
        (c1 * b2 + d1 * d2) % p,
    )


# -- surface combinators -------------------------------------------------


def base_change(s: WeierstrassSurface, pi: RationalMap) -> WeierstrassSurface:
    """Pull the surface back along t = pi(u) and minimalize."""
    if pi.p != s.p:
        raise ValueError("map and surface over different fields")
    p = s.p
    N, D = pi.num, pi.den
    da = int(s.A.degree) if not s.A.is_zero() else 0
    db = int(s.B.degree) if not s.B.is_zero() else 0
    m = max(-(-da // 4), -(-db // 6), 1)

    def pullback(poly: FpPoly, weight: int) -> FpPoly:
        out = FpPoly.zero(p)
        for i, c in enumerate(poly.coeffs):
            if c:
                out = out + N ** i * D ** (weight - i) * c
        return out

    A2 = pullback(s.A, 4 * m)
    B2 = pullback(s.B, 6 * m)
    A3, B3, _ = minimalize(A2, B2)
    return WeierstrassSurface(p, A3, B3)


def quadratic_twist(s: WeierstrassSurface, d: FpPoly) -> WeierstrassSurface:
    """Twist by squarefree d: (A, B) -> (d^2 A, d^3 B), minimalized."""
    if d.p != s.p:
        raise ValueError("twist polynomial over the wrong field")
    if d.is_zero():
        raise NonSquarefreeError("twist by zero")
    if d.degree > 0:
        der = d.derivative()
        if der.is_zero() or poly_gcd(d, der).degree > 0:
            raise NonSquarefreeError(f"{d} is not squarefree")
    A2, B2, _ = minimalize(s.A * d * d, s.B * d ** 3)
    return WeierstrassSurface(s.p, A2, B2)


def frobenius_pullback(s: WeierstrassSurface, q: int) -> WeierstrassSurface:
    """Purely inseparable base change t -> t^q, q a positive power of p."""
    if q < s.p:
        raise ValueError(f"{q} is not a positive power of {s.p}")
    qq = q
    while qq % s.p == 0:
        qq //= s.p
    if qq != 1:
        raise ValueError(f"{q} is not a power of {s.p}")
    return base_change(s, RationalMap.polynomial(FpPoly.monomial(s.p, q)))


# -- ramification ---------------------------------------------------------


@dataclass(frozen=True)
class RamificationProfile:
    p: int
    separable_degree: int
    insep_power: int
    branch: Tuple[Tuple[object, Tuple[int, ...]], ...]  # value -> indices, sorted

    @property
    def degree(self) -> int:
        return self.separable_degree * self.insep_power

    def branch_dict(self) -> Dict[object, Tuple[int, ...]]:
        return dict(self.branch)

    def indices_over(self, value) -> Tuple[int, ...]:
        for v, idx in self.branch:
            if v == value:
                return idx
        return ()

    def critical_values(self):
        return [v for v, _ in self.branch]

    @property
    def is_tame(self) -> bool:
        return all(all(i % self.p for i in idx) for _, idx in self.branch)

    def to_dict(self) -> dict:
        out = {str(v): list(idx) for v, idx in self.branch}
        out["insep"] = self.insep_power
        return out


def _branch_sort_key(value):
    return (1, 0) if value == INF else (0, value)


def make_profile(p, separable_degree, insep_power, branch_map) -> RamificationProfile:
    items = tuple(
        (v, tuple(sorted(idx, reverse=True)))
        for v, idx in sorted(branch_map.items(), key=lambda kv: _branch_sort_key(kv[0]))
    )
    return RamificationProfile(p, separable_degree, insep_power, items)


def _indices_over(pi: RationalMap, value) -> list:
    """Geometric multiset of ramification indices of pi over the given value."""
    N, D = pi.num, pi.den
    n = pi.degree
    if value == INF:
        poly = D
    else:
        poly = N - D.scale(value)
    out = []
    if not poly.is_zero() and poly.degree > 0:
        for w, mult in factor(poly):
            out.extend([mult] * int(w.degree))
    finite_total = 0 if poly.is_zero() else int(poly.degree)
    if finite_total < n:
        out.append(n - finite_total)  # the preimage at infinity
    return out


def separable_part(pi: RationalMap) -> Tuple[RationalMap, int]:
    """Split off the largest t^(p^d) precomposition: pi = sep o Frobenius^d."""
    p = pi.p
    q = 1
    N, D = pi.num, pi.den

    def is_pth_power_shape(f: FpPoly) -> bool:
        return all(c == 0 for i, c in enumerate(f.coeffs) if i % p)

    while is_pth_power_shape(N) and is_pth_power_shape(D) and max(N.degree, D.degree) > 1:
        N = FpPoly(p, N.coeffs[::p])
        D = FpPoly(p, D.coeffs[::p])
        q *= p
    return RationalMap.of(N, D), q


def ramification_profile(pi: RationalMap) -> RamificationProfile:
    if pi.degree < 1:
        raise DegenerateMapError("constant map")
    p = pi.p
    sep, q = separable_part(pi)
    N, D = sep.num, sep.den
    n = sep.degree
    branch = {}
    if n > 1:
        crit_values = set()
        W = N.derivative() * D - N * D.derivative()
        if not W.is_zero():
            for w, _mult in factor(W):
                if not (D % w).is_zero():
                    if w.degree == 1:
                        r = -w.constant_coefficient() % p
                        crit_values.add(sep(r))
                    else:
                        num_mod = N % w
                        den_mod = D % w
                        val = _constant_quotient(num_mod, den_mod, w)
                        if val is None:
                            raise IrrationalBranchingError(
                                f"critical points of {w} map outside P^1(F_{p})"
                            )
                        crit_values.add(val)
                else:
                    crit_values.add(INF)
        # infinity as a critical point
        v_inf = sep(INF)
        idx = _indices_over(sep, v_inf)
        if any(i > 1 for i in idx):
            crit_values.add(v_inf)
        for c in crit_values:
            indices = _indices_over(sep, c)
            if sum(indices) != n:
                raise AssertionError("index bookkeeping is broken")
            if any(i > 1 for i in indices):
                branch[c] = indices
    return make_profile(p, n, q, branch)


def _constant_quotient(num_mod: FpPoly, den_mod: FpPoly, w: FpPoly) -> Optional[int]:
    """N/D mod the irreducible w, if it is a constant of F_p (or INF)."""
    if den_mod.is_zero():
        return INF
    # invert den mod w via extended euclid through gcd computation
    inv = _inverse_mod_poly(den_mod, w)
    r = num_mod * inv % w
    if r.is_zero():
        return 0
    if r.is_constant():
        return r.constant_coefficient()
    return None


def _inverse_mod_poly(a: FpPoly, modulus: FpPoly) -> FpPoly:
    p = a.p
    r0, r1 = modulus, a % modulus
    s0, s1 = FpPoly.zero(p), FpPoly.one(p)
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
    if r0.degree != 0:
        raise ZeroPolynomialError("element not invertible modulo the place")
    return s0.scale(inv_mod(r0.constant_coefficient(), p)) % modulus


# -- configuration prediction ---------------------------------------------

UNRAMIFIED = "unramified"


@dataclass(frozen=True)
class PredictedConfiguration:
    p: int
    types: Tuple[str, ...]
    euler: int
    conductor_degree: int


def predict_configuration(
    config: Configuration,
    profile: RamificationProfile,
    alignment: Dict[Place, object],
) -> PredictedConfiguration:
    """Fibres of the base change, from branch data alone.

    alignment maps cusp places to critical values of the profile; cusps
    not mentioned (or mapped to UNRAMIFIED) sit away from every critical
    value.  All aligned cusps must be rational and the map tame.
    """
    if not profile.is_tame:
        raise WildRamificationError("profile has an index divisible by p")
    q = profile.insep_power
    n_sep = profile.separable_degree
    branch = profile.branch_dict()
    used = [v for v in alignment.values() if v != UNRAMIFIED]
    if len(set(used)) != len(used):
        raise ValueError("two cusps aligned to the same critical value")
    types = []
    euler = 0
    cond = 0

    def add(t: FibreType, copies: int = 1):
        nonlocal euler, cond
        inv = local_invariants(t)
        if inv.euler == 0:
            return
        for _ in range(copies):
            types.append(str(t))
        euler += copies * inv.euler
        cond += copies * inv.conductor_exponent

    for fa in config.fibres:
        value = alignment.get(fa.place, UNRAMIFIED)
        if value == UNRAMIFIED:
            add(base_change_type(fa.fibre, q), fa.place.degree * n_sep)
            continue
        if fa.place.degree != 1:
            raise ValueError("only rational cusps can sit at a critical value")
        if value not in branch:
            raise ValueError(f"{value} is not a critical value of the map")
        for r in branch[value]:
            add(base_change_type(fa.fibre, r * q))
    return PredictedConfiguration(config.p, tuple(sorted(types)), euler, cond)


def incidence_alignment(config: Configuration, profile: RamificationProfile):
    """The true alignment: cusp -> critical value when they coincide."""
    crit = set(profile.critical_values())
    alignment = {}
    for fa in config.fibres:
        if fa.place.is_infinity:
            if INF in crit:
                alignment[fa.place] = INF
        elif fa.place.degree == 1:
            value = -fa.place.poly.constant_coefficient() % config.p
            if value in crit:
                alignment[fa.place] = value
    return alignment


# -- searching for maps with a prescribed profile ---------------------------


@lru_cache(maxsize=None)
def monic_irreducibles(p: int, degree: int) -> Tuple[FpPoly, ...]:
    out = []
    for tail in itertools.product(range(p), repeat=degree):
        f = FpPoly(p, tail + (1,))
        if degree == 1 or is_irreducible(f):
            out.append(f)
    return tuple(out)


def _shape_partitions(points: int, max_degree: int):
    """Partitions of a number of geometric points into irreducible degrees."""
    if points == 0:
        yield ()
        return
    for first in range(min(points, max_degree), 0, -1):
        for rest in _shape_partitions(points - first, first):
            yield (first,) + rest


def _root_shapes(p: int, index_multiset: Tuple[int, ...]):
    """All factor collections matching the geometric index multiset at 0."""
    by_index: Dict[int, int] = {}
    for i in index_multiset:
        by_index[i] = by_index.get(i, 0) + 1
    groups = sorted(by_index.items())

    def build(gi: int, used):
        if gi == len(groups):
            yield ()
            return
        index, count = groups[gi]
        for degs in _shape_partitions(count, count):
            pools = {}
            for d in set(degs):
                pools[d] = [f for f in monic_irreducibles(p, d) if f not in used]
            for combo in _combos_by_degree(degs, pools):
                new_used = used | set(combo)
                for rest in build(gi + 1, new_used):
                    yield tuple((f, index) for f in combo) + rest

    yield from build(0, frozenset())


def _combos_by_degree(degs: Tuple[int, ...], pools):
    by_deg: Dict[int, int] = {}
    for d in degs:
        by_deg[d] = by_deg.get(d, 0) + 1
    items = sorted(by_deg.items())

    def rec(i):
        if i == len(items):
            yield ()
            return
        d, k = items[i]
        for chosen in itertools.combinations(pools[d], k):
            for rest in rec(i + 1):
                yield chosen + rest

    yield from rec(0)


DEFAULT_SEARCH_DEGREE_BOUND = 8


def find_base_change(
    p: int,
    degree: int,
    profile: Dict[object, Iterable[int]],
    degree_bound: int = DEFAULT_SEARCH_DEGREE_BOUND,
) -> Optional[RationalMap]:
    """Exhaustive search for a monic polynomial map with the given branch data.

    The profile keys must lie in {0, 1, INF} with INF totally ramified;
    the returned witness is the one with the least coefficient sequence.
    """
    if degree > degree_bound:
        raise ValueError(f"degree {degree} exceeds the bound {degree_bound}")
    target = {v: tuple(sorted(idx, reverse=True)) for v, idx in profile.items()}
    if not set(target) <= {0, 1, INF}:
        raise ValueError("profile values must be normalized to {0, 1, inf}")
    if not 2 <= len(target) <= 3:
        raise ValueError("profile must have 2 or 3 critical values")
    if target.get(INF) != (degree,):
        raise ValueError("search requires total ramification at infinity")
    for idx in target.values():
        if sum(idx) != degree:
            raise ValueError("indices over each value must sum to the degree")
    zero_profile = target.get(0, (1,) * degree)
    want = make_profile(p, degree, 1, {v: i for v, i in target.items() if any(j > 1 for j in i)})
    best = None
    for shape in _root_shapes(p, zero_profile):
        n = FpPoly.one(p)
        for f, mult in shape:
            n = n * f ** mult
        if n.degree != degree:
            continue
        cand = RationalMap.polynomial(n)
        try:
            got = ramification_profile(cand)
        except IrrationalBranchingError:
            continue
        if got == want:
            key = cand.num.coeffs
            if best is None or key < best.num.coeffs:
                best = cand
    return best
