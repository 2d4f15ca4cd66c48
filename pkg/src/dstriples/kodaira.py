"""Kodaira fibre types and their behaviour under tame base change and twist.

Types are immutable tags.  I_0 and I_0^* are represented as the n = 0
members of the I / I^* series, so every starred-or-not multiplicative
family is uniform.  All rules here assume residue characteristic > 3
(no wild ramification: the conductor exponent is 0, 1 or 2).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass


class NonMinimalError(ValueError):
    """Valuations (>=4, >=6) admit a smaller Weierstrass model."""


class InconsistentValuationsError(ValueError):
    """The valuation triple matches no row of the classification table."""


_KINDS = ("I", "I*", "II", "III", "IV", "I0*", "IV*", "III*", "II*")


@dataclass(frozen=True)
class FibreType:
    kind: str  # "I" or "I*" (indexed) or one of "II", "III", "IV", "IV*", "III*", "II*"
    n: int = 0

    def __post_init__(self):
        if self.kind in ("I", "I*"):
            if self.n < 0:
                raise ValueError("fibre index must be >= 0")
        elif self.kind in ("II", "III", "IV", "IV*", "III*", "II*"):
            if self.n != 0:
                raise ValueError(f"type {self.kind} carries no index")
        else:
            raise ValueError(f"unknown fibre kind {self.kind!r}")

    @property
    def is_multiplicative(self) -> bool:
        return self.kind == "I" and self.n > 0

    @property
    def is_smooth(self) -> bool:
        return self.kind == "I" and self.n == 0

    @property
    def is_additive(self) -> bool:
        return not (self.kind == "I")

    @property
    def is_starred(self) -> bool:
        return self.kind.endswith("*")

    def __str__(self):
        if self.kind == "I":
            return f"I{self.n}"
        if self.kind == "I*":
            return f"I{self.n}*"
        return self.kind

    def sort_key(self):
        return (_KINDS.index(self.kind), self.n)


def I(n: int) -> FibreType:
    return FibreType("I", n)


def ISTAR(n: int) -> FibreType:
    return FibreType("I*", n)


I0 = I(0)
I0STAR = ISTAR(0)
II = FibreType("II")
III = FibreType("III")
IV = FibreType("IV")
IVSTAR = FibreType("IV*")
IIISTAR = FibreType("III*")
IISTAR = FibreType("II*")

ALL_BASE_TYPES = (I0, I(1), II, III, IV, I0STAR, ISTAR(1), IVSTAR, IIISTAR, IISTAR)

_TYPE_RE = re.compile(r"^I(\d+)(\*?)$")


def parse_fibre_type(text: str) -> FibreType:
    text = text.strip()
    if text in ("II", "III", "IV", "IV*", "III*", "II*"):
        return FibreType(text)
    m = _TYPE_RE.match(text)
    if not m:
        raise ValueError(f"unrecognized fibre type {text!r}")
    n = int(m.group(1))
    return ISTAR(n) if m.group(2) else I(n)


@dataclass(frozen=True)
class LocalInvariants:
    euler: int
    components: int
    conductor_exponent: int


def local_invariants(t: FibreType) -> LocalInvariants:
    if t.kind == "I":
        if t.n == 0:
            return LocalInvariants(0, 1, 0)
        return LocalInvariants(t.n, t.n, 1)
    if t.kind == "I*":
        return LocalInvariants(t.n + 6, t.n + 5, 2)
    euler = {"II": 2, "III": 3, "IV": 4, "IV*": 8, "III*": 9, "II*": 10}[t.kind]
    return LocalInvariants(euler, euler - 1, 2)


def classify_local(va, vb, vdelta: int) -> FibreType:
    """Kodaira type from valuations of (A, B, Delta), characteristic > 3.

    va and vb may be math.inf when the corresponding coefficient vanishes
    identically.  Raises NonMinimalError for (>=4, >=6) and
    InconsistentValuationsError when the triple matches no table row.
    """
    if va >= 4 and vb >= 6:
        raise NonMinimalError(f"valuations ({va}, {vb}, {vdelta}) are not minimal")
    if vdelta == 0:
        return I0
    if va == 0:
        return I(vdelta)
    if va >= 1 and vb == 1 and vdelta == 2:
        return II
    if va == 1 and vb >= 2 and vdelta == 3:
        return III
    if va >= 2 and vb == 2 and vdelta == 4:
        return IV
    if va >= 2 and vb >= 3 and vdelta == 6:
        return I0STAR
    if va == 2 and vb == 3 and vdelta >= 7:
        return ISTAR(vdelta - 6)
    if va >= 3 and vb == 4 and vdelta == 8:
        return IVSTAR
    if va == 3 and vb >= 5 and vdelta == 9:
        return IIISTAR
    if va >= 4 and vb == 5 and vdelta == 10:
        return IISTAR
    raise InconsistentValuationsError(f"no Kodaira type for ({va}, {vb}, {vdelta})")


# Additive types under a tame base change of local ramification index r.
_II_ORBIT = {0: I0, 1: II, 2: IV, 3: I0STAR, 4: IVSTAR, 5: IISTAR}
_III_ORBIT = {0: I0, 1: III, 2: I0STAR, 3: IIISTAR}

# Each additive type is a point on the II- or III-orbit; base changes
# compose multiplicatively on the orbit position.
_ORBIT_POSITION = {
    "II": (_II_ORBIT, 1),
    "IV": (_II_ORBIT, 2),
    "IV*": (_II_ORBIT, 4),
    "II*": (_II_ORBIT, 5),
    "III": (_III_ORBIT, 1),
    "III*": (_III_ORBIT, 3),
}


def base_change_type(t: FibreType, r: int) -> FibreType:
    """Fibre type after a base change with local ramification index r (tame)."""
    if r < 1:
        raise ValueError("ramification index must be >= 1")
    if t.kind == "I":
        return I(t.n * r)
    if t.kind == "I*":
        return ISTAR(t.n * r) if r % 2 else I(t.n * r)
    orbit, pos = _ORBIT_POSITION[t.kind]
    return orbit[(pos * r) % (6 if orbit is _II_ORBIT else 4)]


_TWIST = {
    "I": "I*",
    "I*": "I",
    "II": "IV*",
    "IV*": "II",
    "III": "III*",
    "III*": "III",
    "IV": "II*",
    "II*": "IV",
}


def twist_type(t: FibreType) -> FibreType:
    """Quadratic-twist involution on fibre types at a ramified place."""
    return FibreType(_TWIST[t.kind], t.n)


def infer_infinity_valuations(deg_a, deg_b, k: int):
    """Valuations at infinity of the weight-k homogenized model.

    deg_a/deg_b may be NEG_INF for a vanishing coefficient; the result then
    uses math.inf for that slot.
    """
    va = math.inf if deg_a == float("-inf") else 4 * k - deg_a
    vb = math.inf if deg_b == float("-inf") else 6 * k - deg_b
    return va, vb
