"""Catalog of group identities used as cell stabilizers and coefficient keys.

Stabilizers are tracked up to isomorphism by a small closed catalog: the
finite groups that occur as parabolic subgroups of rank-4 simplex reflection
groups, the four infinite virtually cyclic shapes (Z, Dinf and their products
with a central involution), products with Z and with Dinf, two-vertex
amalgams, and the square crystallographic group P4m.  Dihedral groups follow
the geometric convention: D(n) has order 2n, so D(2) is the Klein four-group.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import MalformedInputError

_FINITE_KINDS = {"trivial", "c2", "dihedral", "dihedral_x_c2", "s4", "c2_x_s4", "opaque"}


@dataclass(frozen=True)
class GroupId:
    kind: str
    n: int = 0
    base: "GroupId | None" = None
    parts: "tuple[GroupId, ...]" = field(default_factory=tuple)
    tag: str = ""

    @property
    def is_finite(self) -> bool:
        return self.kind in _FINITE_KINDS

    def order(self) -> int | None:
        """Group order for finite catalog members, None when unknown/infinite."""
        return {
            "trivial": 1,
            "c2": 2,
            "dihedral": 2 * self.n,
            "dihedral_x_c2": 4 * self.n,
            "s4": 24,
            "c2_x_s4": 48,
        }.get(self.kind)

    def label(self) -> str:
        if self.kind == "trivial":
            return "1"
        if self.kind == "c2":
            return "C2"
        if self.kind == "dihedral":
            return f"D{self.n}"
        if self.kind == "dihedral_x_c2":
            return f"D{self.n}xC2"
        if self.kind == "s4":
            return "S4"
        if self.kind == "c2_x_s4":
            return "C2xS4"
        if self.kind == "z":
            return "Z"
        if self.kind == "dinf":
            return "Dinf"
        if self.kind == "p4m":
            return "P4m"
        if self.kind == "prod_z":
            return "ZxC2" if self.base == C2 else f"{self.base.label()}xZ"
        if self.kind == "prod_dinf":
            return "DinfxC2" if self.base == C2 else f"{self.base.label()}xDinf"
        if self.kind == "amalgam":
            v0, e, v1 = self.parts
            return f"Am[{v0.label()};{e.label()};{v1.label()}]"
        if self.kind == "affine":
            return f"Affine[{self.tag}]"
        if self.kind == "opaque":
            return f"Opaque[{self.tag}]"
        raise ValueError(f"unlabelable kind {self.kind!r}")

    def __str__(self) -> str:
        return self.label()


TRIVIAL = GroupId("trivial")
C2 = GroupId("c2")
S4 = GroupId("s4")
C2_X_S4 = GroupId("c2_x_s4")
Z = GroupId("z")
DINF = GroupId("dinf")
P4M = GroupId("p4m")


def dihedral(n: int) -> GroupId:
    if n < 2:
        raise MalformedInputError(f"dihedral index must be >= 2, got {n}")
    return GroupId("dihedral", n=n)


def dihedral_x_c2(n: int) -> GroupId:
    if n < 2:
        raise MalformedInputError(f"dihedral index must be >= 2, got {n}")
    return GroupId("dihedral_x_c2", n=n)


def prod_z(base: GroupId) -> GroupId:
    return GroupId("prod_z", base=base)


def prod_dinf(base: GroupId) -> GroupId:
    return GroupId("prod_dinf", base=base)


def amalgam(v0: GroupId, edge: GroupId, v1: GroupId) -> GroupId:
    return GroupId("amalgam", parts=(v0, edge, v1))


def affine(signature: str) -> GroupId:
    return GroupId("affine", tag=signature)


def opaque(fingerprint: str) -> GroupId:
    return GroupId("opaque", tag=fingerprint)


Z_X_C2 = prod_z(C2)
DINF_X_C2 = prod_dinf(C2)

_ATOMS = {
    "1": TRIVIAL,
    "C2": C2,
    "S4": S4,
    "C2xS4": C2_X_S4,
    "Z": Z,
    "Dinf": DINF,
    "P4m": P4M,
    "ZxC2": Z_X_C2,
    "C2xZ": Z_X_C2,
    "DinfxC2": DINF_X_C2,
    "C2xDinf": DINF_X_C2,
}


def parse_label(text: str) -> GroupId:
    """Inverse of GroupId.label for every label this package emits.

    A few aliases are accepted for readability of hand-written data files:
    "C2xZ" for "ZxC2", "C2xDn" for "DnxC2".
    """
    text = text.strip()
    if text in _ATOMS:
        return _ATOMS[text]
    m = re.fullmatch(r"D(\d+)", text)
    if m:
        return dihedral(int(m.group(1)))
    m = re.fullmatch(r"D(\d+)xC2", text) or re.fullmatch(r"C2xD(\d+)", text)
    if m:
        return dihedral_x_c2(int(m.group(1)))
    m = re.fullmatch(r"(.+)xZ", text)
    if m:
        return prod_z(parse_label(m.group(1)))
    m = re.fullmatch(r"(.+)xDinf", text)
    if m:
        return prod_dinf(parse_label(m.group(1)))
    m = re.fullmatch(r"Am\[(.+);(.+);(.+)\]", text)
    if m:
        return amalgam(*(parse_label(part) for part in m.groups()))
    m = re.fullmatch(r"Affine\[(.*)\]", text)
    if m:
        return affine(m.group(1))
    m = re.fullmatch(r"Opaque\[(.*)\]", text)
    if m:
        return opaque(m.group(1))
    raise MalformedInputError(f"unknown group label {text!r}")


# ---------------------------------------------------------------------------
# Fingerprints of the finite catalog members.
#
# A fingerprint is (order, element-order multiset, center size, abelian flag);
# it separates every pair of groups in the catalog.  D(2k) and D(k) x C2 are
# isomorphic for odd k, so those collisions map to the plain dihedral label.


def _dihedral_order_multiset(n: int) -> tuple[tuple[int, int], ...]:
    counts: dict[int, int] = {1: 1}
    for k in range(1, n):  # rotations
        o = n // math.gcd(n, k)
        counts[o] = counts.get(o, 0) + 1
    counts[2] = counts.get(2, 0) + n  # reflections
    return tuple(sorted(counts.items()))


def _dihedral_center(n: int) -> int:
    if n == 2:
        return 4  # Klein four-group is abelian
    return 2 if n % 2 == 0 else 1


def _times_c2(ms: tuple[tuple[int, int], ...]) -> tuple[tuple[int, int], ...]:
    counts: dict[int, int] = {}
    for o, c in ms:
        counts[o] = counts.get(o, 0) + c
        oo = o if o % 2 == 0 else 2 * o
        counts[oo] = counts.get(oo, 0) + c
    return tuple(sorted(counts.items()))


def _build_fingerprint_catalog() -> dict[tuple, GroupId]:
    s4_ms = tuple(sorted({1: 1, 2: 9, 3: 8, 4: 6}.items()))
    cat: dict[tuple, GroupId] = {
        (1, ((1, 1),), 1, True): TRIVIAL,
        (2, ((1, 1), (2, 1)), 2, True): C2,
        (24, s4_ms, 1, False): S4,
        (48, _times_c2(s4_ms), 2, False): C2_X_S4,
    }
    # Plain dihedrals first: D(k) x C2 ~= D(2k) for odd k, and the dihedral
    # name is the preferred label for those fingerprints.
    for n in range(2, 7):
        fp = (2 * n, _dihedral_order_multiset(n), _dihedral_center(n), n == 2)
        cat.setdefault(fp, dihedral(n))
    for n in range(2, 7):
        fp2 = (4 * n, _times_c2(_dihedral_order_multiset(n)), 2 * _dihedral_center(n), n == 2)
        cat.setdefault(fp2, dihedral_x_c2(n))
    return cat


FINGERPRINT_CATALOG = _build_fingerprint_catalog()


def fingerprint_lookup(fp: tuple) -> GroupId:
    """Catalog match for a fingerprint, or an Opaque id carrying it verbatim."""
    hit = FINGERPRINT_CATALOG.get(fp)
    if hit is not None:
        return hit
    order, orders, center, abelian = fp
    orders_txt = ",".join(f"{o}^{c}" for o, c in orders)
    return opaque(f"order={order};orders={orders_txt};center={center};abelian={abelian}")


# ---------------------------------------------------------------------------
# Subgroup-label compatibility, at catalog scope.


def may_embed(h: GroupId, g: GroupId) -> bool:
    """Whether a subgroup isomorphic to `h` can sit inside `g`.

    Sound for the catalog members this package produces; conservative
    (returns False) outside it.  Used to sanity-check cell inventories, not
    to decide mathematics.
    """
    if h == TRIVIAL or h == g:
        return True
    if h.kind == "c2":
        return g != Z and g.kind not in ("trivial", "opaque", "affine")
    if not h.is_finite:
        return _may_embed_infinite(h, g)
    if g.is_finite:
        return _may_embed_finite_finite(h, g)
    return _may_embed_finite_infinite(h, g)


def _max_finite_of(g: GroupId) -> list[GroupId]:
    """Maximal finite subgroups of the infinite catalog shapes."""
    if g.kind == "z":
        return [TRIVIAL]
    if g.kind == "dinf":
        return [C2]
    if g.kind == "prod_z":
        return [g.base]
    if g.kind == "prod_dinf":
        if g.base == C2:
            return [dihedral(2)]
        if g.base.kind == "dihedral":
            return [dihedral_x_c2(g.base.n)]
        return [g.base]
    if g.kind == "amalgam":
        return [g.parts[0], g.parts[2]]
    if g.kind == "p4m":
        return [dihedral(4)]
    return []


def _may_embed_finite_finite(h: GroupId, g: GroupId) -> bool:
    if h.order() and g.order() and g.order() % h.order() != 0:
        return False
    if g.kind == "dihedral":
        if h.kind == "dihedral":
            return g.n % h.n == 0
        if h.kind == "dihedral_x_c2":
            return g.n % (2 * h.n) == 0 and h.n % 2 == 1
        return False
    if g.kind == "dihedral_x_c2":
        if h.kind == "dihedral":
            return g.n % h.n == 0 or (h.n == 2 * g.n and g.n % 2 == 1)
        if h.kind == "dihedral_x_c2":
            return g.n % h.n == 0
        return False
    if g.kind == "s4":
        return h.kind == "dihedral" and h.n in (2, 3, 4)
    if g.kind == "c2_x_s4":
        if h.kind in ("s4",):
            return True
        if h.kind == "dihedral":
            return h.n in (2, 3, 4, 6)
        if h.kind == "dihedral_x_c2":
            return h.n in (2, 3, 4)
        return False
    return False


def _may_embed_finite_infinite(h: GroupId, g: GroupId) -> bool:
    return any(may_embed(h, m) for m in _max_finite_of(g))


def _may_embed_infinite(h: GroupId, g: GroupId) -> bool:
    if g.is_finite:
        return False
    if h.kind == "z":
        return g.kind in ("z", "dinf", "prod_z", "prod_dinf", "amalgam", "p4m")
    if h.kind == "dinf":
        return g.kind in ("dinf", "prod_dinf", "amalgam", "p4m")
    if h == Z_X_C2:
        return g.kind in ("prod_z", "prod_dinf", "amalgam", "p4m")
    if h == DINF_X_C2:
        return g.kind in ("prod_dinf", "amalgam", "p4m")
    return False
