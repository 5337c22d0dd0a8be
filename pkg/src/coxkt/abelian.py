"""Normal forms for the countable abelian groups that occur as K-groups.

Every group handled here is a direct sum of
  - a free part Z^r,
  - a finite torsion part, stored as an invariant-factor chain
    f1 | f2 | ... | fk (the shape results are usually quoted in:
    "Z/4 + Z/4" rather than "Z/2 + Z/8"), and
  - countably-infinite repetitions of prime-power cyclic groups, stored as
    the set of orders with an omega flag (so "sum of infinitely many Z/2"
    is omega = {2}).

Two values are equal iff their three components are equal, which makes the
normal form canonical and comparisons with published K-group tables exact.

>>> normalize([("cyclic", 2), ("cyclic", 3)]).invariant_factors
(6,)
>>> direct_sum(cyclic(4), cyclic(4)).invariant_factors
(4, 4)
>>> direct_sum(omega(2), cyclic(2)) == omega(2)
True
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MalformedInputError
from .groups import GroupId, parse_label


def _factorint(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _is_prime_power(n: int) -> bool:
    return n >= 2 and len(_factorint(n)) == 1


def _invariant_factors_from_primary(primary: dict[int, list[int]]) -> tuple[int, ...]:
    """Merge prime-power parts {p: [exponents]} into a divisor chain (CRT)."""
    cols = max((len(es) for es in primary.values()), default=0)
    factors = []
    for i in range(cols):
        f = 1
        for p, es in primary.items():
            es_desc = sorted(es, reverse=True)
            if i < len(es_desc):
                f *= p ** es_desc[i]
        factors.append(f)
    return tuple(reversed(factors))


@dataclass(frozen=True)
class AbGroup:
    """Canonical form of a countable abelian group (see module docstring)."""

    free_rank: int = 0
    invariant_factors: tuple[int, ...] = ()
    omega: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.free_rank < 0:
            raise MalformedInputError("free rank must be nonnegative")
        prev = 1
        for f in self.invariant_factors:
            if f < 2 or f % prev != 0:
                raise MalformedInputError(
                    f"invariant factors must be a divisor chain of integers >= 2, "
                    f"got {self.invariant_factors}"
                )
            prev = f
        for d in self.omega:
            if not _is_prime_power(d):
                raise MalformedInputError(f"omega order {d} is not a prime power")

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.invariant_factors and not self.omega

    def is_finite(self) -> bool:
        return self.free_rank == 0 and not self.omega

    def exponent_two_omega(self) -> bool:
        """True for a nonzero group that is a countable F2-vector space."""
        return (
            self.free_rank == 0
            and self.omega == frozenset({2})
            and all(f == 2 for f in self.invariant_factors)
        )

    def describe(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{f}" for f in self.invariant_factors)
        parts.extend(f"(Z/{d})^oo" for d in sorted(self.omega))
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return self.describe()

    def to_json(self) -> dict:
        return {
            "free_rank": self.free_rank,
            "invariant_factors": list(self.invariant_factors),
            "omega": sorted(self.omega),
        }

    @classmethod
    def from_json(cls, data: dict) -> "AbGroup":
        return cls(
            free_rank=int(data.get("free_rank", 0)),
            invariant_factors=tuple(int(f) for f in data.get("invariant_factors", ())),
            omega=frozenset(int(d) for d in data.get("omega", ())),
        )


ZERO = AbGroup()
FREE_Z = AbGroup(free_rank=1)


def free(rank: int) -> AbGroup:
    return AbGroup(free_rank=rank)


def cyclic(d: int) -> AbGroup:
    if d < 2:
        raise MalformedInputError(f"cyclic order must be >= 2, got Z/{d}")
    return normalize([("cyclic", d)])


def omega(d: int) -> AbGroup:
    return AbGroup(omega=frozenset({d}))


Descriptor = object  # "Z" | int | ("cyclic", d) | ("omega", d)


def normalize(raw: list) -> AbGroup:
    """Canonical AbGroup from a list of summand descriptors.

    Descriptors: "Z" for a free summand, d or ("cyclic", d) for Z/d with
    d >= 2, ("omega", d) for infinitely many copies of Z/d (d a prime power).
    Finite prime-power summands whose order carries an omega flag are
    absorbed into it.
    """
    free_rank = 0
    primary: dict[int, list[int]] = {}
    omega_orders: set[int] = set()
    for item in raw:
        if item == "Z":
            free_rank += 1
            continue
        if isinstance(item, int):
            item = ("cyclic", item)
        if not (isinstance(item, tuple) and len(item) == 2):
            raise MalformedInputError(f"bad summand descriptor {item!r}")
        tag, d = item
        if tag == "cyclic":
            if not isinstance(d, int) or d < 2:
                raise MalformedInputError(f"bad cyclic order Z/{d}")
            for p, e in _factorint(d).items():
                primary.setdefault(p, []).append(e)
        elif tag == "omega":
            if not isinstance(d, int) or not _is_prime_power(d):
                raise MalformedInputError(f"omega order must be a prime power, got {d}")
            omega_orders.add(d)
        else:
            raise MalformedInputError(f"bad summand descriptor {item!r}")
    # absorb finite prime-power summands that already repeat infinitely often
    for p, es in list(primary.items()):
        kept = [e for e in es if p**e not in omega_orders]
        if kept:
            primary[p] = kept
        else:
            del primary[p]
    return AbGroup(
        free_rank=free_rank,
        invariant_factors=_invariant_factors_from_primary(primary),
        omega=frozenset(omega_orders),
    )


def _descriptors(g: AbGroup) -> list:
    out: list = ["Z"] * g.free_rank
    out.extend(("cyclic", f) for f in g.invariant_factors)
    out.extend(("omega", d) for d in g.omega)
    return out


def direct_sum(*groups: AbGroup) -> AbGroup:
    items: list = []
    for g in groups:
        items.extend(_descriptors(g))
    return normalize(items)


def from_diagonal(diag: list[int], ambient_rank: int) -> AbGroup:
    """Cokernel of an integer map into Z^ambient_rank with the given
    elementary divisors: Z/d for each diagonal entry d >= 2, plus one free
    summand per ambient coordinate not hit by a nonzero entry."""
    if len(diag) > ambient_rank:
        raise MalformedInputError("diagonal longer than ambient rank")
    if any(d < 0 for d in diag):
        raise MalformedInputError("diagonal entries must be nonnegative")
    nonzero = [d for d in diag if d != 0]
    items: list = [("cyclic", d) for d in nonzero if d >= 2]
    items.extend(["Z"] * (ambient_rank - len(nonzero)))
    return normalize(items)


# ---------------------------------------------------------------------------
# Symbolic K-expressions.


@dataclass(frozen=True)
class KSymbol:
    """One unresolved summand in a K-group expression.

    kinds:
      bass_nil      NK_i(Z[G])                       (i, group)
      wald_nil      NK_i(Z[G]; two bimodules)        (i, group, tag)
      whq           Wh_q(G)  [Wh / K0~ / K_q]        (i=q, group)
      nk_ff         NK_i(F_q[G])                     (i, group, field_order)
      quot          image of a known surjection, used internally by the
                    derivation engine so a multi-step argument stays a
                    single rewrite chain               (inner, origin in tag)
    """

    kind: str
    i: int = 0
    group: GroupId | None = None
    tag: str = ""
    field_order: int = 0
    inner: "KExpr | None" = None

    def describe(self) -> str:
        if self.kind == "bass_nil":
            return f"NK_{self.i}(Z[{self.group}])"
        if self.kind == "wald_nil":
            return f"NK_{self.i}(Z[{self.group}]; {self.tag}1, {self.tag}2)"
        if self.kind == "whq":
            name = {1: "Wh", 0: "K0~"}.get(self.i, f"K_{self.i}")
            return f"{name}({self.group})"
        if self.kind == "nk_ff":
            return f"NK_{self.i}(F{self.field_order}[{self.group}])"
        if self.kind == "quot":
            return f"quot[{self.inner.describe()} ->> {self.tag}]"
        raise ValueError(f"bad symbol kind {self.kind!r}")

    def __str__(self) -> str:
        return self.describe()

    def to_json(self) -> dict:
        if self.kind == "quot":
            raise MalformedInputError("internal quot symbols are not serializable")
        out: dict = {"kind": self.kind, "i": self.i, "group": self.group.label()}
        if self.kind == "wald_nil":
            out["tag"] = self.tag
        if self.kind == "nk_ff":
            out["field_order"] = self.field_order
        return out

    @classmethod
    def from_json(cls, data: dict) -> "KSymbol":
        return cls(
            kind=data["kind"],
            i=int(data["i"]),
            group=parse_label(data["group"]),
            tag=data.get("tag", ""),
            field_order=int(data.get("field_order", 0)),
        )


def bass_nil(i: int, group: GroupId) -> KSymbol:
    return KSymbol("bass_nil", i=i, group=group)


def wald_nil(i: int, group: GroupId, tag: str) -> KSymbol:
    return KSymbol("wald_nil", i=i, group=group, tag=tag)


def whq(q: int, group: GroupId) -> KSymbol:
    return KSymbol("whq", i=q, group=group)


def nk_ff(i: int, field_order: int, group: GroupId) -> KSymbol:
    return KSymbol("nk_ff", i=i, group=group, field_order=field_order)


def _symbol_sort_key(s: KSymbol):
    return (s.kind, s.i, s.group.label() if s.group else "", s.tag, s.field_order,
            s.inner.describe() if s.inner else "")


@dataclass(frozen=True)
class KExpr:
    """Formal direct sum of a resolved AbGroup and unresolved symbols."""

    resolved: AbGroup = ZERO
    symbols: tuple[KSymbol, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(sorted(self.symbols, key=_symbol_sort_key)))

    @classmethod
    def of(cls, *parts) -> "KExpr":
        resolved = []
        symbols = []
        for p in parts:
            if isinstance(p, AbGroup):
                resolved.append(p)
            elif isinstance(p, KSymbol):
                symbols.append(p)
            elif isinstance(p, KExpr):
                resolved.append(p.resolved)
                symbols.extend(p.symbols)
            else:
                raise MalformedInputError(f"bad K-expression part {p!r}")
        return cls(direct_sum(*resolved) if resolved else ZERO, tuple(symbols))

    @property
    def is_resolved(self) -> bool:
        return not self.symbols

    def is_zero(self) -> bool:
        return self.is_resolved and self.resolved.is_zero()

    def plus(self, other: "KExpr") -> "KExpr":
        return KExpr.of(self, other)

    def replace_symbol(self, old: KSymbol, new: "KExpr") -> "KExpr":
        syms = list(self.symbols)
        syms.remove(old)
        return KExpr.of(self.resolved, new, *syms)

    def describe(self) -> str:
        parts = []
        if not self.resolved.is_zero():
            parts.append(self.resolved.describe())
        parts.extend(s.describe() for s in self.symbols)
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return self.describe()

    def to_json(self) -> dict:
        out = self.resolved.to_json()
        if self.symbols:
            out["symbols"] = [s.to_json() for s in self.symbols]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "KExpr":
        return cls(
            AbGroup.from_json(data),
            tuple(KSymbol.from_json(s) for s in data.get("symbols", ())),
        )


KZERO = KExpr()
