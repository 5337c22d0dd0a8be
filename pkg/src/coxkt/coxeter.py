"""Coxeter diagram combinatorics and concrete rank-3 reflection groups.

A rank-n diagram is stored as its Coxeter matrix (m_ii = 1, m_ij >= 2 off
the diagonal, 0 standing for an infinite label).  Rank-3 subdiagrams with
labels (p, q, r) are classified by the reciprocal sum 1/p + 1/q + 1/r:
above 1 the group is finite of order 4 / (sum - 1); exactly 1 it is a
plane crystallographic group; below 1 it is indefinite.  Finite vertex
groups are realized as explicit orthogonal 3x3 reflection groups so that
element-level questions (fingerprints, direction stabilizers) can be
answered by enumeration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import groups
from .errors import DiagramError, NotHyperbolicSimplexError, RealizationError
from .groups import GroupId, may_embed

EPS = 1e-9          # arithmetic tolerance for orthogonal-matrix checks
DEDUP_GRID = 1e-6   # rounding grid for element deduplication
ORDER_CAP = 240     # twice the largest finite rank-3 Coxeter group (H3, 120)
INFINITE = 0        # matrix entry standing for an infinite bond label


@dataclass(frozen=True)
class CoxeterDiagram:
    rank: int
    m: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.rank != len(self.m) or any(len(row) != self.rank for row in self.m):
            raise DiagramError("Coxeter matrix shape does not match rank")
        for i in range(self.rank):
            if self.m[i][i] != 1:
                raise DiagramError(f"diagonal entry m[{i + 1}][{i + 1}] must be 1")
            for j in range(self.rank):
                if self.m[i][j] != self.m[j][i]:
                    raise DiagramError(f"matrix not symmetric at ({i + 1},{j + 1})")
                if i != j and self.m[i][j] != INFINITE and self.m[i][j] < 2:
                    raise DiagramError(
                        f"off-diagonal label m[{i + 1}][{j + 1}] = {self.m[i][j]} is < 2"
                    )

    def label(self, i: int, j: int) -> int:
        return self.m[i][j]

    def generator_names(self) -> list[str]:
        return [f"P{i + 1}" for i in range(self.rank)]

    def describe(self) -> str:
        # linear diagrams get the compact bracket form
        if self._is_linear():
            labels = [str(self.m[i][i + 1]) for i in range(self.rank - 1)]
            return "[" + ",".join(labels) + "]"
        return json.dumps({"rank": self.rank, "m": [list(r) for r in self.m]})

    def _is_linear(self) -> bool:
        for i in range(self.rank):
            for j in range(i + 1, self.rank):
                if j - i > 1 and self.m[i][j] != 2:
                    return False
        return True

    def to_json(self) -> dict:
        return {"rank": self.rank, "m": [list(r) for r in self.m]}


def parse_diagram(text: str) -> CoxeterDiagram:
    """Accepts the linear shorthand "[3,4,4]" (consecutive bonds labelled,
    everything else 2) or a JSON Coxeter matrix {"rank":n,"m":[[...]]}."""
    text = text.strip()
    if text.startswith("["):
        body = text[1:-1] if text.endswith("]") else None
        if body is None:
            raise DiagramError("unterminated '[' in linear diagram")
        try:
            labels = [int(tok) for tok in body.split(",")] if body else []
        except ValueError as exc:
            raise DiagramError(f"bad label in linear diagram: {exc}") from exc
        if any(lab != INFINITE and lab < 2 for lab in labels):
            bad = next(lab for lab in labels if lab != INFINITE and lab < 2)
            raise DiagramError(f"linear diagram label {bad} is < 2")
        n = len(labels) + 1
        m = [[2] * n for _ in range(n)]
        for i in range(n):
            m[i][i] = 1
        for i, lab in enumerate(labels):
            m[i][i + 1] = m[i + 1][i] = lab
        return CoxeterDiagram(n, tuple(tuple(row) for row in m))
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DiagramError(f"bad diagram JSON: {exc}") from exc
        return diagram_from_json(data)
    raise DiagramError("diagram must be '[m1,...]' shorthand or a JSON matrix")


def diagram_from_json(data: dict) -> CoxeterDiagram:
    if "rank" not in data or "m" not in data:
        raise DiagramError("diagram JSON needs 'rank' and 'm'")
    raw = data["m"]
    m = []
    for row in raw:
        current = []
        for x in row:
            if x in ("inf", "oo", None):
                current.append(INFINITE)
            else:
                current.append(int(x))
        m.append(tuple(current))
    return CoxeterDiagram(int(data["rank"]), tuple(m))


@dataclass(frozen=True)
class SubdiagramType:
    tag: str  # "finite" | "affine" | "indefinite"
    group: GroupId | None = None
    order: int | None = None

    @property
    def is_finite(self) -> bool:
        return self.tag == "finite"

    @property
    def is_affine(self) -> bool:
        return self.tag == "affine"


def _pair_label(d: CoxeterDiagram, subset: tuple[int, ...], a: int, b: int) -> int:
    return d.label(subset[a], subset[b])


def classify_subdiagram(d: CoxeterDiagram, subset) -> SubdiagramType:
    """Finite / affine / indefinite type of the parabolic on `subset`.

    Rank <= 3 is decided exactly (rational arithmetic on the reciprocal
    sum); rank >= 4 falls back to the sign of the cosine Gram matrix and
    returns Finite without an order.
    """
    sub = tuple(sorted(subset))
    if any(i < 0 or i >= d.rank for i in sub):
        raise DiagramError(f"generator index out of range in {sub}")
    if len(set(sub)) != len(sub):
        raise DiagramError(f"repeated generator in {sub}")
    k = len(sub)
    if k == 0:
        return SubdiagramType("finite", groups.TRIVIAL, 1)
    if k == 1:
        return SubdiagramType("finite", groups.C2, 2)
    if k == 2:
        lab = _pair_label(d, sub, 0, 1)
        if lab == INFINITE:
            return SubdiagramType("affine", groups.DINF)
        return SubdiagramType("finite", groups.dihedral(lab) if lab >= 2 else groups.C2,
                              2 * lab)
    if k == 3:
        labs = sorted(
            (_pair_label(d, sub, 0, 1), _pair_label(d, sub, 0, 2), _pair_label(d, sub, 1, 2))
        )
        if INFINITE in labs:
            finite_labs = [x for x in labs if x != INFINITE]
            s = sum(Fraction(1, x) for x in finite_labs)
            if s > 1:
                return SubdiagramType("indefinite")  # unreachable: 1/p+1/q <= 1 for p,q >= 2
            if s == 1:
                return SubdiagramType("affine", groups.affine(_triple_name(labs)))
            return SubdiagramType("indefinite")
        s = sum(Fraction(1, x) for x in labs)
        if s > 1:
            order_frac = 4 / (s - 1)
            order = int(order_frac)
            return SubdiagramType("finite", _finite_triangle_group(tuple(labs)), order)
        if s == 1:
            if tuple(labs) == (2, 4, 4):
                return SubdiagramType("affine", groups.P4M)
            return SubdiagramType("affine", groups.affine(_triple_name(labs)))
        return SubdiagramType("indefinite")
    return _classify_by_gram(d, sub)


def _triple_name(labs) -> str:
    return "(" + ",".join("inf" if x == INFINITE else str(x) for x in labs) + ")"


def _finite_triangle_group(labs: tuple[int, int, int]) -> GroupId:
    """Catalog name of the (p,q,r) spherical triangle group."""
    p, q, r = labs
    if p == 2 and q == 2:
        return groups.dihedral_x_c2(r) if r % 2 == 0 else groups.dihedral(2 * r)
    if labs == (2, 3, 3):
        return groups.S4
    if labs == (2, 3, 4):
        return groups.C2_X_S4
    if labs == (2, 3, 5):
        return groups.opaque("triangle(2,3,5)")  # C2 x A5; outside the catalog
    raise DiagramError(f"triangle labels {labs} are not spherical")


def cosine_matrix(d: CoxeterDiagram, subset) -> np.ndarray:
    sub = tuple(sorted(subset))
    n = len(sub)
    g = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            lab = d.label(sub[a], sub[b])
            g[a, b] = 1.0 if a == b else -math.cos(math.pi / lab) if lab != INFINITE else -1.0
    return g


def _classify_by_gram(d: CoxeterDiagram, sub) -> SubdiagramType:
    g = cosine_matrix(d, sub)
    minors = [np.linalg.det(g[: k + 1, : k + 1]) for k in range(len(sub))]
    if all(mi > EPS for mi in minors):
        return SubdiagramType("finite", groups.opaque(f"pd-rank{len(sub)}"), None)
    if all(mi > EPS for mi in minors[:-1]) and abs(minors[-1]) <= EPS:
        return SubdiagramType("affine", groups.affine(f"rank{len(sub)}"))
    return SubdiagramType("indefinite")


# ---------------------------------------------------------------------------
# Concrete realization of finite rank-3 vertex groups.


@dataclass(frozen=True)
class MatrixGroup:
    """A finite group of orthogonal 3x3 matrices, closed under product.

    generators are the simplex reflections, indexed in the same order as
    the defining generator subset.
    """

    generators: tuple[np.ndarray, ...]
    elements: tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)


def _key(mat: np.ndarray) -> tuple:
    return tuple(np.round(mat / DEDUP_GRID).astype(np.int64).ravel().tolist())


def _close_under_product(gens: list[np.ndarray], cap: int = ORDER_CAP) -> list[np.ndarray]:
    elements = {_key(np.eye(3)): np.eye(3)}
    frontier = [np.eye(3)]
    while frontier:
        nxt = []
        for w in frontier:
            for g in gens:
                wg = w @ g
                k = _key(wg)
                if k not in elements:
                    if len(elements) >= cap:
                        raise RealizationError(
                            f"group closure exceeded {cap} elements; realization is "
                            "numerically unstable or the subdiagram is not finite"
                        )
                    elements[k] = wg
                    nxt.append(wg)
        frontier = nxt
    return list(elements.values())


def reflection_normals(d: CoxeterDiagram, vertex) -> np.ndarray:
    """Unit normals n_1..n_3 of the three mirrors through a finite vertex,
    as rows; inner products reproduce the cosine matrix exactly (Cholesky)."""
    sub = tuple(sorted(vertex))
    if len(sub) != 3:
        raise DiagramError(f"vertex must be a 3-element subset, got {sub}")
    g = cosine_matrix(d, sub)
    try:
        low = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise RealizationError(f"cosine matrix of {sub} is not positive definite") from exc
    return low


def realize_vertex_group(d: CoxeterDiagram, vertex) -> MatrixGroup:
    """Enumerate the finite reflection group of a rank-3 vertex.

    The three generators are R_i = I - 2 n_i n_i^T for the Cholesky normals;
    the breadth-first closure is checked against the triangle-group order
    formula by callers/tests, which catches any float drift.
    """
    sub = tuple(sorted(vertex))
    typ = classify_subdiagram(d, sub)
    if not typ.is_finite:
        raise RealizationError(f"vertex {tuple(i + 1 for i in sub)} is not finite type")
    normals = reflection_normals(d, sub)
    gens = []
    for i in range(3):
        n = normals[i]
        gens.append(np.eye(3) - 2.0 * np.outer(n, n))
    elements = _close_under_product(gens)
    return MatrixGroup(tuple(gens), tuple(elements))


def element_order(mat: np.ndarray, cap: int = 512) -> int:
    acc = np.array(mat)
    for k in range(1, cap + 1):
        if np.allclose(acc, np.eye(3), atol=DEDUP_GRID):
            return k
        acc = acc @ mat
    raise RealizationError("element order exceeded cap; matrix is not close to finite order")


def fingerprint(g: MatrixGroup) -> tuple:
    """(order, element-order multiset, center size, abelian flag)."""
    orders: dict[int, int] = {}
    for e in g.elements:
        o = element_order(e)
        orders[o] = orders.get(o, 0) + 1
    center = 0
    abelian = True
    for e in g.elements:
        commutes_all = all(np.allclose(e @ f, f @ e, atol=DEDUP_GRID) for f in g.elements)
        if commutes_all:
            center += 1
        else:
            abelian = False
    return (g.order, tuple(sorted(orders.items())), center, abelian)


def identify_group(g: MatrixGroup) -> GroupId:
    """Catalog name for a concrete finite matrix group, Opaque if unmatched."""
    return groups.fingerprint_lookup(fingerprint(g))


# ---------------------------------------------------------------------------
# Cell inventories.


@dataclass(frozen=True)
class Cell:
    cell_id: str
    dim: int
    stabilizer: GroupId
    kind: str = "finite"  # "finite" | "parabolicVC" | "hyperbolicVC"
    boundary: tuple[tuple[str, int], ...] | None = None

    def to_json(self) -> dict:
        out = {"cell_id": self.cell_id, "stabilizer": self.stabilizer.label(),
               "kind": self.kind}
        if self.boundary is not None:
            out["boundary"] = [[cid, inc] for cid, inc in self.boundary]
        return out


@dataclass
class CellInventory:
    cells: dict[int, list[Cell]] = field(default_factory=dict)

    def add(self, cell: Cell) -> None:
        self.cells.setdefault(cell.dim, []).append(cell)

    def dims(self) -> list[int]:
        return sorted(self.cells)

    @property
    def dimension(self) -> int:
        return max(self.cells) if self.cells else -1

    def at(self, dim: int) -> list[Cell]:
        return sorted(self.cells.get(dim, []), key=lambda c: c.cell_id)

    def stabilizer_labels(self, dim: int) -> set[str]:
        return {c.stabilizer.label() for c in self.cells.get(dim, ())}

    def counts(self) -> dict[int, int]:
        return {d: len(cs) for d, cs in sorted(self.cells.items())}

    def validate(self) -> None:
        """Check boundary ids exist one dimension down and that every cell's
        stabilizer can embed in each of its boundary cells' stabilizers."""
        by_id = {c.cell_id: c for cs in self.cells.values() for c in cs}
        for cs in self.cells.values():
            for c in cs:
                if c.boundary is None:
                    continue
                for bid, _inc in c.boundary:
                    b = by_id.get(bid)
                    if b is None or b.dim != c.dim - 1:
                        raise DiagramError(
                            f"cell {c.cell_id}: boundary {bid} missing in dimension {c.dim - 1}"
                        )
                    if not may_embed(c.stabilizer, b.stabilizer):
                        raise DiagramError(
                            f"cell {c.cell_id}: stabilizer {c.stabilizer} does not embed "
                            f"in boundary {bid} stabilizer {b.stabilizer}"
                        )

    def to_json(self) -> dict:
        return {str(d): [c.to_json() for c in self.at(d)] for d in self.dims()}


def _digits(idxs) -> str:
    return "".join(str(i + 1) for i in sorted(idxs))

def _vertex_id(vertex: tuple[int, ...]) -> str:
    return "X0:" + _digits(vertex)

def _trunc_vertex_id(edge: tuple[int, ...], vertex: tuple[int, ...]) -> str:
    return "X0:t" + _digits(edge) + "@" + _digits(vertex)

def _edge_id(edge: tuple[int, ...]) -> str:
    return "X1:" + _digits(edge)

def _trunc_edge_id(facet: int, vertex: tuple[int, ...]) -> str:
    return f"X1:t{facet + 1}@" + _digits(vertex)

def _facet_id(facet: int) -> str:
    return f"X2:{facet + 1}"

def _trunc_facet_id(vertex: tuple[int, ...]) -> str:
    return "X2:t" + _digits(vertex)


def hyperbolic_simplex_check(d: CoxeterDiagram) -> dict[tuple[int, ...], SubdiagramType]:
    """Classification of all rank-3 vertex subdiagrams of a rank-4 diagram,
    after checking the hyperbolic-simplex conditions."""
    if d.rank != 4:
        raise NotHyperbolicSimplexError(f"need a rank-4 diagram, got rank {d.rank}")
    full = classify_subdiagram(d, range(4))
    if full.tag != "indefinite":
        raise NotHyperbolicSimplexError(
            f"full diagram must be indefinite, classified {full.tag}"
        )
    vertex_types = {}
    for skip in range(4):
        vertex = tuple(i for i in range(4) if i != skip)
        typ = classify_subdiagram(d, vertex)
        if typ.tag == "indefinite":
            raise NotHyperbolicSimplexError(
                f"vertex subdiagram {tuple(i + 1 for i in vertex)} is indefinite"
            )
        vertex_types[vertex] = typ
    return vertex_types


def truncated_domain_inventory(d: CoxeterDiagram) -> CellInventory:
    """Cell inventory of the fundamental 3-simplex with every ideal vertex
    truncated by a cross-section triangle.

    Original cells keep their parabolic stabilizers (vertex: rank-3, edge:
    rank-2 dihedral, facet: the reflection, body: trivial).  Each truncated
    vertex contributes one free 2-cell, an edge per containing facet with
    that facet's reflection as stabilizer, and a vertex per containing edge
    with that edge's dihedral as stabilizer.
    """
    vertex_types = hyperbolic_simplex_check(d)
    inv = CellInventory()
    ideal = {v for v, t in vertex_types.items() if t.is_affine}

    edges = [(a, b) for a in range(4) for b in range(a + 1, 4)]

    # vertices
    for vertex, typ in sorted(vertex_types.items()):
        if typ.is_finite:
            inv.add(Cell(_vertex_id(vertex), 0, typ.group))
    for vertex in sorted(ideal):
        # truncation vertices sit on the edges running into the ideal vertex
        for edge in edges:
            if set(edge) <= set(vertex):
                lab = d.label(edge[0], edge[1])
                inv.add(Cell(_trunc_vertex_id(edge, vertex), 0, groups.dihedral(lab)))

    # edges of the simplex; each runs between its two containing vertices
    for edge in edges:
        endpoints = [v for v in vertex_types if set(edge) <= set(v)]
        boundary = []
        for v in endpoints:
            if v in ideal:
                boundary.append((_trunc_vertex_id(edge, v), 1))
            else:
                boundary.append((_vertex_id(v), 1))
        lab = d.label(edge[0], edge[1])
        inv.add(Cell(_edge_id(edge), 1, groups.dihedral(lab), boundary=tuple(boundary)))
    # truncation edges: cross-section triangle edge inside each facet at the cusp
    for vertex in sorted(ideal):
        for facet in sorted(vertex):
            cut_edges = [e for e in edges if set(e) <= set(vertex) and facet in e]
            boundary = tuple((_trunc_vertex_id(e, vertex), 1) for e in cut_edges)
            inv.add(Cell(_trunc_edge_id(facet, vertex), 1, groups.C2, boundary=boundary))

    # facets
    for facet in range(4):
        boundary = [(_edge_id(e), 1) for e in edges if facet in e]
        for vertex in sorted(ideal):
            if facet in vertex:
                boundary.append((_trunc_edge_id(facet, vertex), 1))
        inv.add(Cell(_facet_id(facet), 2, groups.C2, boundary=tuple(boundary)))
    # truncation 2-cells
    for vertex in sorted(ideal):
        boundary = tuple((_trunc_edge_id(f, vertex), 1) for f in sorted(vertex))
        inv.add(Cell(_trunc_facet_id(vertex), 2, groups.TRIVIAL, boundary=boundary))

    # the 3-cell
    boundary = [(_facet_id(f), 1) for f in range(4)]
    boundary.extend((_trunc_facet_id(v), 1) for v in sorted(ideal))
    inv.add(Cell("X3:body", 3, groups.TRIVIAL, boundary=tuple(boundary)))

    inv.validate()
    return inv
