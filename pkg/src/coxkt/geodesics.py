"""Classification of geodesics running along the 1-skeleton of the simplex.

A geodesic lying in the intersection of two mirrors projects into the
1-skeleton of the fundamental simplex.  Followed through a finite vertex,
its continuation is found on the unit sphere around that vertex: take the
antipode of the incoming direction, fold it into the fundamental chamber
of the vertex group, and read off which simplex edge the folded direction
labels.  Iterating this walk either escapes into an ideal vertex (finite
stabilizer) or closes up into a periodic path, in which case the stabilizer
is an amalgam of the two turning-vertex groups over the edge dihedral,
described by a segment-shaped graph of groups.

Geodesics inside a single mirror, or in no mirror, have stabilizers of one
of four shapes (Z and Dinf, possibly times a central reflection); they are
recorded as form lists, not enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import coxeter, groups
from .coxeter import CoxeterDiagram, MatrixGroup
from .errors import RealizationError
from .groups import GroupId

MATCH_TOL = 1e-6  # direction matching; looser than EPS, vectors pass through folds

IDEAL = "ideal"


@dataclass(frozen=True)
class DirectedEdge:
    """Travel along simplex edge `edge` toward `toward` (a vertex or IDEAL)."""

    edge: tuple[int, int]
    toward: tuple[int, ...] | str

    def __post_init__(self) -> None:
        if self.toward != IDEAL and not set(self.edge) <= set(self.toward):
            raise RealizationError(f"edge {self.edge} not contained in vertex {self.toward}")

    def describe(self) -> str:
        dst = "ideal" if self.toward == IDEAL else "".join(str(i + 1) for i in self.toward)
        return "P" + "^P".join(str(i + 1) for i in self.edge) + "->" + dst


@dataclass(frozen=True)
class GeodesicTrace:
    start: DirectedEdge
    steps: tuple[DirectedEdge, ...]
    outcome: str  # "periodic" | "escapes"
    period: int | None = None

    @property
    def is_periodic(self) -> bool:
        return self.outcome == "periodic"


@dataclass(frozen=True)
class StabilizerDescription:
    kind: str  # "finite" | "graph_of_groups" | "form"
    name: GroupId | None = None
    vertices: tuple[GroupId, ...] = ()
    edges: tuple[GroupId, ...] = ()
    shape: str | None = None  # "segment" | "cycle"

    def describe(self) -> str:
        if self.kind == "finite":
            return "finite"
        if self.kind == "graph_of_groups":
            if self.shape == "segment":
                v0, v1 = self.vertices
                graph = f"{v0} --{self.edges[0]}-- {v1}"
            else:
                graph = " -- ".join(str(v) for v in self.vertices) + " (cycle)"
            return f"{self.name} [{graph}]"
        return str(self.name)


def typeII_III_forms() -> dict[str, list[GroupId]]:
    """Isomorphism types available to stabilizers of geodesics lying in
    exactly one mirror (typeII) or in no mirror (typeIII)."""
    return {
        "typeII": [groups.Z_X_C2, groups.DINF_X_C2],
        "typeIII": [groups.Z, groups.DINF],
    }


# ---------------------------------------------------------------------------
# Directions and folding.


def fold_into_chamber(x: np.ndarray, normals: np.ndarray, order_bound: int) -> np.ndarray:
    """Reflect x until it pairs nonnegatively with every chamber normal.

    Each application fixes the違 offending pairing; the walk is bounded by
    the group order, and exceeding the bound means the input data was not a
    finite reflection arrangement.
    """
    x = np.array(x, dtype=float)
    for _ in range(order_bound + 1):
        for i in range(len(normals)):
            p = float(x @ normals[i])
            if p < -coxeter.EPS:
                x = x - 2.0 * p * normals[i]
                break
        else:
            return x
    raise RealizationError("chamber folding failed to terminate within the order bound")


def edge_directions(d: CoxeterDiagram, vertex) -> dict[tuple[int, int], np.ndarray]:
    """Unit direction of each simplex edge at a finite vertex.

    The direction of edge P_a^P_b is orthogonal to the normals n_a, n_b and
    pairs positively with the third normal: the normalized dual-basis vector
    of the remaining index.
    """
    sub = tuple(sorted(vertex))
    normals = coxeter.reflection_normals(d, sub)
    dual = np.linalg.inv(normals.T)  # row j pairs to delta_ij against normal rows n_i
    out: dict[tuple[int, int], np.ndarray] = {}
    for skip in range(3):
        pair = tuple(sub[k] for k in range(3) if k != skip)
        v = dual[skip]
        out[pair] = v / np.linalg.norm(v)
    return out


# ---------------------------------------------------------------------------
# Tracing.


def _vertices_of_edge(d: CoxeterDiagram, edge: tuple[int, int]) -> list[tuple[int, ...]]:
    return [tuple(sorted(set(edge) | {x})) for x in range(d.rank) if x not in edge]


def _vertex_is_ideal(d: CoxeterDiagram, vertex) -> bool:
    return coxeter.classify_subdiagram(d, vertex).is_affine


def trace_type1(d: CoxeterDiagram, edge, start_toward=None) -> GeodesicTrace:
    """Walk the geodesic extending a simplex edge through the tessellation.

    Returns a periodic trace when the walk revisits its start, and an
    escaping trace as soon as it heads into an ideal vertex.  Edges with an
    ideal endpoint escape without any tracing.
    """
    edge = tuple(sorted(edge))
    endpoints = _vertices_of_edge(d, edge)
    finite_ends = [v for v in endpoints if not _vertex_is_ideal(d, v)]
    if start_toward is None:
        if len(finite_ends) < len(endpoints):
            start = DirectedEdge(edge, IDEAL)
            return GeodesicTrace(start, (start,), "escapes")
        start = DirectedEdge(edge, min(finite_ends))
    else:
        start = DirectedEdge(edge, tuple(sorted(start_toward)))

    realizations: dict[tuple[int, ...], MatrixGroup] = {}
    directions: dict[tuple[int, ...], dict[tuple[int, int], np.ndarray]] = {}

    def vertex_data(v):
        if v not in realizations:
            realizations[v] = coxeter.realize_vertex_group(d, v)
            directions[v] = edge_directions(d, v)
        return realizations[v], directions[v]

    steps: list[DirectedEdge] = [start]
    state = start
    max_states = 2 * d.rank * (d.rank - 1)  # directed edges of the simplex
    for _ in range(max_states + 1):
        v = state.toward
        if v == IDEAL or _vertex_is_ideal(d, v):
            final = DirectedEdge(state.edge, IDEAL)
            steps[-1] = final
            return GeodesicTrace(start, tuple(steps), "escapes")
        grp, dirs = vertex_data(v)
        incoming = dirs[state.edge]
        folded = fold_into_chamber(-incoming, coxeter.reflection_normals(d, v), grp.order)
        matched = None
        for pair, u in dirs.items():
            if np.linalg.norm(folded - u) < MATCH_TOL:
                matched = pair
                break
        if matched is None:
            raise RealizationError(
                f"folded continuation at vertex {tuple(i + 1 for i in v)} matches no edge "
                "direction; numerical failure"
            )
        nxt_vertex = next(w for w in _vertices_of_edge(d, matched) if w != v)
        state = DirectedEdge(matched, nxt_vertex if not _vertex_is_ideal(d, nxt_vertex) else IDEAL)
        if state.toward == IDEAL:
            steps.append(state)
            return GeodesicTrace(start, tuple(steps), "escapes")
        if state == start:
            return GeodesicTrace(start, tuple(steps), "periodic", period=len(steps))
        steps.append(state)
    raise RealizationError("trace exceeded the directed-edge count without closing; "
                           "impossible for a reversible walk")


# ---------------------------------------------------------------------------
# Stabilizers.


def _pair_stabilizer(grp: MatrixGroup, u: np.ndarray) -> MatrixGroup:
    """Subgroup preserving the antipodal pair {u, -u}."""
    kept = []
    for e in grp.elements:
        img = e @ u
        if np.linalg.norm(img - u) < MATCH_TOL or np.linalg.norm(img + u) < MATCH_TOL:
            kept.append(e)
    return MatrixGroup(grp.generators, tuple(kept))


def _edge_subgroup(d: CoxeterDiagram, vertex, edge) -> MatrixGroup:
    """The dihedral generated by the edge's two reflections inside the
    vertex realization."""
    sub = tuple(sorted(vertex))
    normals = coxeter.reflection_normals(d, sub)
    gens = []
    for a in edge:
        i = sub.index(a)
        n = normals[i]
        gens.append(np.eye(3) - 2.0 * np.outer(n, n))
    elements = coxeter._close_under_product(gens)
    return MatrixGroup(tuple(gens), tuple(elements))


def _central_product_decomposes(vertex_grp: MatrixGroup, edge_grp: MatrixGroup) -> bool:
    """Whether vertex_grp = edge_grp x <z> for a central involution z."""
    if vertex_grp.order != 2 * edge_grp.order:
        return False
    edge_keys = {coxeter._key(e) for e in edge_grp.elements}
    for z in vertex_grp.elements:
        if coxeter._key(z) in edge_keys:
            continue
        if not np.allclose(z @ z, np.eye(3), atol=MATCH_TOL):
            continue
        central = all(np.allclose(z @ g, g @ z, atol=MATCH_TOL) for g in vertex_grp.elements)
        if not central:
            continue
        cosets = edge_keys | {coxeter._key(z @ e) for e in edge_grp.elements}
        if len(cosets) == vertex_grp.order and all(
            coxeter._key(e) in cosets for e in vertex_grp.elements
        ):
            return True
    return False


def stabilizer_of_trace(d: CoxeterDiagram, t: GeodesicTrace) -> StabilizerDescription:
    """Name the geodesic stabilizer described by a trace.

    Escaping traces have finite stabilizer.  A period-2 trace bounces along
    a single edge between two vertices; its stabilizer is the amalgam of the
    two direction-pair stabilizers over the edge dihedral, and it is named
    base x Dinf when both vertex groups split off the edge group times a
    central involution.
    """
    if not t.is_periodic:
        return StabilizerDescription("finite")
    edge = t.start.edge
    turning = sorted({s.toward for s in t.steps})
    edge_label = groups.dihedral(d.label(edge[0], edge[1]))
    vertex_labels: list[GroupId] = []
    product_split = True
    for v in turning:
        grp = coxeter.realize_vertex_group(d, v)
        u = edge_directions(d, v)[edge]
        pair_grp = _pair_stabilizer(grp, u)
        edge_grp = _edge_subgroup(d, v, edge)
        if pair_grp.order != 2 * edge_grp.order:
            raise RealizationError(
                f"edge group has index {pair_grp.order / edge_grp.order} != 2 "
                f"in the pair stabilizer at vertex {tuple(i + 1 for i in v)}"
            )
        vertex_labels.append(coxeter.identify_group(pair_grp))
        product_split = product_split and _central_product_decomposes(pair_grp, edge_grp)
    if t.period == 2 and len(turning) == 2:
        if product_split:
            name = groups.prod_dinf(edge_label)
        else:
            name = groups.amalgam(vertex_labels[0], edge_label, vertex_labels[1])
        return StabilizerDescription(
            "graph_of_groups",
            name=name,
            vertices=tuple(vertex_labels),
            edges=(edge_label,),
            shape="segment",
        )
    # longer cycles are reported structurally but not named
    return StabilizerDescription(
        "graph_of_groups",
        name=groups.opaque(f"cycle-period-{t.period}"),
        vertices=tuple(vertex_labels),
        edges=(edge_label,) * len(turning),
        shape="cycle",
    )


def edge_census(d: CoxeterDiagram) -> list[dict]:
    """One record per simplex edge: trace outcome and stabilizer description."""
    out = []
    for a in range(d.rank):
        for b in range(a + 1, d.rank):
            t = trace_type1(d, (a, b))
            desc = stabilizer_of_trace(d, t)
            out.append(
                {
                    "edge": f"P{a + 1}^P{b + 1}",
                    "outcome": t.outcome,
                    "period": t.period,
                    "stabilizer": desc,
                }
            )
    return out
