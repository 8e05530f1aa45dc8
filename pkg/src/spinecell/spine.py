"""Black spine decompositions and elementary collapses.

A paint state splits a closed triangulation into a white open cell
(every tetrahedron interior plus the white triangle interiors, and any
whitened edges and vertices) and the black 2-complex K carrying the rest.
The initial state comes from a dual spanning tree: the tree-crossing
triangles are white, everything else is black, and then chi(K) = 1 and,
for a sphere-like input, K has the homology of a point.

States are values: every move returns a new state, and an append-only
trace records each mutation batch with the census after it.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property

from .errors import Anomaly, NotFree, NotIsolated, UnknownSimplex
from .homology import ChainComplex, homology
from .triangulation import Triangulation, _coerce_index


@dataclass(frozen=True)
class TraceRecord:
    step: int
    op: str
    args: tuple[int, ...]
    black_tris: int
    black_edges: int
    black_verts: int
    chi: int

    def format_line(self) -> str:
        args = ",".join(str(a) for a in self.args) if self.args else "-"
        return (
            f"{self.step} {self.op} {args} | "
            f"bt={self.black_tris} be={self.black_edges} bv={self.black_verts} chi={self.chi}"
        )


@dataclass(frozen=True)
class MoveTrace:
    records: tuple[TraceRecord, ...] = ()

    def append(self, op, args, bt, be, bv, chi) -> "MoveTrace":
        rec = TraceRecord(len(self.records) + 1, op, tuple(int(a) for a in args), bt, be, bv, chi)
        return MoveTrace(self.records + (rec,))

    def format(self) -> str:
        return "\n".join(r.format_line() for r in self.records) + ("\n" if self.records else "")

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True)
class PaintState:
    """Immutable black/white painting over a fixed triangulation."""

    base: Triangulation
    black_tris: frozenset
    black_edges: frozenset
    black_verts: frozenset
    trace: MoveTrace = MoveTrace()

    @property
    def chi(self) -> int:
        return len(self.black_verts) - len(self.black_edges) + len(self.black_tris)

    def counts(self) -> tuple[int, int, int]:
        return (len(self.black_tris), len(self.black_edges), len(self.black_verts))

    @cached_property
    def edge_multiplicity(self) -> Counter:
        """Black (triangle, side) incidences per edge; a triangle holding
        an edge twice contributes 2."""
        mult = Counter()
        for f in self.black_tris:
            for e in self.base.tri_edge_ids[f]:
                mult[e] += 1
        return mult

    @cached_property
    def vertex_degree(self) -> Counter:
        deg = Counter()
        for e in self.black_edges:
            tail, head = self.base.edge_vertex_ids[e]
            deg[tail] += 1
            deg[head] += 1
        return deg

    def white_components(self) -> int:
        return _white_components(self.base, self.black_tris)

    def black_complex(self) -> ChainComplex:
        return ChainComplex.from_black_complex(
            self.base, self.black_tris, self.black_edges, self.black_verts
        )

    def _record(self, op, args) -> "PaintState":
        bt, be, bv = self.counts()
        return replace(self, trace=self.trace.append(op, args, bt, be, bv, self.chi))


def _white_components(base: Triangulation, black_tris) -> int:
    parent = list(range(base.tet_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in range(base.triangle_count):
        if f in black_tris:
            continue
        tets = base.tets_of_tri[f]
        if len(tets) == 2:
            ra, rb = find(tets[0]), find(tets[1])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return len({find(t) for t in range(base.tet_count)})


# -- initial spine ----------------------------------------------------


def build_initial_spine(base: Triangulation, seed_tet=0, strategy: str = "bfs") -> PaintState:
    """Grow a dual spanning tree from the seed; whiten its crossings.

    Strategies fix the traversal order (ties broken by ascending ids):
    bfs and dfs are the classical searches over faces 0..3, star greedily
    whitens the lowest-id triangle on the frontier, which reproduces the
    hand-checkable star spine on the boundary of the 4-simplex.
    """
    seed = _coerce_index(seed_tet, 3)
    if not 0 <= seed < base.tet_count:
        raise UnknownSimplex(f"no tetrahedron {seed}")
    white = set()
    visited = {seed}

    def neighbor(t, f):
        entry = base.gluings[t][f]
        if entry is None:
            raise UnknownSimplex("spine needs a closed triangulation")
        return entry[0]

    if strategy == "bfs":
        queue = [seed]
        while queue:
            t = queue.pop(0)
            for f in range(4):
                n = neighbor(t, f)
                if n not in visited:
                    visited.add(n)
                    white.add(base.tri_of[(t, f)])
                    queue.append(n)
    elif strategy == "dfs":
        stack = [seed]
        while stack:
            t = stack[-1]
            for f in range(4):
                n = neighbor(t, f)
                if n not in visited:
                    visited.add(n)
                    white.add(base.tri_of[(t, f)])
                    stack.append(n)
                    break
            else:
                stack.pop()
    elif strategy == "star":
        frontier = []
        for f in range(4):
            heapq.heappush(frontier, (base.tri_of[(seed, f)], seed, f))
        while frontier:
            tri_id, t, f = heapq.heappop(frontier)
            n = neighbor(t, f)
            if n in visited:
                continue
            visited.add(n)
            white.add(tri_id)
            for f2 in range(4):
                heapq.heappush(frontier, (base.tri_of[(n, f2)], n, f2))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    if len(visited) != base.tet_count:
        raise UnknownSimplex("dual graph is not connected")
    assert len(white) == base.tet_count - 1

    state = PaintState(
        base=base,
        black_tris=frozenset(range(base.triangle_count)) - frozenset(white),
        black_edges=frozenset(range(base.edge_count)),
        black_verts=frozenset(range(base.vertex_count)),
    )
    code = {"bfs": 0, "dfs": 1, "star": 2}[strategy]
    return state._record("build_initial_spine", (seed, code))


# -- triangle classification ------------------------------------------


@dataclass(frozen=True)
class TriangleClass:
    kind: str                    # 'F', 'M' or 'S'
    witnesses: tuple[int, ...]   # free edges for F, overloaded edges for M

    F = "F"
    M = "M"
    S = "S"


def classify_triangles(state: PaintState) -> dict[int, TriangleClass]:
    """Definition-1 classes; a free edge wins over an overloaded one."""
    mult = state.edge_multiplicity
    out = {}
    for f in sorted(state.black_tris):
        edges = state.base.tri_edge_ids[f]
        free = tuple(sorted({e for e in edges if mult[e] == 1}))
        heavy = tuple(sorted({e for e in edges if mult[e] >= 3}))
        if free:
            out[f] = TriangleClass(TriangleClass.F, free)
        elif heavy:
            out[f] = TriangleClass(TriangleClass.M, heavy)
        else:
            out[f] = TriangleClass(TriangleClass.S, ())
    return out


# -- elementary collapses ---------------------------------------------


def collapse_free_triangle(state: PaintState, tri, free_edge) -> PaintState:
    """Whiten an f-triangle together with its witnessing free edge."""
    f = _coerce_index(tri, 2)
    e = _coerce_index(free_edge, 1)
    if f not in state.black_tris:
        raise UnknownSimplex(f"triangle {f} is not black")
    if e not in state.base.tri_edge_ids[f]:
        raise UnknownSimplex(f"edge {e} is not an edge of triangle {f}")
    if state.edge_multiplicity[e] != 1:
        raise NotFree(f"edge {e} has black multiplicity {state.edge_multiplicity[e]}")
    new = replace(
        state,
        black_tris=state.black_tris - {f},
        black_edges=state.black_edges - {e},
    )
    assert new.chi == state.chi
    return new._record("collapse_free_triangle", (f, e))


def collapse_isolated_edge(state: PaintState, edge) -> PaintState:
    """Whiten an isolated edge together with its free endpoint.

    When both endpoints are free (the last edge of a tree) the higher
    vertex id is removed, keeping the lowest as the root.
    """
    e = _coerce_index(edge, 1)
    if e not in state.black_edges:
        raise UnknownSimplex(f"edge {e} is not black")
    if state.edge_multiplicity[e] != 0:
        raise NotIsolated(f"edge {e} lies on a black triangle")
    tail, head = state.base.edge_vertex_ids[e]
    if tail == head:
        raise NotIsolated(f"edge {e} is a loop")
    deg = state.vertex_degree
    free = [v for v in (tail, head) if deg[v] == 1]
    if not free:
        raise NotIsolated(f"edge {e} has no free endpoint")
    gone = max(free)
    new = replace(
        state,
        black_edges=state.black_edges - {e},
        black_verts=state.black_verts - {gone},
    )
    assert new.chi == state.chi
    return new._record("collapse_isolated_edge", (e, gone))


POINT = "Point"
NO_FREE_FACES = "NoFreeFaces"


def collapse_all(state: PaintState, budget=None) -> tuple[PaintState, str]:
    """Greedy lowest-id collapse to exhaustion.

    Free-triangle collapses are preferred; isolated-edge collapses run
    when no triangle move remains (edge moves never re-enable triangle
    moves, so the two phases do not interleave).  Candidate heaps with
    lazy revalidation keep the sweep near-linear; the move sequence is
    identical to a full lowest-id rescan per move.
    """
    base = state.base
    mult = Counter(state.edge_multiplicity)
    deg = Counter(state.vertex_degree)
    tris = set(state.black_tris)
    edges = set(state.black_edges)
    verts = set(state.black_verts)
    moves = []

    tri_heap = []
    for f in tris:
        if any(mult[e] == 1 for e in base.tri_edge_ids[f]):
            heapq.heappush(tri_heap, f)
    while tri_heap:
        if budget is not None and budget.spent():
            break
        f = heapq.heappop(tri_heap)
        if f not in tris:
            continue
        free = sorted(e for e in set(base.tri_edge_ids[f]) if mult[e] == 1)
        if not free:
            continue
        if budget is not None:
            budget.charge()
        e = free[0]
        tris.remove(f)
        edges.remove(e)
        moves.append(("collapse_free_triangle", (f, e)))
        tail, head = base.edge_vertex_ids[e]
        deg[tail] -= 1
        deg[head] -= 1
        for e2 in base.tri_edge_ids[f]:
            mult[e2] -= 1
            if mult[e2] == 1:
                for f2 in base.tris_of_edge[e2]:
                    if f2 in tris:
                        heapq.heappush(tri_heap, f2)

    edge_heap = []
    for e in edges:
        if mult[e] == 0:
            heapq.heappush(edge_heap, e)
    while edge_heap:
        if budget is not None and budget.spent():
            break
        e = heapq.heappop(edge_heap)
        if e not in edges or mult[e] != 0:
            continue
        tail, head = base.edge_vertex_ids[e]
        if tail == head:
            continue
        free = [v for v in (tail, head) if deg[v] == 1]
        if not free:
            continue
        if budget is not None:
            budget.charge()
        gone = max(free)
        edges.remove(e)
        verts.remove(gone)
        deg[tail] -= 1
        deg[head] -= 1
        moves.append(("collapse_isolated_edge", (e, gone)))
        other = tail if gone == head else head
        if deg[other] == 1:
            for e2 in base.edges_of_vertex[other]:
                if e2 in edges and mult[e2] == 0:
                    heapq.heappush(edge_heap, e2)

    trace = state.trace
    bt, be, bv = len(state.black_tris), len(state.black_edges), len(state.black_verts)
    for op, args in moves:
        if op == "collapse_free_triangle":
            bt -= 1
            be -= 1
        else:
            be -= 1
            bv -= 1
        trace = trace.append(op, args, bt, be, bv, bv - be + bt)
    state = PaintState(
        base=base,
        black_tris=frozenset(tris),
        black_edges=frozenset(edges),
        black_verts=frozenset(verts),
        trace=trace,
    )
    return state, (POINT if is_point_spine(state) else NO_FREE_FACES)


def is_point_spine(state: PaintState) -> bool:
    return (
        not state.black_tris
        and not state.black_edges
        and len(state.black_verts) == 1
    )


# -- certification ----------------------------------------------------


@dataclass
class InvariantReport:
    counts: tuple[int, int, int]
    chi: int
    white_components: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_invariants(state: PaintState, expect_simply_connected: bool = False) -> InvariantReport:
    """Verify the paint-state invariants; failures are listed, not raised.

    Homology checks (H1 = H2 = 0) run only under the simply-connected
    expectation; H0 = Z (black connectivity) is always checked.
    """
    base = state.base
    failures = []

    for f in state.black_tris:
        for e in base.tri_edge_ids[f]:
            if e not in state.black_edges:
                failures.append(("ClosureViolation", f"triangle {f} has white edge {e}"))
    for e in state.black_edges:
        for v in base.edge_vertex_ids[e]:
            if v not in state.black_verts:
                failures.append(("ClosureViolation", f"edge {e} has white endpoint {v}"))

    comps = state.white_components()
    if comps != 1:
        failures.append(("WhiteDisconnected", f"{comps} white components"))

    if state.chi != 1:
        failures.append(("EulerMismatch", f"chi={state.chi}"))

    if not state.black_verts:
        failures.append(("BlackEmpty", "no black vertices"))
    else:
        if _black_components(state) != 1:
            failures.append(("BlackDisconnected", "K is not connected"))
        elif expect_simply_connected:
            prof = homology(state.black_complex())
            if not prof.is_trivial(1) or not prof.is_trivial(2):
                failures.append(
                    (
                        "HomologyMismatch",
                        f"H1={prof.format_group(1)} H2={prof.format_group(2)}",
                    )
                )

    return InvariantReport(
        counts=state.counts(),
        chi=state.chi,
        white_components=comps,
        failures=failures,
    )


def _black_components(state: PaintState) -> int:
    verts = sorted(state.black_verts)
    index = {v: i for i, v in enumerate(verts)}
    parent = list(range(len(verts)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for e in state.black_edges:
        tail, head = state.base.edge_vertex_ids[e]
        union(index[tail], index[head])
    for f in state.black_tris:
        v0, v1, v2 = state.base.tri_vertex_ids[f]
        union(index[v0], index[v1])
        union(index[v0], index[v2])
    return len({find(i) for i in range(len(verts))})


class MoveBudget:
    """Shared step counter for the recognizer's max-steps guard."""

    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def spent(self) -> bool:
        return self.used >= self.limit

    def charge(self, n: int = 1):
        self.used += n
