"""Certified restructuring moves: edge clearing, dead-end repair, vertex clearing.

Each compound move is compiled to repaint batches applied to a scratch
copy of the paint state: cancel the white interiors of some tetrahedra
(blacken all their faces), re-extend the cell through chosen conversion
triangles (whiten them), repair any dead ends by whitening a frontier
triangle per cut-off component, and retract incidental free triangles.
The batch is committed only if the state invariants come back, otherwise
the move raises Anomaly and the input state is returned untouched.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, replace

from .errors import Anomaly, NotSeparating, PreconditionUnmet, UnknownSimplex
from .spine import MoveTrace, PaintState, _coerce_index
from .triangulation import Triangulation

MICRO_BUDGET_FACTOR = 64   # micro-repaints allowed per compound move, times T


# -- mutable scratch state --------------------------------------------


class _Work:
    """Mutable black sets with incremental multiplicity bookkeeping."""

    def __init__(self, state: PaintState, protected_tris=(), protected_edges=(), protected_verts=()):
        self.base = state.base
        self.tris = set(state.black_tris)
        self.edges = set(state.black_edges)
        self.verts = set(state.black_verts)
        self.protected_tris = frozenset(protected_tris)
        self.protected_edges = frozenset(protected_edges)
        self.protected_verts = frozenset(protected_verts)
        self.mult = Counter()
        for f in self.tris:
            for e in self.base.tri_edge_ids[f]:
                self.mult[e] += 1
        self.vdeg = Counter()
        for e in self.edges:
            tail, head = self.base.edge_vertex_ids[e]
            self.vdeg[tail] += 1
            self.vdeg[head] += 1
        self.records = []

    # painting primitives keep closure: blackening propagates down,
    # whitening never cascades implicitly

    def blacken_tri(self, f):
        if f in self.tris:
            return
        self.tris.add(f)
        for e in self.base.tri_edge_ids[f]:
            self.mult[e] += 1
            self.blacken_edge(e)
        for v in self.base.tri_vertex_ids[f]:
            self.verts.add(v)

    def whiten_tri(self, f):
        if f in self.protected_tris:
            raise Anomaly(f"refusing to whiten protected triangle {f}")
        if f not in self.tris:
            return
        self.tris.remove(f)
        for e in self.base.tri_edge_ids[f]:
            self.mult[e] -= 1

    def blacken_edge(self, e):
        if e in self.edges:
            return
        self.edges.add(e)
        tail, head = self.base.edge_vertex_ids[e]
        self.vdeg[tail] += 1
        self.vdeg[head] += 1
        self.verts.add(tail)
        self.verts.add(head)

    def whiten_edge(self, e):
        if e in self.protected_edges:
            raise Anomaly(f"refusing to whiten protected edge {e}")
        if e not in self.edges:
            return
        self.edges.remove(e)
        tail, head = self.base.edge_vertex_ids[e]
        self.vdeg[tail] -= 1
        self.vdeg[head] -= 1

    def whiten_vert(self, v):
        if v in self.protected_verts:
            raise Anomaly(f"refusing to whiten protected vertex {v}")
        self.verts.discard(v)

    @property
    def chi(self):
        return len(self.verts) - len(self.edges) + len(self.tris)

    def counts(self):
        return (len(self.tris), len(self.edges), len(self.verts))

    def record(self, op, args):
        bt, be, bv = self.counts()
        self.records.append((op, tuple(int(a) for a in args), bt, be, bv, self.chi))

    def white_component_map(self):
        base = self.base
        parent = list(range(base.tet_count))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for f in range(base.triangle_count):
            if f in self.tris:
                continue
            tets = base.tets_of_tri[f]
            if len(tets) == 2:
                ra, rb = find(tets[0]), find(tets[1])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        return [find(t) for t in range(base.tet_count)]

    def repair_dead_ends(self, allowed_tris=None):
        """Whiten frontier triangles until the white dual graph reconnects.

        Candidates may be restricted (clear_edge must not touch the far
        spine); a cut that only protected or disallowed triangles could
        mend is an Anomaly.
        """
        while True:
            comp = self.white_component_map()
            if len(set(comp)) == 1:
                return
            pick = None
            for f in sorted(self.tris):
                if f in self.protected_tris:
                    continue
                if allowed_tris is not None and f not in allowed_tris:
                    continue
                tets = self.base.tets_of_tri[f]
                if len(tets) == 2 and comp[tets[0]] != comp[tets[1]]:
                    pick = f
                    break
            if pick is None:
                raise Anomaly("dead end cannot be repaired within the allowed frontier")
            self.whiten_tri(pick)
            self.record("repair_dead_ends", (pick,))

    def collapse_free_local(self, candidates):
        """Retract f-triangles among the candidates, lowest id first."""
        while True:
            move = None
            for f in sorted(self.tris & set(candidates)):
                if f in self.protected_tris:
                    continue
                free = sorted(
                    e
                    for e in set(self.base.tri_edge_ids[f])
                    if self.mult[e] == 1 and e not in self.protected_edges
                )
                if free:
                    move = (f, free[0])
                    break
            if move is None:
                return
            f, e = move
            self.whiten_tri(f)
            self.whiten_edge(e)
            self.record("collapse_free_triangle", (f, e))

    def collapse_isolated_at(self, v):
        """Retract isolated edges hanging at v from their far free end."""
        while True:
            move = None
            for e in sorted(self.edges):
                if e in self.protected_edges or self.mult[e] != 0:
                    continue
                tail, head = self.base.edge_vertex_ids[e]
                if tail == head or v not in (tail, head):
                    continue
                far = head if tail == v else tail
                if self.vdeg[far] == 1 and far not in self.protected_verts:
                    move = (e, far)
                    break
            if move is None:
                return
            e, far = move
            self.whiten_edge(e)
            self.whiten_vert(far)
            self.record("collapse_isolated_edge", (e, far))

    def freeze(self, state: PaintState, op, args) -> PaintState:
        comp = self.white_component_map()
        if len(set(comp)) != 1:
            raise Anomaly("white dual graph disconnected after move")
        if self.chi != 1:
            raise Anomaly(f"chi={self.chi} after move")
        trace = state.trace
        for rec_op, rec_args, bt, be, bv, chi in self.records:
            trace = trace.append(rec_op, rec_args, bt, be, bv, chi)
        out = PaintState(
            base=self.base,
            black_tris=frozenset(self.tris),
            black_edges=frozenset(self.edges),
            black_verts=frozenset(self.verts),
            trace=trace,
        )
        return out._record(op, args)


# -- s-chains around an edge ------------------------------------------


@dataclass(frozen=True)
class SChain:
    """Arc of the tetrahedron ring around an anchor edge.

    Consecutive tetrahedra share the recorded triangle; every member
    carries the anchor edge; no tetrahedron repeats.
    """

    tets: tuple[int, ...]
    shared: tuple[int, ...]
    anchor: int
    side: str

    def __len__(self):
        return len(self.tets)


def _ring_positions(base: Triangulation, e: int, tri_id: int):
    ring = base.edge_rings[e]
    if ring is None:
        raise UnknownSimplex(f"edge {e} has no closed ring")
    return [i for i, entry in enumerate(ring) if entry.exit_tri == tri_id]


def _ring_arcs(base: Triangulation, e: int, keep_a: int, keep_b: int):
    """Both arcs between the keep triangles: (tets, conversions) per side."""
    ring = base.edge_rings[e]
    pos_a = _ring_positions(base, e, keep_a)
    pos_b = _ring_positions(base, e, keep_b)
    if keep_a == keep_b:
        raise NotSeparating("endpoint triangles coincide")
    if len(pos_a) != 1 or len(pos_b) != 1:
        raise NotSeparating("keep triangle meets the edge more than once")
    a, b = pos_a[0], pos_b[0]
    r = len(ring)
    upper_idx = [(a + k) % r for k in range(1, (b - a) % r + 1)]
    lower_idx = [(a - k) % r for k in range(0, (a - b) % r)]
    upper = (
        tuple(ring[i].tet for i in upper_idx),
        tuple(ring[i].exit_tri for i in upper_idx[:-1]),
    )
    lower = (
        tuple(ring[i].tet for i in lower_idx),
        tuple(ring[(i - 1) % r].exit_tri for i in lower_idx[:-1]),
    )
    return upper, lower


def edge_star_chain(state: PaintState, edge, side: str, endpoints) -> SChain:
    """The s-chain of tetrahedra on one side of the edge between two
    black endpoint triangles, oriented from the first to the second."""
    e = _coerce_index(edge, 1)
    keep_a = _coerce_index(endpoints[0], 2)
    keep_b = _coerce_index(endpoints[1], 2)
    base = state.base
    if e not in state.black_edges:
        raise PreconditionUnmet(f"edge {e} is not black")
    for f in (keep_a, keep_b):
        if not 0 <= f < base.triangle_count or e not in base.tri_edge_ids[f]:
            raise UnknownSimplex(f"triangle {f} is not incident to edge {e}")
        if f not in state.black_tris:
            raise PreconditionUnmet(f"endpoint triangle {f} is not black")
    if side not in ("upper", "lower"):
        raise ValueError(f"unknown side {side!r}")
    upper, lower = _ring_arcs(base, e, keep_a, keep_b)
    tets, shared = upper if side == "upper" else lower
    if len(set(tets)) != len(tets):
        raise NotSeparating("arc revisits a tetrahedron")
    return SChain(tets=tets, shared=shared, anchor=e, side=side)


# -- Lemma 6: clear an edge of extra black triangles -------------------


def clear_edge(
    state: PaintState,
    edge,
    keep,
    protected_tris=(),
    protected_edges=(),
    protected_verts=(),
) -> PaintState:
    """Rebuild so the edge carries exactly the two keep triangles.

    Along each side arc, from the first black conversion onwards, the
    chain tetrahedra are cancelled and re-extended through the
    conversions: conversions turn white, every other face of the
    cancelled tetrahedra turns black, dead ends are repaired and
    incidental free triangles retracted.  Black triangles not incident
    to the ring tetrahedra are untouched.
    """
    e = _coerce_index(edge, 1)
    keep_a = _coerce_index(keep[0], 2)
    keep_b = _coerce_index(keep[1], 2)
    base = state.base
    for f in (keep_a, keep_b):
        if not 0 <= f < base.triangle_count or e not in base.tri_edge_ids[f]:
            raise UnknownSimplex(f"keep triangle {f} is not incident to edge {e}")
        if f not in state.black_tris:
            raise PreconditionUnmet(f"keep triangle {f} is not black")
    if keep_a == keep_b:
        raise NotSeparating("keep triangles coincide")
    if state.edge_multiplicity[e] < 2:
        raise PreconditionUnmet(f"edge {e} has multiplicity {state.edge_multiplicity[e]}")
    if state.edge_multiplicity[e] == 2:
        return state     # already standard by this edge

    upper, lower = _ring_arcs(base, e, keep_a, keep_b)
    keeps = {keep_a, keep_b}
    work = _Work(
        state,
        protected_tris=set(protected_tris) | keeps,
        protected_edges=set(protected_edges) | {e},
        protected_verts=protected_verts,
    )

    cancel = set()
    whiten = set()
    ring_tets = set()
    for tets, convs in (upper, lower):
        ring_tets.update(tets)
        first_black = None
        for k, f in enumerate(convs):
            if f in state.black_tris:
                first_black = k
                break
        if first_black is None:
            continue
        cancel.update(tets[first_black + 1:])
        whiten.update(convs[first_black:])
    if whiten & keeps:
        raise Anomaly("keep triangle sits inside a conversion arc")

    for t in sorted(cancel):
        for f in base.tet_faces(t):
            work.blacken_tri(f)
    for f in sorted(whiten):
        work.whiten_tri(f)
    work.record("repaint", (e,))

    allowed = {f for t in ring_tets for f in base.tet_faces(t)}
    work.repair_dead_ends(allowed_tris=allowed)
    work.collapse_free_local(allowed)

    if work.mult[e] != 2:
        raise Anomaly(f"edge {e} still has multiplicity {work.mult[e]}")
    return work.freeze(state, "clear_edge", (e, keep_a, keep_b))


def repair_dead_ends(state: PaintState, protected=()) -> PaintState:
    """Standalone connectivity repair: whiten one frontier triangle per
    cut-off component until the white dual graph is connected."""
    work = _Work(state, protected_tris=protected)
    work.repair_dead_ends()
    if not work.records:
        return state
    trace = state.trace
    for rec_op, rec_args, bt, be, bv, chi in work.records:
        trace = trace.append(rec_op, rec_args, bt, be, bv, chi)
    return PaintState(
        base=state.base,
        black_tris=frozenset(work.tris),
        black_edges=frozenset(work.edges),
        black_verts=frozenset(work.verts),
        trace=trace,
    )


# -- Lemma 7: pyramids, partitions, flowers at a vertex ----------------


@dataclass(frozen=True)
class PyramidReport:
    vertex: int
    side: str
    pyramids: tuple          # (triangles, oval link-edge keys) per component with a cycle
    partitions: tuple        # triangle tuples for the tree components
    flowers: tuple           # (edge id, attached edge ids, attached triangle ids)


def _link_sides(link):
    """Canonical (corner, face) key per undirected link edge."""
    out = {}
    for key, label in link.edge_label.items():
        partner = link.side_gluing.get(key)
        canon = min(key, partner) if partner is not None else key
        out.setdefault(canon, label)
    return out


def _keep_trace_sides(link, keep_set):
    sides = set()
    for key, label in link.edge_label.items():
        if label in keep_set:
            sides.add(key)
            partner = link.side_gluing.get(key)
            if partner is not None:
                sides.add(partner)
    return sides


def _link_components(link, blocked_sides):
    n = link.triangle_count
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for key, (j, f2) in link.side_gluing.items():
        if key in blocked_sides:
            continue
        i = key[0]
        ra, rb = find(i), find(j)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(i) for i in range(n)]


def detect_pyramids(state: PaintState, vertex, side_cycle, side: str = "upper") -> PyramidReport:
    """Classify the black traces on one side of the keep cycle at a vertex.

    ``side_cycle`` is given by the manifold triangles whose traces form
    the separating cycle in the vertex link.  Components of the black
    trace graph are pyramids when they contain a separating oval and
    partitions otherwise; isolated trace points are flower attachments.
    """
    v = _coerce_index(vertex, 0)
    keep_set = {_coerce_index(f, 2) for f in side_cycle}
    base = state.base
    link = base.vertex_link(v)
    for f in keep_set:
        if v not in base.tri_vertex_ids[f]:
            raise UnknownSimplex(f"triangle {f} does not contain vertex {v}")
    blocked = _keep_trace_sides(link, keep_set)
    comp = _link_components(link, blocked)
    comp_ids = sorted(set(comp))
    if len(comp_ids) != 2:
        raise NotSeparating(f"keep cycle splits the link into {len(comp_ids)} parts")
    chosen = comp_ids[0] if side == "upper" else comp_ids[1]
    corners = {i for i in range(link.triangle_count) if comp[i] == chosen}

    black = state.black_tris
    # black trace edges strictly on the chosen side
    trace_edges = {}
    for key, label in _link_sides(link).items():
        if label in keep_set or label not in black:
            continue
        i = key[0]
        j = link.side_gluing[key][0] if key in link.side_gluing else i
        if i in corners and j in corners:
            trace_edges[key] = label

    # exterior region: flood from cycle-adjacent corners across white sides
    start = {key[0] for key in blocked if key[0] in corners}
    exterior = set(start)
    queue = deque(start)
    while queue:
        i = queue.popleft()
        for f in range(4):
            if f == link.corners[i][1]:
                continue
            key = (i, f)
            canon = min(key, link.side_gluing[key]) if key in link.side_gluing else key
            if canon in trace_edges or key in blocked:
                continue
            if key in link.side_gluing:
                j = link.side_gluing[key][0]
                if j in corners and j not in exterior:
                    exterior.add(j)
                    queue.append(j)

    # component analysis over link vertices
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    edge_verts = {}
    for key in trace_edges:
        (i, f) = key
        t, vs = link.corners[i]
        lv = [link.vertex_of_side[(i, u)] for u in range(4) if u not in (vs, f)]
        edge_verts[key] = tuple(lv)
        for x in lv:
            parent.setdefault(x, x)
        union(lv[0], lv[1])

    groups = {}
    for key in trace_edges:
        root = find(edge_verts[key][0])
        groups.setdefault(root, []).append(key)

    pyramids = []
    partitions = []
    for root in sorted(groups):
        keys = groups[root]
        vset = {x for key in keys for x in edge_verts[key]}
        tri_ids = tuple(sorted({trace_edges[key] for key in keys}))
        if len(keys) >= len(vset):      # connected with a cycle
            oval = tuple(
                sorted(
                    key
                    for key in keys
                    if (key[0] in exterior)
                    != (link.side_gluing[key][0] in exterior if key in link.side_gluing else False)
                )
            )
            pyramids.append((tri_ids, oval))
        else:
            partitions.append(tri_ids)

    # flowers: black edges at v whose trace vertex on this side is isolated
    covered = {x for key in trace_edges for x in edge_verts[key]}
    cycle_verts = set()
    for (i, f) in blocked:
        vs = link.corners[i][1]
        for u in range(4):
            if u not in (vs, f):
                cycle_verts.add(link.vertex_of_side[(i, u)])
    flowers = []
    seen_edges = set()
    for i in sorted(corners):
        vs = link.corners[i][1]
        for u in range(4):
            if u == vs:
                continue
            lv = link.vertex_of_side[(i, u)]
            e_id = link.vertex_labels[lv]
            if (
                e_id in seen_edges
                or e_id not in state.black_edges
                or lv in covered
                or lv in cycle_verts
            ):
                continue
            seen_edges.add(e_id)
            ed, tr = _attached_subcomplex(state, e_id, v)
            flowers.append((e_id, ed, tr))

    return PyramidReport(
        vertex=v,
        side=side,
        pyramids=tuple(pyramids),
        partitions=tuple(partitions),
        flowers=tuple(sorted(flowers)),
    )


def _attached_subcomplex(state: PaintState, e_id: int, v: int):
    """Black simplexes reachable from the edge without passing through v."""
    base = state.base
    tail, head = base.edge_vertex_ids[e_id]
    seeds = [x for x in (tail, head) if x != v]
    seen_v = set(seeds)
    seen_e = {e_id}
    seen_f = set()
    queue = deque(seeds)
    while queue:
        x = queue.popleft()
        for e in base.edges_of_vertex[x]:
            if e in state.black_edges and e not in seen_e:
                seen_e.add(e)
                for y in base.edge_vertex_ids[e]:
                    if y != v and y not in seen_v:
                        seen_v.add(y)
                        queue.append(y)
        for f in base.tris_of_vertex[x]:
            if f in state.black_tris:
                seen_f.add(f)
    seen_e.discard(e_id)
    return tuple(sorted(seen_e)), tuple(sorted(seen_f))


def clear_vertex(
    state: PaintState,
    vertex,
    keep_cycle,
    protected_tris=(),
    protected_edges=(),
    protected_verts=(),
) -> PaintState:
    """Erode every pyramid and partition at the vertex.

    Repeatedly the nearest reachable black triangle at the vertex (by
    breadth-first search from the keep trace through white link edges)
    is crossed: its far tetrahedron is cancelled and re-extended through
    it, dead ends are repaired, free triangles retracted.  Afterwards no
    black triangle other than the keeps touches the vertex; isolated
    edges at the vertex are retracted from their free far end, while
    semi-isolated edges (flowers) remain.
    """
    v = _coerce_index(vertex, 0)
    keep_set = {_coerce_index(f, 2) for f in keep_cycle}
    base = state.base
    for f in keep_set:
        if v not in base.tri_vertex_ids[f]:
            raise UnknownSimplex(f"keep triangle {f} does not contain vertex {v}")
        if f not in state.black_tris:
            raise PreconditionUnmet(f"keep triangle {f} is not black")
    link = base.vertex_link(v)
    blocked = _keep_trace_sides(link, keep_set)
    comp = _link_components(link, blocked)
    n_sides = len(set(comp))
    if keep_set and n_sides > 2:
        raise NotSeparating(f"keep trace splits the link into {n_sides} parts")

    work = _Work(
        state,
        protected_tris=set(protected_tris) | keep_set,
        protected_edges=protected_edges,
        protected_verts=set(protected_verts) | {v},
    )
    budget = 4 * link.triangle_count + 16
    touched = set()

    def black_at_v():
        return [
            f
            for f in sorted(work.tris)
            if v in base.tri_vertex_ids[f] and f not in work.protected_tris
        ]

    while True:
        work.collapse_free_local(set(black_at_v()) | touched)
        remaining = black_at_v()
        if not remaining:
            break
        if budget <= 0:
            raise Anomaly(f"vertex {v} not cleared within the move budget")
        # only erode genuine pyramid surfaces: crossing a wall whose far
        # corner is already reachable cannot shrink anything
        crossing = _nearest_black_side(work, link, blocked, v)
        if crossing is None:
            raise Anomaly(
                f"vertex {v} keeps black triangles that neither erode nor collapse"
            )
        key, label = crossing
        far_corner = link.side_gluing[key][0]
        t_far = link.corners[far_corner][0]
        for f in base.tet_faces(t_far):
            work.blacken_tri(f)
        work.whiten_tri(label)
        work.record("repaint", (v, label))
        touched.update(base.tet_faces(t_far))
        budget -= 1
        work.repair_dead_ends(allowed_tris=_grow_allowed(work, touched))
        work.collapse_free_local(set(black_at_v()) | touched)

    work.collapse_isolated_at(v)
    return work.freeze(state, "clear_vertex", (v,) + tuple(sorted(keep_set)))


def _grow_allowed(work, touched):
    allowed = set(touched)
    for f in touched:
        for t in work.base.tets_of_tri[f]:
            allowed.update(work.base.tet_faces(t))
    return allowed


def _nearest_black_side(work, link, blocked, v):
    """BFS from the keep trace across white link edges; returns the
    closest black non-protected link side whose far corner is not
    otherwise reachable (a pyramid surface, not a wall)."""
    base = work.base
    start = sorted({key[0] for key in blocked})
    if not start:
        start = [0] if link.triangle_count else []
    dist = {i: 0 for i in start}
    queue = deque(start)
    walls = []
    while queue:
        i = queue.popleft()
        for f in range(4):
            if f == link.corners[i][1]:
                continue
            key = (i, f)
            label = link.edge_label[key]
            if key in blocked:
                continue
            if label in work.tris:
                if label not in work.protected_tris and key in link.side_gluing:
                    walls.append((dist[i], label, key))
                continue
            if key in link.side_gluing:
                j = link.side_gluing[key][0]
                if j not in dist:
                    dist[j] = dist[i] + 1
                    queue.append(j)
    best = None
    for d, label, key in walls:
        far = link.side_gluing[key][0]
        if far in dist:
            continue               # both sides reachable: a wall, not a surface
        cand = (d, label, key)
        if best is None or cand < best:
            best = cand
    if best is None:
        return None
    return best[2], best[1]
