"""Closed 3-manifold triangulations given by face gluings.

A triangulation is a list of abstract tetrahedra, each with four faces
(face k is opposite vertex k), glued in pairs by vertex permutations.
The full simplex skeleton (vertices, edges, triangles with mutual
incidence) is derived eagerly at construction time by orbit computation,
so every move has O(1) incidence lookups.  Instances are immutable after
construction and safe to share between threads; every operation here is
a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    EmptyTriangulation,
    GluingSyntaxError,
    InvalidGluing,
    InvalidParameters,
    UnknownSimplex,
)

Perm = tuple[int, int, int, int]

IDENTITY: Perm = (0, 1, 2, 3)

# Slot pairs indexing the six edges of a tetrahedron, in scan order.
EDGE_SLOTS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def perm_inverse(p: Perm) -> Perm:
    q = [0] * 4
    for i, v in enumerate(p):
        q[v] = i
    return tuple(q)


def perm_compose(p: Perm, q: Perm) -> Perm:
    """Return p after q: (p*q)[i] = p[q[i]]."""
    return (p[q[0]], p[q[1]], p[q[2]], p[q[3]])


def perm_parity(seq) -> int:
    """+1 for an even arrangement of distinct comparables, -1 for odd."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class SimplexId:
    """Dimension-tagged index into one triangulation's skeleton.

    Indices are dense per dimension but are not stable across Pachner
    moves; moves return a fresh triangulation plus a correspondence map.
    """

    dim: int
    index: int

    def __post_init__(self):
        if not 0 <= self.dim <= 3:
            raise UnknownSimplex(f"dimension {self.dim} out of range")


def _coerce_index(s, dim: int) -> int:
    if isinstance(s, SimplexId):
        if s.dim != dim:
            raise UnknownSimplex(f"expected dimension {dim}, got {s.dim}")
        return s.index
    return int(s)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass
class RingEntry:
    """One corner of the cyclic tetrahedron ring around an edge."""

    tet: int
    pair: tuple[int, int]      # oriented slot pair carrying the edge class direction
    enter_face: int
    exit_face: int
    exit_tri: int              # triangle shared with the next ring entry


class Triangulation:
    """Immutable gluing table plus derived skeleton.

    ``gluings[t][f]`` is ``(t2, perm)`` where face f of tetrahedron t is
    glued to tetrahedron t2 and ``perm`` maps vertex slots of t to slots
    of t2 (so face f lands on face ``perm[f]``), or ``None`` for an
    unglued (boundary) face, which only the validator tolerates.
    """

    def __init__(self, gluings: Sequence[Sequence[Optional[tuple[int, Perm]]]]):
        gl = []
        for row in gluings:
            row = tuple(
                None if entry is None else (int(entry[0]), tuple(entry[1]))
                for entry in row
            )
            if len(row) != 4:
                raise InvalidGluing("each tetrahedron needs exactly 4 face entries")
            gl.append(row)
        self.gluings = tuple(gl)
        self.tet_count = len(gl)
        if self.tet_count == 0:
            raise EmptyTriangulation("no tetrahedra")
        self._check_pairing()
        self._build_triangles()
        self._build_vertices()
        self._build_edges()
        self._build_rings()
        self._build_boundary_data()

    # -- construction ------------------------------------------------

    def _check_pairing(self):
        n = self.tet_count
        for t, row in enumerate(self.gluings):
            for f, entry in enumerate(row):
                if entry is None:
                    continue
                t2, p = entry
                if not 0 <= t2 < n:
                    raise InvalidGluing(f"tet {t} face {f}: target tet {t2} out of range")
                if sorted(p) != [0, 1, 2, 3]:
                    raise InvalidGluing(f"tet {t} face {f}: {p} is not a permutation")
                f2 = p[f]
                if (t2, f2) == (t, f):
                    raise InvalidGluing(f"tet {t} face {f} glued to itself")
                back = self.gluings[t2][f2]
                if back is None or back[0] != t or back[1] != perm_inverse(p):
                    raise InvalidGluing(
                        f"tet {t} face {f} -> tet {t2} face {f2} is not involutive"
                    )

    def _build_triangles(self):
        self.tri_of = {}
        sides = []
        for t in range(self.tet_count):
            for f in range(4):
                if (t, f) in self.tri_of:
                    continue
                idx = len(sides)
                self.tri_of[(t, f)] = idx
                entry = self.gluings[t][f]
                if entry is None:
                    sides.append(((t, f),))
                else:
                    t2, p = entry
                    self.tri_of[(t2, p[f])] = idx
                    sides.append(((t, f), (t2, p[f])))
        self.tri_sides = tuple(sides)
        self.triangle_count = len(sides)

    def _build_vertices(self):
        n = self.tet_count
        uf = _UnionFind(4 * n)
        for t in range(n):
            for f in range(4):
                entry = self.gluings[t][f]
                if entry is None:
                    continue
                t2, p = entry
                for v in range(4):
                    if v != f:
                        uf.union(4 * t + v, 4 * t2 + p[v])
        self.vertex_of = {}
        roots = {}
        for t in range(n):
            for v in range(4):
                root = uf.find(4 * t + v)
                if root not in roots:
                    roots[root] = len(roots)
        corners = [[] for _ in roots]
        for t in range(n):
            for v in range(4):
                idx = roots[uf.find(4 * t + v)]
                self.vertex_of[(t, v)] = idx
                corners[idx].append((t, v))
        self.vertex_corners = tuple(tuple(c) for c in corners)
        self.vertex_count = len(corners)

    def _build_edges(self):
        n = self.tet_count
        slot_index = {pair: i for i, pair in enumerate(EDGE_SLOTS)}
        uf = _UnionFind(6 * n)
        for t in range(n):
            for f in range(4):
                entry = self.gluings[t][f]
                if entry is None:
                    continue
                t2, p = entry
                for (a, b) in EDGE_SLOTS:
                    if a == f or b == f:
                        continue
                    x, y = sorted((p[a], p[b]))
                    uf.union(6 * t + slot_index[(a, b)], 6 * t2 + slot_index[(x, y)])
        roots = {}
        for t in range(n):
            for i in range(6):
                root = uf.find(6 * t + i)
                if root not in roots:
                    roots[root] = len(roots)
        self.edge_of = {}
        corners = [[] for _ in roots]
        for t in range(n):
            for i, pair in enumerate(EDGE_SLOTS):
                idx = roots[uf.find(6 * t + i)]
                self.edge_of[(t, pair)] = idx
                corners[idx].append((t, pair))
        self.edge_corners = tuple(tuple(c) for c in corners)
        self.edge_count = len(corners)

    def _build_rings(self):
        """Walk the cyclic tetrahedron ring around every edge.

        The walk fixes the orientation of every corner relative to the
        class representative; a walk that fails to close, or closes with
        reversed orientation, marks the edge invalid for the validator.
        """
        self.edge_rings: list[Optional[list[RingEntry]]] = []
        self.edge_orient = {}
        self._bad_edges = []
        for e in range(self.edge_count):
            rep_t, rep_pair = self.edge_corners[e][0]
            a, b = rep_pair
            va, vb = self.vertex_of[(rep_t, a)], self.vertex_of[(rep_t, b)]
            direction = (a, b) if (va, a) <= (vb, b) else (b, a)
            ring, ok = self._walk_ring(e, rep_t, direction)
            if not ok or ring is None:
                self.edge_rings.append(ring)
                self._bad_edges.append(e)
                continue
            consistent = True
            for entry in ring:
                u, v = entry.pair
                key = (entry.tet, tuple(sorted((u, v))))
                sign = 1 if u < v else -1
                if key in self.edge_orient and self.edge_orient[key] != sign:
                    consistent = False
                self.edge_orient[key] = sign
            if not consistent or len(ring) != len(self.edge_corners[e]):
                self._bad_edges.append(e)
            self.edge_rings.append(ring)

    def _walk_ring(self, e, start_tet, start_dir):
        u, v = start_dir
        faces = [f for f in range(4) if f not in (u, v)]
        exit_face = min(faces)
        start = (start_tet, frozenset((u, v)))
        ring = []
        t, f = start_tet, exit_face
        limit = 6 * self.tet_count + 1
        for _ in range(limit):
            entry = self.gluings[t][f]
            tri = self.tri_of[(t, f)]
            enter = ({0, 1, 2, 3} - {u, v, f}).pop()
            ring.append(RingEntry(t, (u, v), enter, f, tri))
            if entry is None:
                return ring, False
            t2, p = entry
            u, v = p[u], p[v]
            enter2 = p[f]
            t = t2
            f = ({0, 1, 2, 3} - {u, v, enter2}).pop()
            if (t, frozenset((u, v))) == start:
                if (u, v) != start_dir:
                    return ring, False        # edge identified with itself reversed
                # rotate so entry faces line up cyclically
                return ring, ({0, 1, 2, 3} - set(start_dir) - {enter2}).pop() == exit_face
        return ring, False

    def _build_boundary_data(self):
        """Canonical vertex sequences and incidence used for chain complexes."""
        self.tri_class_seq = {}
        self.tri_seq = []
        for tri, sides in enumerate(self.tri_sides):
            t, f = sides[0]
            slots = [s for s in range(4) if s != f]
            seq = tuple(sorted(slots, key=lambda s: (self.vertex_of[(t, s)], s)))
            self.tri_class_seq[(t, f)] = seq
            self.tri_seq.append(seq)
            if len(sides) == 2:
                t2, f2 = sides[1]
                p = self.gluings[t][f][1]
                self.tri_class_seq[(t2, f2)] = tuple(p[s] for s in seq)
        self.tri_seq = tuple(self.tri_seq)

        self.tri_edge_ids = []
        self.tri_vertex_ids = []
        for tri, sides in enumerate(self.tri_sides):
            t, _ = sides[0]
            s0, s1, s2 = self.tri_seq[tri]
            self.tri_edge_ids.append(
                (
                    self.edge_of[(t, tuple(sorted((s1, s2))))],
                    self.edge_of[(t, tuple(sorted((s0, s2))))],
                    self.edge_of[(t, tuple(sorted((s0, s1))))],
                )
            )
            self.tri_vertex_ids.append(tuple(self.vertex_of[(t, s)] for s in (s0, s1, s2)))
        self.tri_edge_ids = tuple(self.tri_edge_ids)
        self.tri_vertex_ids = tuple(self.tri_vertex_ids)

        self.edge_vertex_ids = []
        for e in range(self.edge_count):
            t, (a, b) = self.edge_corners[e][0]
            va, vb = self.vertex_of[(t, a)], self.vertex_of[(t, b)]
            tail, head = ((va, vb) if (va, a) <= (vb, b) else (vb, va))
            self.edge_vertex_ids.append((tail, head))
        self.edge_vertex_ids = tuple(self.edge_vertex_ids)

        # edges of each tetrahedron face, and black-multiplicity support
        self.tet_face_edges = {}
        for t in range(self.tet_count):
            for f in range(4):
                slots = [s for s in range(4) if s != f]
                self.tet_face_edges[(t, f)] = tuple(
                    self.edge_of[(t, tuple(sorted((x, y))))]
                    for x, y in ((slots[0], slots[1]), (slots[0], slots[2]), (slots[1], slots[2]))
                )

        # incidences keyed by class id
        tris_of_edge = [[] for _ in range(self.edge_count)]
        for tri in range(self.triangle_count):
            for e in self.tri_edge_ids[tri]:
                tris_of_edge[e].append(tri)
        self.tris_of_edge = tuple(tuple(x) for x in tris_of_edge)

        edges_of_vertex = [[] for _ in range(self.vertex_count)]
        for e, (tail, head) in enumerate(self.edge_vertex_ids):
            edges_of_vertex[tail].append(e)
            edges_of_vertex[head].append(e)
        self.edges_of_vertex = tuple(tuple(x) for x in edges_of_vertex)

        tris_of_vertex = [[] for _ in range(self.vertex_count)]
        for tri in range(self.triangle_count):
            for v in self.tri_vertex_ids[tri]:
                tris_of_vertex[v].append(tri)
        self.tris_of_vertex = tuple(tuple(x) for x in tris_of_vertex)

        tets_of_tri = []
        for sides in self.tri_sides:
            tets_of_tri.append(tuple(t for t, _ in sides))
        self.tets_of_tri = tuple(tets_of_tri)

    # -- queries -----------------------------------------------------

    @property
    def euler_characteristic(self) -> int:
        return (
            self.vertex_count
            - self.edge_count
            + self.triangle_count
            - self.tet_count
        )

    def tet_faces(self, t: int) -> tuple[int, int, int, int]:
        return tuple(self.tri_of[(t, f)] for f in range(4))

    def edge_ring(self, e) -> list[tuple[int, int]]:
        """Cyclic ring of (tetrahedron, shared triangle) around an edge.

        Length counts tetrahedron corners, so a tetrahedron meeting the
        edge in two of its own edges appears twice.
        """
        e = _coerce_index(e, 1)
        if not 0 <= e < self.edge_count:
            raise UnknownSimplex(f"no edge {e}")
        ring = self.edge_rings[e]
        if ring is None:
            raise UnknownSimplex(f"edge {e} has no closed ring")
        return [(entry.tet, entry.exit_tri) for entry in ring]

    def vertex_link(self, v) -> "SurfaceComplex":
        v = _coerce_index(v, 0)
        if not 0 <= v < self.vertex_count:
            raise UnknownSimplex(f"no vertex {v}")
        return SurfaceComplex._from_link(self, v)

    # -- serialization ----------------------------------------------

    def serialize(self) -> str:
        lines = [f"tetrahedra {self.tet_count}"]
        for t, row in enumerate(self.gluings):
            parts = []
            for entry in row:
                if entry is None:
                    raise InvalidGluing("cannot serialize a triangulation with boundary")
                t2, p = entry
                parts.append(f"{t2}/{''.join(str(x) for x in p)}")
            lines.append(f"tet {t}: " + " ".join(parts))
        return "\n".join(lines) + "\n"


def parse_triangulation(text: str) -> Triangulation:
    """Parse the gluing file format.

    ``%`` begins a comment; blank lines are ignored.  Raises
    GluingSyntaxError with line and column on malformed input,
    InvalidGluing on bad pairings, EmptyTriangulation on N < 1.
    """
    lines = text.splitlines()
    items = []
    for ln, raw in enumerate(lines, start=1):
        body = raw.split("%", 1)[0]
        if body.strip():
            items.append((ln, body))
    if not items:
        raise GluingSyntaxError("missing 'tetrahedra <N>' header", 1)
    ln, header = items[0]
    fields = header.split()
    if len(fields) != 2 or fields[0] != "tetrahedra":
        raise GluingSyntaxError("expected 'tetrahedra <N>'", ln, header.find(fields[0][0]) if fields else 0)
    try:
        n = int(fields[1])
    except ValueError:
        raise GluingSyntaxError(f"bad tetrahedron count {fields[1]!r}", ln)
    if n < 1:
        raise EmptyTriangulation(f"tetrahedra {n}")
    rows = {}
    for ln, body in items[1:]:
        fields = body.split()
        if len(fields) != 6 or fields[0] != "tet" or not fields[1].endswith(":"):
            raise GluingSyntaxError("expected 'tet <i>: j/pppp j/pppp j/pppp j/pppp'", ln)
        try:
            t = int(fields[1][:-1])
        except ValueError:
            raise GluingSyntaxError(f"bad tetrahedron index {fields[1]!r}", ln)
        if not 0 <= t < n or t in rows:
            raise GluingSyntaxError(f"tetrahedron index {t} out of range or repeated", ln)
        row = []
        for k, tok in enumerate(fields[2:]):
            col = body.find(tok)
            if "/" not in tok:
                raise GluingSyntaxError(f"face entry {tok!r} missing '/'", ln, col)
            left, right = tok.split("/", 1)
            try:
                t2 = int(left)
            except ValueError:
                raise GluingSyntaxError(f"bad target tetrahedron {left!r}", ln, col)
            if len(right) != 4 or not right.isdigit():
                raise GluingSyntaxError(f"bad permutation {right!r}", ln, col)
            p = tuple(int(c) for c in right)
            if sorted(p) != [0, 1, 2, 3]:
                raise GluingSyntaxError(f"{right!r} is not a permutation of 0123", ln, col)
            row.append((t2, p))
        rows[t] = row
    missing = [t for t in range(n) if t not in rows]
    if missing:
        raise GluingSyntaxError(f"missing gluing line for tet {missing[0]}", len(lines) + 1)
    return Triangulation([rows[t] for t in range(n)])


# -- validation ------------------------------------------------------


@dataclass
class ValidationReport:
    tet_count: int
    vertex_count: int
    edge_count: int
    triangle_count: int
    euler_characteristic: int
    connected: bool
    edge_ring_lengths: tuple[int, ...]
    vertex_link_chis: tuple[int, ...]
    failures: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures


def validate_closed_manifold(tri: Triangulation) -> ValidationReport:
    """Check the combinatorial closed-manifold conditions.

    Failures are reported, not raised: boundary faces, edge rings that
    do not close (or close reversed), vertex links that are not
    2-spheres, nonzero Euler characteristic, disconnectedness.
    """
    failures = []
    for t in range(tri.tet_count):
        for f in range(4):
            if tri.gluings[t][f] is None:
                failures.append(("BoundaryFace", f"tet {t} face {f} unglued"))
    for sides in tri.tri_sides:
        if len(sides) != 2:
            t, f = sides[0]
            failures.append(("BoundaryFace", f"triangle at tet {t} face {f} has one side"))

    ring_lengths = []
    for e in range(tri.edge_count):
        ring = tri.edge_rings[e]
        ring_lengths.append(len(ring) if ring else 0)
        if e in tri._bad_edges:
            failures.append(("BadEdgeLink", f"edge {e} ring does not close cleanly"))

    link_chis = []
    for v in range(tri.vertex_count):
        try:
            link = tri.vertex_link(v)
        except UnknownSimplex:
            link_chis.append(0)
            failures.append(("BadVertexLink", f"vertex {v} link not computable"))
            continue
        link_chis.append(link.euler_characteristic)
        if not link.closed:
            failures.append(("BadVertexLink", f"vertex {v} link is not closed"))
        elif link.euler_characteristic != 2 or not link.connected:
            failures.append(
                (
                    "BadVertexLink",
                    f"vertex {v} link has chi={link.euler_characteristic}"
                    f" connected={link.connected}",
                )
            )

    if tri.euler_characteristic != 0:
        failures.append(("EulerNonZero", f"chi={tri.euler_characteristic}"))

    uf = _UnionFind(tri.tet_count)
    for t in range(tri.tet_count):
        for f in range(4):
            entry = tri.gluings[t][f]
            if entry is not None:
                uf.union(t, entry[0])
    connected = len({uf.find(t) for t in range(tri.tet_count)}) == 1
    if not connected:
        failures.append(("Disconnected", "gluing graph is not connected"))

    return ValidationReport(
        tet_count=tri.tet_count,
        vertex_count=tri.vertex_count,
        edge_count=tri.edge_count,
        triangle_count=tri.triangle_count,
        euler_characteristic=tri.euler_characteristic,
        connected=connected,
        edge_ring_lengths=tuple(ring_lengths),
        vertex_link_chis=tuple(link_chis),
        failures=failures,
    )


# -- vertex links ----------------------------------------------------


class SurfaceComplex:
    """Triangulated surface with labels back into the parent 3-manifold.

    Link triangles are tetrahedron corners at the vertex, link edges are
    traces of the manifold triangles through it, link vertices are traces
    of the manifold edges.
    """

    def __init__(self):
        self.corners = ()
        self.corner_index = {}
        self.side_gluing = {}
        self.edge_label = {}
        self.vertex_of_side = {}
        self.vertex_labels = ()
        self.vertex_count = 0
        self.edge_count = 0

    @classmethod
    def _from_link(cls, tri: Triangulation, v: int) -> "SurfaceComplex":
        self = cls()
        corners = tri.vertex_corners[v]
        self.corners = tuple(corners)
        self.corner_index = {c: i for i, c in enumerate(corners)}
        sides = {}
        edge_label = {}
        for i, (t, vs) in enumerate(corners):
            for f in range(4):
                if f == vs:
                    continue
                entry = tri.gluings[t][f]
                edge_label[(i, f)] = tri.tri_of[(t, f)]
                if entry is None:
                    continue
                t2, p = entry
                j = self.corner_index.get((t2, p[vs]))
                if j is None:
                    raise UnknownSimplex("link side leaves the vertex star")
                sides[(i, f)] = (j, p[f])
        self.side_gluing = sides
        self.edge_label = edge_label

        # link vertices: orbits of (corner, other-slot) under side gluings
        slot_ids = {}
        order = []
        for i, (t, vs) in enumerate(corners):
            for u in range(4):
                if u != vs:
                    slot_ids[(i, u)] = len(order)
                    order.append((i, u))
        uf = _UnionFind(len(order))
        for (i, f), (j, f2) in sides.items():
            t, vs = corners[i]
            p = tri.gluings[t][f][1]
            for u in range(4):
                if u not in (vs, f):
                    uf.union(slot_ids[(i, u)], slot_ids[(j, p[u])])
        roots = {}
        labels = []
        for k, (i, u) in enumerate(order):
            r = uf.find(k)
            if r not in roots:
                roots[r] = len(roots)
                t, vs = corners[i]
                labels.append(tri.edge_of[(t, tuple(sorted((vs, u))))])
        self.vertex_of_side = {key: roots[uf.find(k)] for k, key in zip(range(len(order)), order)}
        self.vertex_labels = tuple(labels)
        self.vertex_count = len(roots)

        paired = set()
        n_edges = 0
        for key in edge_label:
            if key in paired:
                continue
            partner = sides.get(key)
            if partner is not None:
                paired.add(partner)
            n_edges += 1
        self.edge_count = n_edges
        return self

    @property
    def triangle_count(self) -> int:
        return len(self.corners)

    @property
    def closed(self) -> bool:
        return all(key in self.side_gluing for key in self.edge_label)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + self.triangle_count

    @property
    def connected(self) -> bool:
        if not self.corners:
            return True
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            t_vs = self.corners[i]
            for f in range(4):
                if f == t_vs[1]:
                    continue
                entry = self.side_gluing.get((i, f))
                if entry and entry[0] not in seen:
                    seen.add(entry[0])
                    stack.append(entry[0])
        return len(seen) == len(self.corners)


# -- generators ------------------------------------------------------

# One-vertex 2-tetrahedron 3-sphere found by exhaustive search over
# 2-tetrahedron gluing tables (scripts/find_minimal_s3.py); certified by
# the validator and the homology oracle in the test suite.
_MINIMAL_S3_TABLE = """tetrahedra 2
tet 0: 0/1023 0/1023 1/1203 1/0231
tet 1: 0/2013 0/0312 1/0132 1/0132
"""


def generate(kind: str) -> Triangulation:
    """Bundled census: boundary4simplex, minimal-s3, lens(p,q)."""
    if kind == "boundary4simplex":
        return _boundary_4_simplex()
    if kind == "minimal-s3":
        return _minimal_s3()
    if kind.startswith("lens"):
        params = kind[4:].lstrip(":").lstrip("(").rstrip(")")
        try:
            p, q = (int(x) for x in params.split(","))
        except ValueError:
            raise InvalidParameters(f"cannot parse lens parameters from {kind!r}")
        return lens_space(p, q)
    raise InvalidParameters(f"unknown census member {kind!r}")


def _boundary_4_simplex() -> Triangulation:
    """The 5-tetrahedron boundary of the 4-simplex on vertices 0..4."""
    verts = [tuple(v for v in range(5) if v != i) for i in range(5)]
    gluings = []
    for i in range(5):
        row = []
        for k in range(4):
            g = verts[i][k]                     # global vertex opposite this face
            target = verts[g]
            perm = [0] * 4
            for m in range(4):
                if m == k:
                    perm[m] = target.index(i)
                else:
                    perm[m] = target.index(verts[i][m])
            row.append((g, tuple(perm)))
        gluings.append(row)
    return Triangulation(gluings)


def _minimal_s3() -> Triangulation:
    return parse_triangulation(_MINIMAL_S3_TABLE)


def lens_space(p: int, q: int) -> Triangulation:
    """Lens space L(p, q) as p tetrahedra around a bipyramid axis.

    The solid p-gonal bipyramid is split into tetrahedra {N, S, r_i,
    r_i+1}; the top face of slice i is glued to the bottom face of slice
    i+q with N sent to S, realizing the 2*pi*q/p twist.  Requires p >= 2,
    1 <= q < p, gcd(p, q) = 1.
    """
    import math

    if p < 2 or not 1 <= q < p or math.gcd(p, q) != 1:
        raise InvalidParameters(f"lens({p},{q}) needs p >= 2, 1 <= q < p, gcd = 1")
    # slice i has local slots 0 = N, 1 = S, 2 = r_i, 3 = r_(i+1)
    gluings = []
    for i in range(p):
        row = [None] * 4
        # face 3 (N, S, r_i) <-> face 2 of slice i-1 (its N, S, r_(i))
        row[3] = ((i - 1) % p, (0, 1, 3, 2))
        row[2] = ((i + 1) % p, (0, 1, 3, 2))
        # face 1 = top (N, r_i, r_i+1) -> bottom face 0 of slice i+q
        row[1] = ((i + q) % p, (1, 0, 2, 3))
        # face 0 = bottom (S, r_i, r_i+1) <- top of slice i-q
        row[0] = ((i - q) % p, (1, 0, 2, 3))
        gluings.append(row)
    return Triangulation(gluings)


def barycentric_subdivision(tri: Triangulation) -> Triangulation:
    """Replace every tetrahedron by its 24 barycentric cells.

    Cells are indexed by vertex orderings (flags); slot d of a cell is
    the barycenter of the flag's d-skeleton prefix, so all gluing
    permutations are the identity.  The result triangulates the same
    manifold with every simplex embedded, which restores the genericity
    the collapse and polygon moves assume on coarse inputs.
    """
    from itertools import permutations as _perms

    perms = sorted(_perms(range(4)))
    pidx = {p: i for i, p in enumerate(perms)}
    rows = []
    for t in range(tri.tet_count):
        for pi in perms:
            row = [None] * 4
            for k in range(3):
                q = list(pi)
                q[k], q[k + 1] = q[k + 1], q[k]
                row[k] = (24 * t + pidx[tuple(q)], IDENTITY)
            entry = tri.gluings[t][pi[3]]
            if entry is None:
                raise InvalidGluing("cannot subdivide a triangulation with boundary")
            t2, p = entry
            q = tuple(p[x] for x in pi)
            row[3] = (24 * t2 + pidx[q], IDENTITY)
            rows.append(row)
    return Triangulation(rows)
