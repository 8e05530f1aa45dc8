"""Integer simplicial homology and a heuristic pi_1 presentation.

The chain complexes here come from three sources: a whole triangulation
(dimensions 0..3), the black subcomplex of a paint state (dimensions
0..2), or an abstract simplicial complex given by maximal simplices
(the independent oracle path used by the tests).  Boundary signs follow
each cell's canonical vertex sequence, ordered by global vertex index
with slot order breaking ties in degenerate (identified-face) cells;
d(d) = 0 is asserted on construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .errors import DisconnectedComplex, OverflowGuard
from .triangulation import Triangulation, perm_parity

Matrix = list[list[int]]


def smith_normal_form(m: Matrix, entry_limit: int | None = None) -> tuple[tuple[int, ...], int]:
    """Invariant factors d1 | d2 | ... and the rank of an integer matrix.

    Deterministic smallest-pivot reduction; Python integers are arbitrary
    precision, so ``entry_limit`` exists only to emulate a fixed-width
    guard (raises OverflowGuard when an intermediate entry exceeds it).
    """
    a = [list(row) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    factors = []
    t = 0
    while t < rows and t < cols:
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = abs(a[i][j])
                if v and (best is None or v < best):
                    best, pivot = v, (i, j)
            if best == 1:
                break
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            a[t], a[pi] = a[pi], a[t]
        if pj != t:
            for row in a:
                row[t], row[pj] = row[pj], row[t]
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
        while True:
            for i in range(t + 1, rows):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    if q:
                        a[i] = [x - q * y for x, y in zip(a[i], a[t])]
            for j in range(t + 1, cols):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    if q:
                        for row in a:
                            row[j] -= q * row[t]
            col_dirty = any(a[i][t] for i in range(t + 1, rows))
            row_dirty = any(a[t][j] for j in range(t + 1, cols))
            if not col_dirty and not row_dirty:
                offender = None
                for i in range(t + 1, rows):
                    for j in range(t + 1, cols):
                        if a[i][j] % a[t][t]:
                            offender = i
                            break
                    if offender is not None:
                        break
                if offender is None:
                    break
                # pull a non-divisible row up so the pivot shrinks to the gcd
                a[t] = [x + y for x, y in zip(a[t], a[offender])]
                continue
            best = abs(a[t][t])
            for i in range(t + 1, rows):
                v = abs(a[i][t])
                if v and v < best:
                    a[t], a[i] = a[i], a[t]
                    best = v
            for j in range(t + 1, cols):
                v = abs(a[t][j])
                if v and v < best:
                    for row in a:
                        row[t], row[j] = row[j], row[t]
                    best = v
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
            if entry_limit is not None:
                worst = max(abs(x) for row in a for x in row)
                if worst > entry_limit:
                    raise OverflowGuard(f"entry {worst} exceeds limit {entry_limit}")
        factors.append(a[t][t])
        t += 1
    return tuple(factors), len(factors)


@dataclass(frozen=True)
class HomologyProfile:
    """Betti numbers and torsion coefficients per dimension."""

    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]

    def group(self, d: int) -> tuple[int, tuple[int, ...]]:
        if d >= len(self.betti):
            return (0, ())
        return (self.betti[d], self.torsion[d])

    def is_trivial(self, d: int) -> bool:
        return self.group(d) == (0, ())

    def format_group(self, d: int) -> str:
        """Compact form used in verdict details: Z, Z^2+Z/3, Z/2, 0."""
        b, tor = self.group(d)
        parts = []
        if b == 1:
            parts.append("Z")
        elif b > 1:
            parts.append(f"Z^{b}")
        parts.extend(f"Z/{t}" for t in tor)
        return "+".join(parts) if parts else "0"

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** d * b for d, b in enumerate(self.betti))


def _dir_sign(tri: Triangulation, t: int, x: int, y: int) -> int:
    """Sign of the directed side x->y against its edge class direction."""
    pair = (x, y) if x < y else (y, x)
    orient = tri.edge_orient.get((t, pair), 1)
    return orient if (x, y) == pair else -orient


class ChainComplex:
    """Cells per dimension plus integer boundary matrices.

    ``boundary[d]`` has one row per (d-1)-cell and one column per d-cell.
    ``edge_ends[j]`` gives (tail, head) vertex rows of edge cell j, and
    ``tri_paths[j]`` the ordered signed sides of triangle cell j; both are
    kept explicitly because loop edges have zero boundary columns.
    """

    def __init__(self, cells, boundary, edge_ends=None, tri_paths=None):
        self.cells = cells
        self.boundary = boundary
        self.dim = len(cells) - 1
        self.edge_ends = edge_ends
        self.tri_paths = tri_paths
        self._assert_dd_zero()

    def _assert_dd_zero(self):
        for d in range(2, self.dim + 1):
            lower = self.boundary[d - 1]
            upper = self.boundary[d]
            rows = len(self.cells[d - 2])
            mid = len(self.cells[d - 1])
            cols = len(self.cells[d])
            for j in range(cols):
                hot = [k for k in range(mid) if upper[k][j]]
                for i in range(rows):
                    s = sum(lower[i][k] * upper[k][j] for k in hot)
                    if s != 0:
                        raise AssertionError(f"dd != 0 at dim {d}, cell {j}")

    def cell_counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cells)

    @classmethod
    def from_triangulation(cls, tri: Triangulation) -> "ChainComplex":
        return _complex_from_black(
            tri,
            range(tri.triangle_count),
            range(tri.edge_count),
            range(tri.vertex_count),
            with_tets=True,
        )

    @classmethod
    def from_black_complex(cls, tri, black_tris, black_edges, black_verts) -> "ChainComplex":
        return _complex_from_black(tri, black_tris, black_edges, black_verts, with_tets=False)

    @classmethod
    def from_simplices(cls, simplices) -> "ChainComplex":
        """Abstract simplicial complex from its (maximal) simplices.

        Vertices are arbitrary sortable labels; the downward closure is
        generated automatically.  Standard ordered-simplex signs.
        """
        by_dim: dict[int, set] = {}
        for s in simplices:
            s = tuple(sorted(s))
            if len(set(s)) != len(s) or not s:
                raise ValueError(f"bad simplex {s}")
            for k in range(1, len(s) + 1):
                for face in combinations(s, k):
                    by_dim.setdefault(k - 1, set()).add(face)
        top = max(by_dim) if by_dim else 0
        cells = [sorted(by_dim.get(d, ())) for d in range(top + 1)]
        index = [{c: i for i, c in enumerate(layer)} for layer in cells]
        boundary = {}
        for d in range(1, top + 1):
            mat = [[0] * len(cells[d]) for _ in range(len(cells[d - 1]))]
            for j, cell in enumerate(cells[d]):
                for i in range(len(cell)):
                    face = cell[:i] + cell[i + 1:]
                    mat[index[d - 1][face]][j] += (-1) ** i
            boundary[d] = mat
        edge_ends = None
        tri_paths = None
        if top >= 1:
            edge_ends = [
                (index[0][(a,)], index[0][(b,)]) for (a, b) in cells[1]
            ]
        if top >= 2:
            tri_paths = []
            for (a, b, c) in cells[2]:
                tri_paths.append(
                    (
                        (index[1][(a, b)], 1),
                        (index[1][(b, c)], 1),
                        (index[1][(a, c)], -1),
                    )
                )
        return cls(cells, boundary, edge_ends, tri_paths)


def _complex_from_black(tri, black_tris, black_edges, black_verts, with_tets):
    cells = [sorted(black_verts), sorted(black_edges), sorted(black_tris)]
    vrow = {v: i for i, v in enumerate(cells[0])}
    erow = {e: i for i, e in enumerate(cells[1])}
    frow = {f: i for i, f in enumerate(cells[2])}

    b1 = [[0] * len(cells[1]) for _ in range(len(cells[0]))]
    edge_ends = []
    for j, e in enumerate(cells[1]):
        tail, head = tri.edge_vertex_ids[e]
        edge_ends.append((vrow[tail], vrow[head]))
        b1[vrow[head]][j] += 1
        b1[vrow[tail]][j] -= 1

    b2 = [[0] * len(cells[2]) for _ in range(len(cells[1]))]
    tri_paths = []
    for j, f in enumerate(cells[2]):
        t, _ = tri.tri_sides[f][0]
        s0, s1, s2 = tri.tri_seq[f]
        path = []
        for (x, y), invert in (((s0, s1), 1), ((s1, s2), 1), ((s0, s2), -1)):
            pair = (x, y) if x < y else (y, x)
            e = tri.edge_of[(t, pair)]
            sign = invert * _dir_sign(tri, t, x, y)
            path.append((erow[e], sign))
            b2[erow[e]][j] += sign
        tri_paths.append(tuple(path))

    boundary = {1: b1, 2: b2}
    if with_tets:
        cells.append(list(range(tri.tet_count)))
        b3 = [[0] * tri.tet_count for _ in range(len(cells[2]))]
        for t in range(tri.tet_count):
            for f in range(4):
                face = tri.tri_of[(t, f)]
                slots = tuple(s for s in range(4) if s != f)
                class_seq = tri.tri_class_seq[(t, f)]
                positions = [class_seq.index(s) for s in slots]
                sign = perm_parity(positions) * (-1) ** f
                b3[frow[face]][t] += sign
        boundary[3] = b3
    return ChainComplex(cells, boundary, edge_ends, tri_paths)


def euler_characteristic(c: ChainComplex) -> int:
    return sum((-1) ** d * len(cells) for d, cells in enumerate(c.cells))


def homology(c: ChainComplex, entry_limit: int | None = None) -> HomologyProfile:
    """H_d = Z^betti + torsion from Smith normal forms of the boundaries."""
    ranks = {}
    torsions = {}
    for d in range(1, c.dim + 1):
        factors, rank = smith_normal_form(c.boundary[d], entry_limit)
        ranks[d] = rank
        torsions[d] = tuple(sorted(f for f in factors if f > 1))
    betti = []
    torsion = []
    for d in range(c.dim + 1):
        n = len(c.cells[d])
        b = n - ranks.get(d, 0) - ranks.get(d + 1, 0)
        betti.append(b)
        torsion.append(torsions.get(d + 1, ()))
    return HomologyProfile(tuple(betti), tuple(torsion))


# -- fundamental group -----------------------------------------------


@dataclass(frozen=True)
class GroupPresentation:
    """Edge-path presentation after a bounded Tietze simplification.

    ``status`` is a semi-decision: TRIVIAL is certified only when no
    generators survive; NOT_SIMPLY_CONNECTED is certified by a nontrivial
    abelianization; otherwise INDETERMINATE.
    """

    generators: int
    relators: tuple[tuple[int, ...], ...]
    status: str

    TRIVIAL = "TRIVIAL"
    NOT_SIMPLY_CONNECTED = "NOT_SIMPLY_CONNECTED"
    INDETERMINATE = "INDETERMINATE"


def _free_reduce(word):
    out = []
    for g in word:
        if out and out[-1] == -g:
            out.pop()
        else:
            out.append(g)
    return tuple(out)


def pi1_presentation(c: ChainComplex, rewrite_budget: int = 10_000) -> GroupPresentation:
    """Presentation of pi_1 of a connected complex of dimension <= 2.

    Generators are the edges outside a spanning tree of the 1-skeleton
    (loops are never tree edges); one relator per triangle from its
    boundary path.  Length-1 relators kill their generator, with free
    reduction in between, capped by ``rewrite_budget`` rewrites.
    """
    n_verts = len(c.cells[0])
    if n_verts == 0:
        raise DisconnectedComplex("empty complex")
    ends = c.edge_ends or []

    parent = list(range(n_verts))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = set()
    for j, (tail, head) in enumerate(ends):
        ra, rb = find(tail), find(head)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
            tree.add(j)
    if len({find(v) for v in range(n_verts)}) != 1:
        raise DisconnectedComplex("1-skeleton is not connected")

    gen_of = {}
    for j in range(len(ends)):
        if j not in tree:
            gen_of[j] = len(gen_of) + 1

    relators = []
    for path in c.tri_paths or ():
        word = [sign * gen_of[row] for row, sign in path if row in gen_of]
        word = _free_reduce(word)
        if word:
            relators.append(word)

    alive = set(gen_of.values())
    budget = rewrite_budget
    changed = True
    while changed and budget > 0:
        changed = False
        for rel in relators:
            if len(rel) == 1:
                dead = abs(rel[0])
                alive.discard(dead)
                new = []
                for other in relators:
                    word = _free_reduce(tuple(g for g in other if abs(g) != dead))
                    if word:
                        new.append(word)
                    budget -= 1
                    if budget <= 0:
                        break
                relators = new
                changed = True
                break

    remap = {g: i + 1 for i, g in enumerate(sorted(alive))}
    relators = tuple(
        tuple((1 if g > 0 else -1) * remap[abs(g)] for g in rel) for rel in relators
    )
    n_gen = len(remap)

    if n_gen == 0:
        status = GroupPresentation.TRIVIAL
    elif _abelianization_nontrivial(n_gen, relators):
        status = GroupPresentation.NOT_SIMPLY_CONNECTED
    else:
        status = GroupPresentation.INDETERMINATE
    return GroupPresentation(n_gen, relators, status)


def _abelianization_nontrivial(n_gen: int, relators) -> bool:
    if not relators:
        return n_gen > 0
    mat = [[0] * len(relators) for _ in range(n_gen)]
    for j, rel in enumerate(relators):
        for g in rel:
            mat[abs(g) - 1][j] += 1 if g > 0 else -1
    factors, rank = smith_normal_form(mat)
    if rank < n_gen:
        return True
    return any(f > 1 for f in factors)
