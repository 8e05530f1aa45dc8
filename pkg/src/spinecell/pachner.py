"""Bistellar (Pachner) moves and the seeded scramble generator.

Each move replaces a small set of tetrahedra by a complementary set
filling the same polyhedron.  The rebuild is label-driven: slots of the
killed tetrahedra are tagged with the vertices of the local polyhedron,
new tetrahedra are declared as label 4-tuples, and both the internal
gluings and the wiring of the boundary ("portal") faces follow from
label matching.  Moves return a fresh triangulation plus an id
correspondence for the surviving simplexes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import MoveNotApplicable, UnknownSimplex
from .triangulation import (
    SimplexId,
    Triangulation,
    _coerce_index,
    perm_compose,
    perm_inverse,
    validate_closed_manifold,
)

MOVE_KINDS = ("1-4", "2-3", "3-2", "4-1")

_TARGET_DIM = {"1-4": 3, "2-3": 2, "3-2": 1, "4-1": 0}


@dataclass
class PachnerCorrespondence:
    """Old id -> new id for simplexes surviving the move, per dimension."""

    vertex: dict = field(default_factory=dict)
    edge: dict = field(default_factory=dict)
    triangle: dict = field(default_factory=dict)
    tet: dict = field(default_factory=dict)


def pachner_move(tri: Triangulation, kind: str, target) -> tuple[Triangulation, PachnerCorrespondence]:
    """Apply one bistellar move; the input triangulation is untouched."""
    if kind not in MOVE_KINDS:
        raise MoveNotApplicable(f"unknown move kind {kind!r}")
    idx = _coerce_index(target, _TARGET_DIM[kind])
    if kind == "1-4":
        return _move_1_4(tri, idx)
    if kind == "2-3":
        return _move_2_3(tri, idx)
    if kind == "3-2":
        return _move_3_2(tri, idx)
    return _move_4_1(tri, idx)


def _rebuild(tri, killed, label_of, new_tets, interior):
    killed_set = set(killed)
    survivors = [t for t in range(tri.tet_count) if t not in killed_set]
    new_index = {t: i for i, t in enumerate(survivors)}
    base = len(survivors)
    slot_of = [{lab: s for s, lab in enumerate(labels)} for labels in new_tets]

    rows = [[None] * 4 for _ in range(base + len(new_tets))]

    # internal faces: new tetrahedra sharing exactly three labels
    for i in range(len(new_tets)):
        for j in range(i + 1, len(new_tets)):
            shared = set(new_tets[i]) & set(new_tets[j])
            if len(shared) != 3:
                continue
            off_i = (set(new_tets[i]) - shared).pop()
            off_j = (set(new_tets[j]) - shared).pop()
            fi, fj = slot_of[i][off_i], slot_of[j][off_j]
            p = [None] * 4
            for lab in shared:
                p[slot_of[i][lab]] = slot_of[j][lab]
            p[fi] = fj
            p = tuple(p)
            assert rows[base + i][fi] is None and rows[base + j][fj] is None
            rows[base + i][fi] = (base + j, p)
            rows[base + j][fj] = (base + i, perm_inverse(p))

    # portal homes: killed boundary faces relocated onto new tetrahedra
    homes = {}
    for t in killed:
        for f in range(4):
            if (t, f) in interior:
                continue
            labels3 = {label_of[(t, s)] for s in range(4) if s != f}
            found = []
            for i, labels in enumerate(new_tets):
                if labels3 <= set(labels):
                    off = (set(labels) - labels3).pop()
                    fc = slot_of[i][off]
                    if rows[base + i][fc] is None:
                        found.append((i, fc))
            if len(found) != 1:
                raise MoveNotApplicable(
                    f"portal (tet {t}, face {f}) has {len(found)} homes"
                )
            i, fc = found[0]
            mu = [None] * 4
            for s in range(4):
                mu[s] = fc if s == f else slot_of[i][label_of[(t, s)]]
            homes[(t, f)] = (base + i, fc, tuple(mu))

    for t in survivors:
        for f in range(4):
            entry = tri.gluings[t][f]
            if entry is None:
                raise MoveNotApplicable("moves need a closed triangulation")
            n, p = entry
            if n in killed_set:
                gi, _, mu = homes[(n, p[f])]
                rows[new_index[t]][f] = (gi, perm_compose(mu, p))
            else:
                rows[new_index[t]][f] = (new_index[n], p)
    for (t, f), (gi, fc, mu) in homes.items():
        n, p = tri.gluings[t][f]
        if n in killed_set:
            gj, _, mu2 = homes[(n, p[f])]
            rows[gi][fc] = (gj, perm_compose(mu2, perm_compose(p, perm_inverse(mu))))
        else:
            rows[gi][fc] = (new_index[n], perm_compose(p, perm_inverse(mu)))

    new_tri = Triangulation(rows)
    report = validate_closed_manifold(new_tri)
    if not report.valid:
        raise MoveNotApplicable(f"move produced an invalid complex: {report.failures[0]}")

    corr = PachnerCorrespondence()
    corr.tet = {t: new_index[t] for t in survivors}

    def _locate_vertex(t, slot):
        if t in new_index:
            return new_tri.vertex_of[(new_index[t], slot)]
        lab = label_of.get((t, slot))
        if lab is None:
            return None
        for i, labels in enumerate(new_tets):
            if lab in labels:
                return new_tri.vertex_of[(base + i, slot_of[i][lab])]
        return None

    for v in range(tri.vertex_count):
        for t, slot in tri.vertex_corners[v]:
            new_v = _locate_vertex(t, slot)
            if new_v is not None:
                corr.vertex[v] = new_v
                break

    for e in range(tri.edge_count):
        for t, (a, b) in tri.edge_corners[e]:
            if t in new_index:
                corr.edge[e] = new_tri.edge_of[(new_index[t], (a, b))]
                break
            la, lb = label_of.get((t, a)), label_of.get((t, b))
            if la is None or lb is None:
                continue
            hit = None
            for i, labels in enumerate(new_tets):
                if la in labels and lb in labels:
                    pair = tuple(sorted((slot_of[i][la], slot_of[i][lb])))
                    hit = new_tri.edge_of[(base + i, pair)]
                    break
            if hit is not None:
                corr.edge[e] = hit
                break

    for f_id in range(tri.triangle_count):
        for t, f in tri.tri_sides[f_id]:
            if t in new_index:
                corr.triangle[f_id] = new_tri.tri_of[(new_index[t], f)]
                break
            if (t, f) in homes:
                gi, fc, _ = homes[(t, f)]
                corr.triangle[f_id] = new_tri.tri_of[(gi, fc)]
                break

    return new_tri, corr


def _move_1_4(tri, t):
    if not 0 <= t < tri.tet_count:
        raise UnknownSimplex(f"no tetrahedron {t}")
    label_of = {(t, s): ("o", s) for s in range(4)}
    new_tets = [
        tuple("c" if s == k else ("o", s) for s in range(4)) for k in range(4)
    ]
    return _rebuild(tri, [t], label_of, new_tets, interior=set())


def _move_2_3(tri, f_id):
    if not 0 <= f_id < tri.triangle_count:
        raise UnknownSimplex(f"no triangle {f_id}")
    sides = tri.tri_sides[f_id]
    if len(sides) != 2 or sides[0][0] == sides[1][0]:
        raise MoveNotApplicable("2-3 needs the triangle's two sides on distinct tetrahedra")
    (ta, fa), (tb, fb) = sides
    g = tri.gluings[ta][fa][1]
    s = [x for x in range(4) if x != fa]
    label_of = {(ta, fa): "pA", (tb, fb): "pB"}
    for i, slot in enumerate(s):
        label_of[(ta, slot)] = ("v", i)
        label_of[(tb, g[slot])] = ("v", i)
    new_tets = []
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        new_tets.append(("pA", "pB", ("v", j), ("v", k)))
    return _rebuild(tri, [ta, tb], label_of, new_tets, interior={(ta, fa), (tb, fb)})


def _move_3_2(tri, e_id):
    if not 0 <= e_id < tri.edge_count:
        raise UnknownSimplex(f"no edge {e_id}")
    ring = tri.edge_rings[e_id]
    if ring is None or len(ring) != 3:
        raise MoveNotApplicable("3-2 needs an edge of ring length 3")
    tets = [entry.tet for entry in ring]
    if len(set(tets)) != 3:
        raise MoveNotApplicable("3-2 needs three distinct tetrahedra")
    label_of = {}
    for i, entry in enumerate(ring):
        u, v = entry.pair
        label_of[(entry.tet, u)] = "U"
        label_of[(entry.tet, v)] = "V"
        label_of[(entry.tet, entry.enter_face)] = ("w", i)
        label_of[(entry.tet, entry.exit_face)] = ("w", (i - 1) % 3)
    interior = set()
    for i, entry in enumerate(ring):
        interior.add((entry.tet, entry.exit_face))
        interior.add((entry.tet, entry.enter_face))
    new_tets = [
        ("U", ("w", 0), ("w", 1), ("w", 2)),
        ("V", ("w", 0), ("w", 1), ("w", 2)),
    ]
    return _rebuild(tri, tets, label_of, new_tets, interior=interior)


def _plan_4_1(tri, v_id):
    """Labels and interior faces for the 4-1 move, or MoveNotApplicable."""
    corners = tri.vertex_corners[v_id]
    if len(corners) != 4:
        raise MoveNotApplicable("4-1 needs a vertex with exactly 4 corners")
    tets = [t for t, _ in corners]
    if len(set(tets)) != 4:
        raise MoveNotApplicable("4-1 needs four distinct tetrahedra")
    edge_classes = sorted(
        {
            tri.edge_of[(t, tuple(sorted((vs, u))))]
            for t, vs in corners
            for u in range(4)
            if u != vs
        }
    )
    if len(edge_classes) != 4:
        raise MoveNotApplicable("4-1 needs exactly 4 edge classes at the vertex")
    rank = {e: i for i, e in enumerate(edge_classes)}
    label_of = {}
    missing = []
    for t, vs in corners:
        label_of[(t, vs)] = "c"
        seen = set()
        for u in range(4):
            if u == vs:
                continue
            k = rank[tri.edge_of[(t, tuple(sorted((vs, u))))]]
            if k in seen:
                raise MoveNotApplicable("4-1 corner repeats an edge class")
            seen.add(k)
            label_of[(t, u)] = ("o", k)
        missing.append(({0, 1, 2, 3} - seen).pop())
    if len(set(missing)) != 4:
        raise MoveNotApplicable("4-1 corners do not span the tetrahedral link")
    interior = {(t, f) for t, vs in corners for f in range(4) if f != vs}
    return tets, label_of, interior


def _move_4_1(tri, v_id):
    if not 0 <= v_id < tri.vertex_count:
        raise UnknownSimplex(f"no vertex {v_id}")
    tets, label_of, interior = _plan_4_1(tri, v_id)
    new_tets = [(("o", 0), ("o", 1), ("o", 2), ("o", 3))]
    return _rebuild(tri, tets, label_of, new_tets, interior=interior)


# -- applicability and scramble ---------------------------------------


def applicable_targets(tri: Triangulation, kind: str) -> list[int]:
    if kind == "1-4":
        return list(range(tri.tet_count))
    if kind == "2-3":
        return [
            f
            for f in range(tri.triangle_count)
            if len(tri.tri_sides[f]) == 2 and tri.tri_sides[f][0][0] != tri.tri_sides[f][1][0]
        ]
    if kind == "3-2":
        out = []
        for e in range(tri.edge_count):
            ring = tri.edge_rings[e]
            if ring and len(ring) == 3 and len({x.tet for x in ring}) == 3:
                out.append(e)
        return out
    if kind == "4-1":
        out = []
        for v in range(tri.vertex_count):
            try:
                _plan_4_1(tri, v)
            except MoveNotApplicable:
                continue
            out.append(v)
        return out
    raise MoveNotApplicable(f"unknown move kind {kind!r}")


@dataclass
class ScrambleLog:
    applied: list = field(default_factory=list)
    skipped: list = field(default_factory=list)


def scramble(
    tri: Triangulation,
    n_moves: int,
    seed: int,
    ceiling: int = 24,
    max_retries: int = 8,
    log: ScrambleLog | None = None,
) -> Triangulation:
    """Apply seeded random Pachner moves; identical seed, identical output.

    Move kinds are drawn uniformly among the applicable ones; above the
    tetrahedron ceiling the shrinking moves (4-1, then 3-2) are attempted
    first to bound growth.  Choices that fail are re-drawn a bounded
    number of times, then the move is skipped and logged.
    """
    rng = random.Random(seed)
    for step in range(n_moves):
        done = False
        for _ in range(max_retries):
            kind = None
            if tri.tet_count > ceiling:
                for shrink in ("4-1", "3-2"):
                    if applicable_targets(tri, shrink):
                        kind = shrink
                        break
            if kind is None:
                kinds = [k for k in MOVE_KINDS if applicable_targets(tri, k)]
                if not kinds:
                    break
                kind = rng.choice(kinds)
            targets = applicable_targets(tri, kind)
            if not targets:
                continue
            target = rng.choice(targets)
            try:
                tri, _ = pachner_move(tri, kind, target)
            except MoveNotApplicable:
                continue
            if log is not None:
                log.applied.append((step, kind, target))
            done = True
            break
        if not done and log is not None:
            log.skipped.append(step)
    return tri
