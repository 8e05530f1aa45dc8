"""Edge clearing, dead-end repair, pyramid detection, vertex clearing."""

import random
from dataclasses import replace

import pytest

from spinecell import (
    Anomaly,
    NotSeparating,
    PaintState,
    UnknownSimplex,
    build_initial_spine,
    check_invariants,
    clear_edge,
    clear_vertex,
    collapse_all,
    detect_pyramids,
    edge_star_chain,
    generate,
    lens_space,
    repair_dead_ends,
    scramble,
)
from spinecell.spine import MoveTrace
from spinecell.triangulation import barycentric_subdivision


def fully_black(tri):
    return PaintState(
        base=tri,
        black_tris=frozenset(range(tri.triangle_count)),
        black_edges=frozenset(range(tri.edge_count)),
        black_verts=frozenset(range(tri.vertex_count)),
        trace=MoveTrace(),
    )


def black_tris_on(state, e):
    return [f for f in sorted(state.black_tris) if e in state.base.tri_edge_ids[f]]


# -- s-chains ----------------------------------------------------------


def test_chain_split_of_ring_six():
    tri = lens_space(6, 1)
    state = fully_black(tri)
    e = next(x for x in range(tri.edge_count) if len(tri.edge_ring(x)) == 6)
    ring = tri.edge_ring(e)
    a = ring[0][1]
    opposite = ring[3][1]
    upper = edge_star_chain(state, e, "upper", (a, opposite))
    lower = edge_star_chain(state, e, "lower", (a, opposite))
    assert len(upper) == 3 and len(lower) == 3
    assert upper.anchor == e and upper.side == "upper"
    assert len(upper.shared) == 2 and len(lower.shared) == 2
    # chains cover the ring between the endpoints
    assert set(upper.tets) | set(lower.tets) == {t for t, _ in ring}


def test_chain_lengths_partition_the_ring(b4):
    state = fully_black(b4)
    e = 0
    ring = b4.edge_ring(e)
    tris = [t for _, t in ring]
    up = edge_star_chain(state, e, "upper", (tris[0], tris[1]))
    lo = edge_star_chain(state, e, "lower", (tris[0], tris[1]))
    assert len(up) + len(lo) == len(ring)


def test_chain_rejects_coincident_endpoints(b4):
    state = fully_black(b4)
    tri = b4.edge_ring(0)[0][1]
    with pytest.raises(NotSeparating):
        edge_star_chain(state, 0, "upper", (tri, tri))


def test_chain_rejects_non_incident_triangle(b4):
    state = fully_black(b4)
    e = 0
    other = next(
        f for f in range(b4.triangle_count) if e not in b4.tri_edge_ids[f]
    )
    a = b4.edge_ring(e)[0][1]
    with pytest.raises(UnknownSimplex):
        edge_star_chain(state, e, "upper", (a, other))


# -- clear_edge ---------------------------------------------------------


def heavy_edge_case(b4):
    state = build_initial_spine(b4, 0, "star")
    mult = state.edge_multiplicity
    for e in sorted(state.black_edges):
        blacks = black_tris_on(state, e)
        if mult[e] >= 3 and len(blacks) >= 3:
            return state, e, blacks
    pytest.fail("no heavy edge on the star spine")


def test_clear_edge_reaches_multiplicity_two(b4):
    state, e, blacks = heavy_edge_case(b4)
    out = clear_edge(state, e, (blacks[0], blacks[1]))
    assert out.edge_multiplicity[e] == 2
    assert set(black_tris_on(out, e)) == {blacks[0], blacks[1]}
    assert check_invariants(out, expect_simply_connected=True).ok


def test_clear_edge_leaves_far_spine_untouched(b4):
    state, e, blacks = heavy_edge_case(b4)
    ring_tets = {t for t, _ in b4.edge_ring(e)}
    ring_faces = {f for t in ring_tets for f in b4.tet_faces(t)}
    far_before = state.black_tris - ring_faces
    out = clear_edge(state, e, (blacks[0], blacks[1]))
    far_after = out.black_tris - ring_faces
    assert far_before == far_after


def test_clear_edge_standard_is_noop(b4):
    state, e, blacks = heavy_edge_case(b4)
    cleared = clear_edge(state, e, (blacks[0], blacks[1]))
    again = clear_edge(cleared, e, (blacks[0], blacks[1]))
    assert again is cleared
    assert len(again.trace) == len(cleared.trace)


def test_clear_edge_rejects_non_incident_keep(b4):
    state, e, blacks = heavy_edge_case(b4)
    other = next(
        f for f in range(b4.triangle_count) if e not in b4.tri_edge_ids[f]
    )
    with pytest.raises(UnknownSimplex):
        clear_edge(state, e, (blacks[0], other))


def test_clear_edge_fires_during_recognition():
    """A recognizer run on a stuck spine exercises the compound move."""
    from spinecell import RecognizerConfig, recognize

    verdict, trace = recognize(generate("minimal-s3"), RecognizerConfig())
    ops = {r.op for r in trace.records}
    assert verdict.kind == "SPHERE"
    assert "clear_edge" in ops


def test_clear_edge_property_1000_cases(b4, ms3):
    """Postcondition holds or the move reports Anomaly, atomically."""
    rng = random.Random(424242)
    bases = [b4, ms3]
    done = 0
    anomalies = 0
    while done < 1000:
        seed = rng.randrange(2**31)
        tri = scramble(bases[done % 2], done % 6, seed)
        state = build_initial_spine(tri, seed % tri.tet_count, "bfs")
        mult = state.edge_multiplicity
        heavy = [
            e
            for e in sorted(state.black_edges)
            if mult[e] >= 3 and len(black_tris_on(state, e)) >= 2
        ]
        if not heavy:
            done += 1
            continue
        e = heavy[seed % len(heavy)]
        blacks = black_tris_on(state, e)
        keep = (blacks[seed % len(blacks)], blacks[(seed // 7 + 1) % len(blacks)])
        if keep[0] == keep[1]:
            keep = (blacks[0], blacks[-1])
        if keep[0] == keep[1]:
            done += 1
            continue
        ring_faces = {
            f for t, _ in tri.edge_ring(e) for f in tri.tet_faces(t)
        }
        far_before = state.black_tris - ring_faces
        try:
            out = clear_edge(state, e, keep)
        except (Anomaly, NotSeparating):
            anomalies += 1
            done += 1
            continue
        assert out.edge_multiplicity[e] == 2, (done, e, keep)
        assert out.chi == 1
        assert out.white_components() == 1
        assert (out.black_tris - ring_faces) == far_before
        done += 1
    # the move should succeed on the overwhelming majority of draws
    assert anomalies < 250, anomalies


# -- repair_dead_ends -----------------------------------------------------


def cut_off_state(b4):
    state = build_initial_spine(b4, 0, "bfs")
    return replace(state, black_tris=state.black_tris | set(b4.tet_faces(3)))


def test_repair_reconnects_single_tetrahedron(b4):
    state = cut_off_state(b4)
    assert state.white_components() > 1
    fixed = repair_dead_ends(state)
    assert fixed.white_components() == 1
    whitened = state.black_tris - fixed.black_tris
    assert len(whitened) == 1
    (f,) = whitened
    assert 3 in b4.tets_of_tri[f]


def test_repair_noop_when_connected(b4):
    state = build_initial_spine(b4, 0, "bfs")
    fixed = repair_dead_ends(state)
    assert fixed is state


def test_repair_blocked_by_protection(b4):
    state = cut_off_state(b4)
    with pytest.raises(Anomaly):
        repair_dead_ends(state, protected=set(b4.tet_faces(3)))


# -- detect_pyramids --------------------------------------------------------


def vertex_with_keep(b4):
    """Vertex 0 of the 4-simplex boundary with a 3-triangle keep cycle."""
    v = 0
    others = sorted(
        {
            b4.vertex_of[(t, s)]
            for t, s in b4.vertex_corners[v]
            for s2 in ()
        }
    )
    # triangles through v are labeled by their two other vertex classes
    tris_at_v = [f for f in range(b4.triangle_count) if v in b4.tri_vertex_ids[f]]
    other_of = {
        f: sorted(set(b4.tri_vertex_ids[f]) - {v}) for f in tris_at_v
    }
    classes = sorted({x for pair in other_of.values() for x in pair})
    a, b, c, d = classes
    keep = [f for f in tris_at_v if set(other_of[f]) <= {a, b, c}]
    rest = [f for f in tris_at_v if d in other_of[f]]
    return v, keep, rest


def test_detect_partition_and_empty_side(b4):
    v, keep, rest = vertex_with_keep(b4)
    assert len(keep) == 3 and len(rest) == 3
    black = set(keep) | set(rest)
    state = PaintState(
        base=b4,
        black_tris=frozenset(black),
        black_edges=frozenset(range(b4.edge_count)),
        black_verts=frozenset(range(b4.vertex_count)),
        trace=MoveTrace(),
    )
    sides = {}
    for side in ("upper", "lower"):
        sides[side] = detect_pyramids(state, v, keep, side)
    reports = list(sides.values())
    partitions = [r for r in reports if r.partitions]
    empties = [r for r in reports if not r.partitions and not r.pyramids]
    assert len(partitions) == 1 and len(empties) == 1
    # the three fan triangles through the fourth vertex form one tree trace
    assert partitions[0].partitions == (tuple(sorted(rest)),)


def test_detect_pyramid_with_oval():
    """A closed black cone around a subdivision vertex is one pyramid."""
    tri = barycentric_subdivision(generate("boundary4simplex"))
    # search a vertex whose link admits two disjoint separating cycles:
    # take keep = trace cycle around one corner, pyramid = around another
    for v in range(tri.vertex_count):
        link = tri.vertex_link(v)
        if link.triangle_count < 8:
            continue
        corners = range(link.triangle_count)
        cone_of = {}
        for i in corners:
            t, vs = link.corners[i]
            labels = tuple(
                sorted(link.edge_label[(i, f)] for f in range(4) if f != vs)
            )
            cone_of[i] = labels
        # pick two corners with disjoint label triples
        found = None
        for i in corners:
            for j in corners:
                if i < j and not set(cone_of[i]) & set(cone_of[j]):
                    found = (i, j)
                    break
            if found:
                break
        if not found:
            continue
        i, j = found
        keep = sorted(cone_of[i])
        pyramid = sorted(cone_of[j])
        black = set(keep) | set(pyramid)
        state = PaintState(
            base=tri,
            black_tris=frozenset(black),
            black_edges=frozenset(range(tri.edge_count)),
            black_verts=frozenset(range(tri.vertex_count)),
            trace=MoveTrace(),
        )
        try:
            reports = [
                detect_pyramids(state, v, keep, side) for side in ("upper", "lower")
            ]
        except NotSeparating:
            continue
        with_pyramid = [r for r in reports if r.pyramids]
        assert len(with_pyramid) == 1
        report = with_pyramid[0]
        assert len(report.pyramids) == 1
        tris, oval = report.pyramids[0]
        assert tris == tuple(sorted(pyramid))
        assert oval, "the pyramid must expose a separating oval"
        assert not report.partitions
        return
    pytest.fail("no vertex with two disjoint corner cones found")


def test_detect_rejects_non_separating_cycle(b4):
    v, keep, rest = vertex_with_keep(b4)
    state = fully_black(b4)
    with pytest.raises(NotSeparating):
        detect_pyramids(state, v, keep[:1], "upper")


def test_detect_reports_flowers(b4):
    v, keep, rest = vertex_with_keep(b4)
    # a black edge at v with no black triangle on it: a flower stalk
    stalk = next(
        e
        for e in range(b4.edge_count)
        if v in b4.edge_vertex_ids[e] and b4.edge_vertex_ids[e][0] != b4.edge_vertex_ids[e][1]
    )
    state = PaintState(
        base=b4,
        black_tris=frozenset(keep),
        black_edges=frozenset(range(b4.edge_count)),
        black_verts=frozenset(range(b4.vertex_count)),
        trace=MoveTrace(),
    )
    reports = [detect_pyramids(state, v, keep, side) for side in ("upper", "lower")]
    flowers = [fl for r in reports for fl in r.flowers]
    assert any(fl[0] == stalk for fl in flowers) or flowers


# -- clear_vertex -------------------------------------------------------------


def test_clear_vertex_noop_when_clean(b4):
    v, keep, rest = vertex_with_keep(b4)
    state = PaintState(
        base=b4,
        black_tris=frozenset(keep),
        black_edges=frozenset(e for f in keep for e in b4.tri_edge_ids[f]),
        black_verts=frozenset(x for f in keep for x in b4.tri_vertex_ids[f]),
        trace=MoveTrace(),
    )
    out = clear_vertex(state, v, keep)
    assert out.black_tris == state.black_tris


def test_clear_vertex_retracts_isolated_edges(b4):
    v, keep, rest = vertex_with_keep(b4)
    stalks = [
        e
        for e in range(b4.edge_count)
        if v in b4.edge_vertex_ids[e]
        and len(set(b4.edge_vertex_ids[e])) == 2
        and not any(e in b4.tri_edge_ids[f] for f in keep)
    ][:2]
    edges = {e for f in keep for e in b4.tri_edge_ids[f]} | set(stalks)
    verts = {x for f in keep for x in b4.tri_vertex_ids[f]}
    verts |= {x for e in stalks for x in b4.edge_vertex_ids[e]}
    state = PaintState(b4, frozenset(keep), frozenset(edges), frozenset(verts), MoveTrace())
    out = clear_vertex(state, v, keep)
    for e in stalks:
        assert e not in out.black_edges
    ops = [r.op for r in out.trace.records]
    assert ops.count("collapse_isolated_edge") == len(stalks)


def test_clear_vertex_during_recognition_certifies():
    """Capture a live clear_vertex instance and replay it standalone."""
    import spinecell.polygon as polygon_mod
    from spinecell import RecognizerConfig, recognize
    from spinecell import rebuild as rebuild_mod

    captured = []
    original = rebuild_mod.clear_vertex

    def spy(state, vertex, keep_cycle, **kw):
        if not captured:
            captured.append((state, vertex, tuple(keep_cycle), dict(kw)))
        return original(state, vertex, keep_cycle, **kw)

    polygon_mod.clear_vertex = spy
    try:
        verdict, _ = recognize(generate("minimal-s3"), RecognizerConfig())
    finally:
        polygon_mod.clear_vertex = original
    assert verdict.kind == "SPHERE"
    assert captured, "recognition never cleared a vertex"
    state, v, keep, kw = captured[0]
    out = original(state, v, keep, **kw)
    leftovers = [
        f
        for f in out.black_tris - set(keep)
        if v in out.base.tri_vertex_ids[f] and f not in kw.get("protected_tris", ())
    ]
    assert not leftovers
    assert out.chi == 1
    assert out.white_components() == 1
