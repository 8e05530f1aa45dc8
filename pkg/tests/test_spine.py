"""Spine construction, triangle classes, collapses, invariant checking."""

import random
from dataclasses import replace

import pytest

from spinecell import (
    NotFree,
    NotIsolated,
    PaintState,
    TriangleClass,
    UnknownSimplex,
    build_initial_spine,
    check_invariants,
    classify_triangles,
    collapse_all,
    collapse_free_triangle,
    collapse_isolated_edge,
    generate,
    homology,
    is_point_spine,
    lens_space,
    scramble,
)
from spinecell.spine import MoveTrace, NO_FREE_FACES, POINT


def star_spine(b4):
    return build_initial_spine(b4, 0, "star")


def odd_vertex(b4, state):
    """The vertex class every black triangle of the star spine contains."""
    seed_corners = {b4.vertex_of[(0, s)] for s in range(4)}
    (v,) = set(range(b4.vertex_count)) - seed_corners
    return v


def test_star_spine_of_b4(b4):
    state = star_spine(b4)
    assert state.counts() == (6, 10, 5)
    assert state.chi == 1
    v = odd_vertex(b4, state)
    for f in state.black_tris:
        assert v in b4.tri_vertex_ids[f]
    profile = homology(state.black_complex())
    assert profile.betti == (1, 0, 0)
    assert not any(profile.torsion)


def test_white_triangles_count_is_spanning_tree(b4, ms3):
    for tri in (b4, ms3, lens_space(3, 1)):
        for strategy in ("bfs", "dfs", "star"):
            state = build_initial_spine(tri, 0, strategy)
            assert len(state.black_tris) == tri.triangle_count - (tri.tet_count - 1)
            assert state.chi == 1
            assert state.white_components() == 1


def test_spine_homology_on_census(b4, ms3):
    for tri in (b4, ms3):
        for seed in range(tri.tet_count):
            state = build_initial_spine(tri, seed, "bfs")
            profile = homology(state.black_complex())
            assert profile.betti == (1, 0, 0)
            assert not any(profile.torsion)


# -- classification ------------------------------------------------------


def test_star_spine_all_free(b4):
    classes = classify_triangles(star_spine(b4))
    assert len(classes) == 6
    assert all(c.kind == TriangleClass.F for c in classes.values())
    state = star_spine(b4)
    v = odd_vertex(b4, state)
    for f, c in classes.items():
        # the witnessing free edge is the side not containing the odd vertex
        for e in c.witnesses:
            assert v not in state.base.edge_vertex_ids[e]


def test_standard_triangles(b4):
    # boundary of one tetrahedron: each edge lies on exactly two faces
    state = PaintState(
        base=b4,
        black_tris=frozenset(b4.tet_faces(0)),
        black_edges=frozenset(range(b4.edge_count)),
        black_verts=frozenset(range(b4.vertex_count)),
        trace=MoveTrace(),
    )
    classes = classify_triangles(state)
    assert all(c.kind == TriangleClass.S for c in classes.values())


def test_heavy_triangles(b4):
    # everything black: each edge of the 4-simplex boundary lies on 3 faces
    state = PaintState(
        base=b4,
        black_tris=frozenset(range(b4.triangle_count)),
        black_edges=frozenset(range(b4.edge_count)),
        black_verts=frozenset(range(b4.vertex_count)),
        trace=MoveTrace(),
    )
    classes = classify_triangles(state)
    assert all(c.kind == TriangleClass.M for c in classes.values())


# -- free triangle collapse ----------------------------------------------


def test_collapse_free_triangle_counts(b4):
    state = star_spine(b4)
    tri = min(state.black_tris)
    free = classify_triangles(state)[tri].witnesses[0]
    out = collapse_free_triangle(state, tri, free)
    assert out.counts() == (5, 9, 5)
    assert out.chi == 1
    assert check_invariants(out, expect_simply_connected=True).ok


def test_collapse_consumes_only_named_edge(b4):
    # two triangles sharing one edge: each has two free edges
    v = odd_vertex(b4, star_spine(b4))
    tris = sorted(
        f for f in range(b4.triangle_count) if v in b4.tri_vertex_ids[f]
    )[:2]
    edges = {e for f in tris for e in b4.tri_edge_ids[f]}
    verts = {x for f in tris for x in b4.tri_vertex_ids[f]}
    state = PaintState(b4, frozenset(tris), frozenset(edges), frozenset(verts), MoveTrace())
    target = tris[0]
    free = classify_triangles(state)[target].witnesses
    assert len(free) == 2
    out = collapse_free_triangle(state, target, free[0])
    assert free[1] in out.black_edges


def test_collapse_rejects_standard_triangle(b4):
    state = PaintState(
        base=b4,
        black_tris=frozenset(b4.tet_faces(0)),
        black_edges=frozenset(range(b4.edge_count)),
        black_verts=frozenset(range(b4.vertex_count)),
        trace=MoveTrace(),
    )
    f = min(state.black_tris)
    with pytest.raises(NotFree):
        collapse_free_triangle(state, f, b4.tri_edge_ids[f][0])


# -- isolated edge collapse ------------------------------------------------


def collapse_to_edges(b4):
    state, outcome = collapse_all(star_spine(b4))
    return state


def test_isolated_edge_sequence(b4):
    state = star_spine(b4)
    for _ in range(6):
        classes = classify_triangles(state)
        f = min(f for f, c in classes.items() if c.kind == TriangleClass.F)
        state = collapse_free_triangle(state, f, classes[f].witnesses[0])
    assert not state.black_tris and len(state.black_edges) == 4
    v = odd_vertex(b4, state)
    # each black edge runs from the odd vertex to a free endpoint
    e = min(state.black_edges)
    out = collapse_isolated_edge(state, e)
    gone = (set(state.black_verts) - set(out.black_verts)).pop()
    assert gone != v
    assert out.chi == 1


def test_final_edge_leaves_single_vertex(b4):
    # a 2-edge path: collapse both, the last from its free end
    v0, v1, v2 = 0, 1, 2
    e01 = next(
        e for e in range(b4.edge_count) if sorted(b4.edge_vertex_ids[e]) == [v0, v1]
    )
    e12 = next(
        e for e in range(b4.edge_count) if sorted(b4.edge_vertex_ids[e]) == [v1, v2]
    )
    state = PaintState(b4, frozenset(), frozenset({e01, e12}), frozenset({v0, v1, v2}), MoveTrace())
    state = collapse_isolated_edge(state, e12)      # frees endpoint 2
    assert state.black_edges == {e01}
    state = collapse_isolated_edge(state, e01)      # both ends free: keep lowest
    assert not state.black_edges and state.black_verts == {v0}


def test_edge_in_cycle_not_isolated(b4):
    cycle_verts = {0, 1, 2}
    edges = {
        e
        for e in range(b4.edge_count)
        if set(b4.edge_vertex_ids[e]) <= cycle_verts
    }
    assert len(edges) == 3
    state = PaintState(b4, frozenset(), frozenset(edges), frozenset(cycle_verts), MoveTrace())
    with pytest.raises(NotIsolated):
        collapse_isolated_edge(state, min(edges))


def test_edge_on_black_triangle_not_isolated(b4):
    state = star_spine(b4)
    with pytest.raises(NotIsolated):
        collapse_isolated_edge(state, 0)


# -- collapse_all -----------------------------------------------------------


def test_collapse_oracle_exact_move_counts(b4):
    state, outcome = collapse_all(star_spine(b4))
    assert outcome == POINT
    assert is_point_spine(state)
    ops = [r.op for r in state.trace.records]
    assert ops.count("collapse_free_triangle") == 6
    assert ops.count("collapse_isolated_edge") == 4


def test_collapse_all_on_point_is_noop(b4):
    state, _ = collapse_all(star_spine(b4))
    again, outcome = collapse_all(state)
    assert outcome == POINT
    assert len(again.trace) == len(state.trace)


def test_collapse_all_stuck_state(b4):
    # all triangles of one tetrahedron: standard everywhere, no moves
    state = PaintState(
        base=b4,
        black_tris=frozenset(b4.tet_faces(0)),
        black_edges=frozenset(range(b4.edge_count)),
        black_verts=frozenset(range(b4.vertex_count)),
        trace=MoveTrace(),
    )
    out, outcome = collapse_all(state)
    assert outcome == NO_FREE_FACES
    assert out.counts() == state.counts()


def test_collapse_order_robustness_exhaustive(b4):
    """Every admissible greedy order on the star spine ends at one point."""
    start = star_spine(b4)
    seen = set()
    stack = [start]
    terminals = []
    while stack:
        state = stack.pop()
        key = (state.black_tris, state.black_edges, state.black_verts)
        if key in seen:
            continue
        seen.add(key)
        moves = []
        mult = state.edge_multiplicity
        for f in state.black_tris:
            for e in set(state.base.tri_edge_ids[f]):
                if mult[e] == 1:
                    moves.append(("tri", f, e))
        deg = state.vertex_degree
        for e in state.black_edges:
            if mult[e] == 0:
                tail, head = state.base.edge_vertex_ids[e]
                if tail != head and (deg[tail] == 1 or deg[head] == 1):
                    moves.append(("edge", e))
        if not moves:
            terminals.append(state)
            continue
        for move in moves:
            if move[0] == "tri":
                stack.append(collapse_free_triangle(state, move[1], move[2]))
            else:
                stack.append(collapse_isolated_edge(state, move[1]))
    assert terminals
    assert all(is_point_spine(t) for t in terminals)


# -- invariants --------------------------------------------------------------


def test_check_invariants_on_fresh_spines(b4, ms3):
    for tri in (b4, ms3):
        state = build_initial_spine(tri, 0, "bfs")
        assert check_invariants(state, expect_simply_connected=True).ok


def test_cut_off_tetrahedron_detected(b4):
    state = star_spine(b4)
    cut = replace(state, black_tris=state.black_tris | set(b4.tet_faces(0)))
    report = check_invariants(cut)
    assert any(code == "WhiteDisconnected" for code, _ in report.failures)


def test_extra_black_triangle_breaks_euler(b4):
    state = star_spine(b4)
    extra = min(set(range(b4.triangle_count)) - state.black_tris)
    broken = replace(state, black_tris=state.black_tris | {extra})
    report = check_invariants(broken)
    assert not report.ok
    assert any(code == "EulerMismatch" for code, _ in report.failures)


# -- acceptance property: 1000 randomized collapse preservations -------------


def test_collapses_preserve_chi_and_connectivity_property(b4, ms3):
    rng = random.Random(99)
    bases = [b4, ms3, lens_space(3, 1)]
    done = 0
    while done < 1000:
        seed = rng.randrange(2**31)
        tri = scramble(bases[done % 3], done % 5, seed)
        state = build_initial_spine(tri, seed % tri.tet_count, "bfs")
        # walk a random admissible prefix, asserting preservation each move
        for _ in range(done % 4 + 1):
            mult = state.edge_multiplicity
            tri_moves = [
                (f, e)
                for f in state.black_tris
                for e in set(state.base.tri_edge_ids[f])
                if mult[e] == 1
            ]
            deg = state.vertex_degree
            edge_moves = []
            for e in state.black_edges:
                if mult[e] == 0:
                    tail, head = state.base.edge_vertex_ids[e]
                    if tail != head and (deg[tail] == 1 or deg[head] == 1):
                        edge_moves.append(e)
            if tri_moves:
                f, e = tri_moves[seed % len(tri_moves)]
                state = collapse_free_triangle(state, f, e)
            elif edge_moves:
                state = collapse_isolated_edge(state, edge_moves[seed % len(edge_moves)])
            else:
                break
            assert state.chi == 1
            assert state.white_components() == 1
            done += 1
            if done >= 1000:
                break
