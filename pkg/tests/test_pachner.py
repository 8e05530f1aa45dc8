"""Bistellar moves: local contracts, correspondences, and the
1000-case homology-preservation property the acceptance gate requires."""

import random

import pytest

from spinecell import (
    ChainComplex,
    MoveNotApplicable,
    applicable_targets,
    generate,
    homology,
    pachner_move,
    scramble,
    validate_closed_manifold,
)
from spinecell.pachner import MOVE_KINDS, ScrambleLog

S3 = ((1, 0, 0, 1), ((), (), (), ()))


def profile_of(tri):
    p = homology(ChainComplex.from_triangulation(tri))
    return (p.betti, p.torsion)


def test_1_4_grows_by_three(b4):
    out, corr = pachner_move(b4, "1-4", 0)
    assert out.tet_count == 8
    assert validate_closed_manifold(out).valid
    assert profile_of(out) == S3
    # surviving tetrahedra keep an id correspondence
    assert set(corr.tet.keys()) == {1, 2, 3, 4}


def test_2_3_on_b4(b4):
    target = applicable_targets(b4, "2-3")[0]
    out, _ = pachner_move(b4, "2-3", target)
    assert out.tet_count == 6
    assert profile_of(out) == S3


def test_3_2_requires_ring_of_three(b4):
    # make an edge of ring length 4: split a tetrahedron and look at an
    # old edge of the split tetrahedron
    out, corr = pachner_move(b4, "1-4", 0)
    ring4 = [e for e in range(out.edge_count) if len(out.edge_ring(e)) == 4]
    assert ring4
    with pytest.raises(MoveNotApplicable):
        pachner_move(out, "3-2", ring4[0])


def test_3_2_undoes_2_3(b4):
    target = applicable_targets(b4, "2-3")[0]
    grown, _ = pachner_move(b4, "2-3", target)
    shrinkable = applicable_targets(grown, "3-2")
    assert shrinkable
    back, _ = pachner_move(grown, "3-2", shrinkable[0])
    assert back.tet_count == 5
    assert profile_of(back) == S3


def test_4_1_on_split_vertex(b4):
    grown, _ = pachner_move(b4, "1-4", 2)
    targets = applicable_targets(grown, "4-1")
    assert targets
    out, _ = pachner_move(grown, "4-1", targets[0])
    assert out.tet_count == 5
    assert profile_of(out) == S3


def test_edge_correspondence_tracks_surviving_edges(b4):
    target = applicable_targets(b4, "2-3")[0]
    out, corr = pachner_move(b4, "2-3", target)
    # surviving edges map to edges with the same endpoint vertex classes
    for old_e, new_e in corr.edge.items():
        old_ends = sorted(
            corr.vertex[v] for v in b4.edge_vertex_ids[old_e]
        )
        assert sorted(out.edge_vertex_ids[new_e]) == old_ends


# -- scramble ----------------------------------------------------------


def test_scramble_is_deterministic(b4):
    a = scramble(b4, 50, 7)
    b = scramble(b4, 50, 7)
    assert a.serialize() == b.serialize()


def test_scramble_zero_moves_is_identity(b4):
    assert scramble(b4, 0, 123).serialize() == b4.serialize()


def test_scramble_keeps_sphere_homology(b4):
    out = scramble(b4, 50, 7)
    assert validate_closed_manifold(out).valid
    assert profile_of(out) == S3


def test_scramble_respects_ceiling(b4):
    log = ScrambleLog()
    out = scramble(b4, 120, 5, ceiling=12, log=log)
    assert validate_closed_manifold(out).valid
    assert out.tet_count <= 12 + 3   # one growth move past the ceiling at most
    assert len(log.applied) + len(log.skipped) == 120


def test_scramble_of_lens_preserves_torsion():
    from spinecell import lens_space

    tri = scramble(lens_space(3, 1), 25, 9)
    assert validate_closed_manifold(tri).valid
    profile = homology(ChainComplex.from_triangulation(tri))
    assert profile.torsion[1] == (3,)


# -- acceptance property: 1000 randomized homology preservations --------


def test_pachner_moves_preserve_homology_property(b4):
    rng = random.Random(20260810)
    bases = [b4, generate("minimal-s3")]
    cases = 0
    per_kind = {k: 0 for k in MOVE_KINDS}
    while cases < 1000:
        seed = rng.randrange(2**32)
        tri = scramble(bases[cases % 2], cases % 6, seed)
        before = profile_of(tri)
        kinds = [k for k in MOVE_KINDS if applicable_targets(tri, k)]
        kind = kinds[cases % len(kinds)]
        targets = applicable_targets(tri, kind)
        target = targets[seed % len(targets)]
        out, _ = pachner_move(tri, kind, target)
        assert out.euler_characteristic == 0
        assert profile_of(out) == before, (kind, target, seed)
        per_kind[kind] += 1
        cases += 1
    assert all(count >= 20 for count in per_kind.values()), per_kind
