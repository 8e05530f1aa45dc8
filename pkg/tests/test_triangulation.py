"""Gluing tables, skeleton derivation, validation, census generators."""

import pytest

from spinecell import (
    ChainComplex,
    EmptyTriangulation,
    GluingSyntaxError,
    InvalidGluing,
    InvalidParameters,
    SimplexId,
    Triangulation,
    UnknownSimplex,
    barycentric_subdivision,
    generate,
    homology,
    lens_space,
    parse_triangulation,
    validate_closed_manifold,
)

S3_PROFILE = ((1, 0, 0, 1), ((), (), (), ()))


def profile_of(tri):
    p = homology(ChainComplex.from_triangulation(tri))
    return (p.betti, p.torsion)


# -- parsing -----------------------------------------------------------


def test_parse_round_trip(b4):
    text = b4.serialize()
    again = parse_triangulation(text)
    assert again.serialize() == text


def test_parse_minimal_s3_is_certified(ms3):
    # validate and run the homology oracle before trusting the bundled file
    report = validate_closed_manifold(ms3)
    assert report.valid
    assert ms3.tet_count == 2 and ms3.vertex_count == 1
    assert profile_of(ms3) == S3_PROFILE


def test_parse_comments_and_blank_lines(ms3):
    text = "% census table\n\n" + ms3.serialize().replace("\n", "  % side note\n", 1)
    assert parse_triangulation(text).serialize() == ms3.serialize()


def test_parse_rejects_non_involutive_pairing():
    # tet 0 face 1 points at tet 1 face 2, but tet 1 face 2 points elsewhere
    text = (
        "tetrahedra 2\n"
        "tet 0: 1/1023 1/2103 1/0123 1/0123\n"
        "tet 1: 0/1023 0/2103 0/0123 0/0123\n"
    )
    with pytest.raises(InvalidGluing):
        parse_triangulation(text)


def test_parse_rejects_empty():
    with pytest.raises(EmptyTriangulation):
        parse_triangulation("tetrahedra 0\n")


def test_parse_syntax_error_reports_line():
    with pytest.raises(GluingSyntaxError) as err:
        parse_triangulation("tetrahedra 1\ntet 0: 0/10 0/1023 0/0123 0/0123\n")
    assert err.value.line == 2


def test_face_glued_to_itself_rejected():
    with pytest.raises(InvalidGluing):
        Triangulation([[(0, (0, 1, 2, 3))] * 4])


# -- validation --------------------------------------------------------


def test_validate_boundary_4_simplex(b4):
    report = validate_closed_manifold(b4)
    assert report.valid
    assert (
        report.vertex_count,
        report.edge_count,
        report.triangle_count,
        report.tet_count,
    ) == (5, 10, 10, 5)
    assert report.euler_characteristic == 0
    assert all(length == 3 for length in report.edge_ring_lengths)
    assert all(chi == 2 for chi in report.vertex_link_chis)


def test_validate_reports_boundary_faces():
    # two tetrahedra glued along one face, six faces unglued
    rows = [[None] * 4, [None] * 4]
    rows[0][0] = (1, (0, 1, 2, 3))
    rows[1][0] = (0, (0, 1, 2, 3))
    report = validate_closed_manifold(Triangulation(rows))
    assert not report.valid
    assert any(code == "BoundaryFace" for code, _ in report.failures)


def test_validate_catches_bad_edge_link(ms3):
    # swap one gluing permutation (both sides, so the pairing stays
    # involutive) until the validator reports a broken edge ring
    from spinecell.triangulation import perm_inverse
    from itertools import permutations

    base = [list(row) for row in ms3.gluings]
    found = None
    for t in range(2):
        for f in range(4):
            t2, p = base[t][f]
            for q in permutations(range(4)):
                if q == p or q[f] == f and (t2, q[f]) == (t, f):
                    continue
                rows = [list(row) for row in base]
                rows[t][f] = (t2, q)
                rows[t2][q[f]] = (t, perm_inverse(q))
                if (t2, q[f]) != (t, f):
                    # keep the remaining entries consistent: drop tables
                    # whose old back-pointer got orphaned
                    if (t2, p[f]) != (t2, q[f]):
                        continue
                try:
                    tri = Triangulation(rows)
                except Exception:
                    continue
                report = validate_closed_manifold(tri)
                if any(code == "BadEdgeLink" for code, _ in report.failures):
                    found = report
                    break
            if found:
                break
        if found:
            break
    assert found is not None, "no single-permutation perturbation broke an edge ring"


# -- links and rings ---------------------------------------------------


def test_vertex_link_of_b4(b4):
    link = b4.vertex_link(0)
    assert link.triangle_count == 4
    assert link.euler_characteristic == 2
    assert link.connected and link.closed


def test_vertex_link_of_minimal_s3(ms3):
    link = ms3.vertex_link(0)
    assert link.triangle_count == 8    # 4 corners per tetrahedron, 2 tetrahedra
    assert link.euler_characteristic == 2


def test_vertex_link_rejects_wrong_dimension(b4):
    with pytest.raises(UnknownSimplex):
        b4.vertex_link(SimplexId(1, 0))


def test_edge_ring_of_b4(b4):
    ring = b4.edge_ring(0)
    assert len(ring) == 3
    tets = {t for t, _ in ring}
    assert len(tets) == 3


def test_edge_ring_lengths_sum(b4, ms3):
    for tri in (b4, ms3, lens_space(3, 1)):
        total = sum(len(tri.edge_ring(e)) for e in range(tri.edge_count))
        assert total == 6 * tri.tet_count


def test_edge_ring_rejects_triangle_id(b4):
    with pytest.raises(UnknownSimplex):
        b4.edge_ring(SimplexId(2, 0))


def test_incidence_counts(b4, ms3):
    for tri in (b4, ms3):
        assert sum(len(sides) for sides in tri.tri_sides) == 4 * tri.tet_count


# -- generators --------------------------------------------------------


def test_generate_boundary4simplex_counts(b4):
    assert (b4.vertex_count, b4.edge_count, b4.triangle_count, b4.tet_count) == (
        5,
        10,
        10,
        5,
    )


def test_generate_minimal_s3(ms3):
    assert ms3.tet_count == 2 and ms3.vertex_count == 1
    assert profile_of(ms3) == S3_PROFILE


@pytest.mark.parametrize("p,q", [(2, 1), (3, 1), (5, 2), (7, 3)])
def test_lens_spaces_have_cyclic_h1(p, q):
    tri = lens_space(p, q)
    assert validate_closed_manifold(tri).valid
    profile = homology(ChainComplex.from_triangulation(tri))
    assert profile.betti == (1, 0, 0, 1)
    assert profile.torsion == ((), (p,), (), ())


def test_lens_rejects_bad_parameters():
    for p, q in ((1, 1), (4, 2), (3, 0), (2, 3)):
        with pytest.raises(InvalidParameters):
            lens_space(p, q)


def test_generate_unknown_kind():
    with pytest.raises(InvalidParameters):
        generate("torus")


def test_every_census_link_is_a_sphere(b4, ms3):
    for tri in (b4, ms3, lens_space(2, 1), lens_space(3, 1)):
        for v in range(tri.vertex_count):
            link = tri.vertex_link(v)
            assert link.euler_characteristic == 2 and link.connected


def test_barycentric_subdivision_preserves_homology(ms3):
    sub = barycentric_subdivision(ms3)
    assert sub.tet_count == 48
    assert validate_closed_manifold(sub).valid
    assert profile_of(sub) == S3_PROFILE
    # cells of the subdivision have four distinct vertices
    for f in range(sub.triangle_count):
        assert len(set(sub.tri_vertex_ids[f])) == 3
