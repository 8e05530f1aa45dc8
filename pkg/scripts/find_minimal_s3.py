"""Exhaustive search for a one-vertex 2-tetrahedron 3-sphere.

Enumerates all involutive face pairings of two tetrahedra (105 pairings
x 6^4 permutations), keeps the valid closed manifolds with V = 1 and
homology (Z, 0, 0, Z), and prints them grouped by skeleton counts.  The
first hit is what ``generate("minimal-s3")`` bundles; re-run this script
to regenerate or audit the table.

Usage: python scripts/find_minimal_s3.py [--all]
"""

import sys
from itertools import permutations

sys.path.insert(0, "src")

from spinecell.errors import InvalidGluing, SpinecellError
from spinecell.homology import ChainComplex, homology
from spinecell.triangulation import Triangulation, validate_closed_manifold

SIDES = [(t, f) for t in range(2) for f in range(4)]


def perms_fixing(f, f2):
    others = [x for x in range(4) if x != f]
    targets = [x for x in range(4) if x != f2]
    for img in permutations(targets):
        p = [None] * 4
        p[f] = f2
        for a, b in zip(others, img):
            p[a] = b
        yield tuple(p)


def pairings(sides):
    if not sides:
        yield []
        return
    first = sides[0]
    for k in range(1, len(sides)):
        other = sides[k]
        rest = sides[1:k] + sides[k + 1:]
        for tail in pairings(rest):
            yield [(first, other)] + tail


def search(stop_at_first=True):
    hits = []
    for pairing in pairings(SIDES):
        tables = [{}]
        for (t, f), (t2, f2) in pairing:
            new = []
            for table in tables:
                for p in perms_fixing(f, f2):
                    cand = dict(table)
                    cand[(t, f)] = (t2, p)
                    inv = [0] * 4
                    for i, v in enumerate(p):
                        inv[v] = i
                    cand[(t2, f2)] = (t, tuple(inv))
                    new.append(cand)
            tables = new
        for table in tables:
            gluings = [[table[(t, f)] for f in range(4)] for t in range(2)]
            try:
                tri = Triangulation(gluings)
            except (InvalidGluing, SpinecellError):
                continue
            if tri.vertex_count != 1:
                continue
            report = validate_closed_manifold(tri)
            if not report.valid:
                continue
            prof = homology(ChainComplex.from_triangulation(tri))
            if prof.betti != (1, 0, 0, 1) or any(prof.torsion):
                continue
            hits.append(tri)
            if stop_at_first:
                return hits
    return hits


if __name__ == "__main__":
    want_all = "--all" in sys.argv
    found = search(stop_at_first=not want_all)
    print(f"{len(found)} table(s) found")
    for tri in found:
        print(f"V={tri.vertex_count} E={tri.edge_count} F={tri.triangle_count}")
        print(tri.serialize())
