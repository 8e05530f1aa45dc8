"""Command-line surface: validate, homology, spine, recognize, gen, scramble.

Machine-parseable results go to stdout, diagnostics to stderr.  Exit
status: 0 on success or a SPHERE verdict, 2 NOT_SIMPLY_CONNECTED,
3 ANOMALY, 4 ITERATION_LIMIT, 1 on any input or usage error.  A file
argument of ``-`` reads standard input, so generator, scramble and
recognizer invocations compose as pipelines.
"""

from __future__ import annotations

import argparse
import sys

from .errors import SpinecellError
from .homology import ChainComplex, homology
from .pachner import scramble
from .polygon import RecognizerConfig, recognize
from .spine import build_initial_spine
from .triangulation import (
    Triangulation,
    generate,
    parse_triangulation,
    validate_closed_manifold,
)


def _read_triangulation(path: str) -> Triangulation:
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise SpinecellError(f"cannot read {path}: {exc}")
    return parse_triangulation(text)


def _write_output(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_validate(args) -> int:
    tri = _read_triangulation(args.file)
    report = validate_closed_manifold(tri)
    sys.stdout.write(
        f"valid={'true' if report.valid else 'false'}"
        f" tets={report.tet_count} vertices={report.vertex_count}"
        f" edges={report.edge_count} triangles={report.triangle_count}"
        f" chi={report.euler_characteristic}\n"
    )
    for code, detail in report.failures:
        sys.stdout.write(f"fail {code}: {detail}\n")
    return 0 if report.valid else 1


def _cmd_homology(args) -> int:
    tri = _read_triangulation(args.file)
    profile = homology(ChainComplex.from_triangulation(tri))
    for d in range(4):
        betti, torsion = profile.group(d)
        line = f"H{d} = Z^{betti}"
        for t in torsion:
            line += f" + Z/{t}"
        sys.stdout.write(line + "\n")
    return 0


def _cmd_spine(args) -> int:
    tri = _read_triangulation(args.file)
    report = validate_closed_manifold(tri)
    if not report.valid:
        raise SpinecellError(f"invalid triangulation: {report.failures[0]}")
    state = build_initial_spine(tri, args.seed_tet, args.strategy)
    bt, be, bv = state.counts()
    sys.stdout.write(
        f"spine tets={tri.tet_count} black_tris={bt} black_edges={be}"
        f" black_verts={bv} chi={state.chi}\n"
    )
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(state.trace.format())
    return 0


def _cmd_recognize(args) -> int:
    tri = _read_triangulation(args.file)
    report = validate_closed_manifold(tri)
    if not report.valid:
        raise SpinecellError(f"invalid triangulation: {report.failures[0]}")
    config = RecognizerConfig(
        seed_tet=args.seed % tri.tet_count,
        max_steps=args.max_steps,
        trace_path=args.trace,
    )
    verdict, _ = recognize(tri, config)
    sys.stdout.write(verdict.format_line() + "\n")
    return verdict.exit_status


def _cmd_gen(args) -> int:
    tri = generate(args.kind)
    _write_output(tri.serialize(), args.output)
    return 0


def _cmd_scramble(args) -> int:
    tri = _read_triangulation(args.file)
    report = validate_closed_manifold(tri)
    if not report.valid:
        raise SpinecellError(f"invalid triangulation: {report.failures[0]}")
    out = scramble(tri, args.moves, args.seed)
    _write_output(out.serialize(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinecell",
        description="Spine decompositions and sphere recognition for closed 3-manifold triangulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the closed-manifold conditions")
    p.add_argument("file", help="gluing file, or - for stdin")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("homology", help="integer homology of the triangulation")
    p.add_argument("file")
    p.set_defaults(func=_cmd_homology)

    p = sub.add_parser("spine", help="build the initial spanning-tree spine")
    p.add_argument("file")
    p.add_argument("--seed-tet", type=int, default=0)
    p.add_argument("--strategy", choices=("bfs", "dfs", "star"), default="bfs")
    p.add_argument("--trace", default=None, help="write the move trace to this path")
    p.set_defaults(func=_cmd_spine)

    p = sub.add_parser("recognize", help="run the sphere-recognition pipeline")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0, help="seed tetrahedron (default 0)")
    p.add_argument("--max-steps", type=int, default=10**6)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=_cmd_recognize)

    p = sub.add_parser("gen", help="emit a bundled census triangulation")
    p.add_argument("kind", help="boundary4simplex | minimal-s3 | lens:P,Q")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("scramble", help="apply seeded random Pachner moves")
    p.add_argument("file")
    p.add_argument("--moves", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_scramble)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SpinecellError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
