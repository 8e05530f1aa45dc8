"""Blue canonical polygons and the sphere-recognition driver.

A polygon is an overlay on the black spine: a growing edge-connected set
of blue triangles whose topological boundary is the red walk.  A clean
polygon has a single boundary cycle; when an extension lands on a red
vertex the boundary pinches into loops (a figure eight in the basic
case) which the reduction tries to retract loop by loop.  Coarse
triangulations can pinch repeatedly, so the boundary is kept as a tuple
of loops and extension keeps working across all of them; the reduction
is attempted on fresh pinches and a stall there is tolerated, because
the driver's progress comes from the disk-situation retraction, which
strictly shrinks the spine before the collapse restarts.

The recognizer wires the pipeline: homology gate, spanning-tree spine,
greedy collapse, polygon rounds, and a barycentric-subdivision fallback
for inputs too coarse for the move repertoire (sound because subdivision
does not change the manifold).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import Anomaly, NotInner, NotSeparating, PreconditionUnmet, UnknownSimplex
from .homology import ChainComplex, HomologyProfile, homology
from .rebuild import clear_edge, clear_vertex
from .spine import (
    MoveBudget,
    MoveTrace,
    PaintState,
    _coerce_index,
    build_initial_spine,
    check_invariants,
    collapse_all,
    collapse_free_triangle,
    POINT,
)
from .triangulation import Triangulation, barycentric_subdivision

Step = tuple[int, int, int]          # (edge id, tail vertex, head vertex)

EXTENDED = "Extended"
INNER_EDGE_ABSORBED = "InnerEdgeAbsorbed"
FIGURE_EIGHT = "FigureEight"
DISK_SITUATION = "DiskSituation"
SPHERE_SITUATION = "SphereSituation"


class ReductionStall(Anomaly):
    """Lemma-9 style retraction cannot proceed without a deeper pinch."""


class DiskReopened(Anomaly):
    """Pyramid clearing re-created extension candidates on the boundary."""


MAX_CLEAR_ATTEMPTS = 8     # compound-move trials per selection step


@dataclass(frozen=True)
class BluePolygon:
    """Blue overlay on a host paint state generation."""

    blue_tris: frozenset
    blue_edges: frozenset
    blue_verts: frozenset
    cycles: tuple                      # closed step walks; one when clean
    support: int | None                # pinch vertex of a fresh figure eight
    acquisitions: tuple                # triangle bluing order
    seeded_black_count: int
    stuck_slits: tuple = ()            # (edge, tip, mult, black-at-tip) fingerprints

    @property
    def red_edges(self) -> frozenset:
        return frozenset(e for walk in self.cycles for (e, _, _) in walk)

    @property
    def red_verts(self) -> frozenset:
        return frozenset(t for walk in self.cycles for (_, t, _) in walk)

    def boundary_length(self) -> int:
        return sum(len(walk) for walk in self.cycles)


def seed_polygon(state: PaintState, tri) -> tuple[PaintState, BluePolygon]:
    """Seed a one-triangle polygon; its three edges become the red walk."""
    f = _coerce_index(tri, 2)
    if f not in state.black_tris:
        raise UnknownSimplex(f"triangle {f} is not a black spine triangle")
    base = state.base
    v0, v1, v2 = base.tri_vertex_ids[f]
    e12, e02, e01 = base.tri_edge_ids[f]
    if len({v0, v1, v2}) < 3 or len({e01, e12, e02}) < 3:
        raise Anomaly(f"seed triangle {f} has identified vertices or edges")
    walk = ((e01, v0, v1), (e12, v1, v2), (e02, v2, v0))
    polygon = BluePolygon(
        blue_tris=frozenset({f}),
        blue_edges=frozenset(),
        blue_verts=frozenset(),
        cycles=(walk,),
        support=None,
        acquisitions=(f,),
        seeded_black_count=len(state.black_tris),
    )
    return state._record("seed_polygon", (f,)), polygon


def _protection(state, polygon, extra_tris=()):
    return dict(
        protected_tris=set(polygon.blue_tris) | set(extra_tris),
        protected_edges=set(polygon.red_edges) | set(polygon.blue_edges),
        protected_verts=set(polygon.red_verts) | set(polygon.blue_verts),
    )


def _blue_on_edge(state, polygon, e):
    return [f for f in sorted(polygon.blue_tris) if e in state.base.tri_edge_ids[f]]


def _blue_fan(state, polygon, v):
    return [f for f in sorted(polygon.blue_tris) if v in state.base.tri_vertex_ids[f]]


def _apex_of(state, tri, rho, a, b):
    """Apex vertex and the two side edges of tri across its edge rho."""
    base = state.base
    edges = base.tri_edge_ids[tri]
    verts = base.tri_vertex_ids[tri]
    slots = [k for k in range(3) if edges[k] == rho]
    if len(slots) != 1:
        raise Anomaly(f"triangle {tri} meets red edge {rho} more than once")
    k = slots[0]
    apex = verts[k]
    i, j = [m for m in range(3) if m != k]
    if {verts[i], verts[j]} != {a, b} or verts[i] == verts[j]:
        raise Anomaly(f"triangle {tri} does not span the red step over edge {rho}")
    if apex in (a, b):
        raise Anomaly(f"triangle {tri} has identified vertices")
    if verts[i] == a:
        e_ac, e_cb = edges[j], edges[i]
    else:
        e_ac, e_cb = edges[i], edges[j]
    return apex, e_ac, e_cb


def _tail_occurrences(cycles):
    count = {}
    for walk in cycles:
        for (_, tail, _) in walk:
            count[tail] = count.get(tail, 0) + 1
    return count


def _normalize_cycles(cycles):
    """Split loops at internally repeated vertices until every loop is simple."""
    out = list(cycles)
    changed = True
    while changed:
        changed = False
        for ci, walk in enumerate(out):
            tails = [step[1] for step in walk]
            seen = {}
            for i, t in enumerate(tails):
                if t in seen:
                    j0, j1 = seen[t], i
                    loop_a = walk[j0:j1]
                    loop_b = walk[j1:] + walk[:j0]
                    out[ci:ci + 1] = [w for w in (loop_a, loop_b) if w]
                    changed = True
                    break
                seen[t] = i
            if changed:
                break
    return tuple(out)


def _extend_across(state, polygon, tri, rho):
    """Clear rho, blue tri, splice the walk.  Returns the mid state."""
    keepers = _blue_on_edge(state, polygon, rho)
    if len(keepers) != 1:
        raise Anomaly(f"red edge {rho} has {len(keepers)} blue sides")
    state = clear_edge(
        state, rho, (keepers[0], tri), **_protection(state, polygon, extra_tris=(tri,))
    )
    hits = [
        (ci, si)
        for ci, walk in enumerate(polygon.cycles)
        for si, step in enumerate(walk)
        if step[0] == rho
    ]
    if len(hits) != 1:
        raise Anomaly(f"red edge {rho} appears {len(hits)} times in the boundary")
    ci, si = hits[0]
    walk = polygon.cycles[ci]
    _, a, b = walk[si]
    apex, e_ac, e_cb = _apex_of(state, tri, rho, a, b)
    new_walk = walk[:si] + ((e_ac, a, apex), (e_cb, apex, b)) + walk[si + 1:]
    cycles = polygon.cycles[:ci] + (new_walk,) + polygon.cycles[ci + 1:]
    polygon = replace(
        polygon,
        blue_tris=polygon.blue_tris | {tri},
        cycles=cycles,
        acquisitions=polygon.acquisitions + (tri,),
    )
    return state, polygon


def absorb_inner_edge(state, polygon, edge) -> tuple[PaintState, BluePolygon]:
    """Repaint an inner edge and its lone endpoint blue.

    Requires the rebuilds to have run: multiplicity 2 with both sides
    blue, and no black triangle left at the lone endpoint.
    """
    e = _coerce_index(edge, 1)
    occurrences = _tail_occurrences(polygon.cycles)
    pair = None
    found_any = False
    for ci, walk in enumerate(polygon.cycles):
        n = len(walk)
        for si in range(n):
            s1, s2 = walk[si], walk[(si + 1) % n]
            if s1[0] == e and s2[0] == e and s1[2] == s2[1] and s1[1] == s2[2]:
                found_any = True
                if occurrences.get(s1[2], 0) == 1:
                    pair = (ci, si)
                    break
        if pair:
            break
    if pair is None:
        if found_any:
            raise NotInner(f"edge {e} has no traversal pair with a free endpoint")
        raise NotInner(f"edge {e} is not doubly traversed by the boundary")
    ci, si = pair
    walk = polygon.cycles[ci]
    tip = walk[si][2]
    blues = _blue_on_edge(state, polygon, e)
    if state.edge_multiplicity[e] != 2 or len(blues) != 2:
        raise PreconditionUnmet(f"edge {e} is not standard with two blue sides")
    black_at_tip = [
        f
        for f in state.black_tris - polygon.blue_tris
        if tip in state.base.tri_vertex_ids[f]
    ]
    if black_at_tip:
        raise PreconditionUnmet(f"black triangles {black_at_tip} remain at {tip}")
    n = len(walk)
    drop = {si, (si + 1) % n}
    new_walk = tuple(step for k, step in enumerate(walk) if k not in drop)
    cycles = tuple(
        w for w in (polygon.cycles[:ci] + (new_walk,) + polygon.cycles[ci + 1:]) if w
    )
    polygon = replace(
        polygon,
        blue_edges=polygon.blue_edges | {e},
        blue_verts=polygon.blue_verts | {tip},
        cycles=cycles,
    )
    return state._record("absorb_inner_edge", (e, tip)), polygon


def _slit_fingerprint(state, polygon, e, tip):
    n_black = sum(
        1
        for f in state.black_tris - polygon.blue_tris
        if tip in state.base.tri_vertex_ids[f]
    )
    return (e, tip, state.edge_multiplicity[e], n_black)


def _cancel_slits(state, polygon):
    """Absorb immediate back-and-forth pairs where the rebuilds permit.

    A slit whose edge or vertex clearing cannot certify is deferred; the
    fingerprint of its neighbourhood is remembered so the (expensive)
    retry only happens after something there actually changed.
    """
    absorbed = False
    deferred = {(e, tip) for (e, tip, _, _) in polygon.stuck_slits}
    stale = {
        (e, tip)
        for (e, tip, mult, nb) in polygon.stuck_slits
        if _slit_fingerprint(state, polygon, e, tip) != (e, tip, mult, nb)
    }
    deferred -= stale
    while True:
        target = None
        for walk in polygon.cycles:
            n = len(walk)
            for si in range(n):
                s1, s2 = walk[si], walk[(si + 1) % n]
                if s1[0] == s2[0] and s1[2] == s2[1] and s1[1] == s2[2]:
                    tip = s1[2]
                    if (
                        (s1[0], tip) not in deferred
                        and _tail_occurrences(polygon.cycles).get(tip, 0) == 1
                    ):
                        target = (s1[0], tip)
                        break
            if target:
                break
        if target is None:
            slits = tuple(
                _slit_fingerprint(state, polygon, e, tip) for (e, tip) in sorted(deferred)
            )
            polygon = replace(polygon, stuck_slits=slits)
            return state, polygon, absorbed
        e, tip = target
        blues = _blue_on_edge(state, polygon, e)
        if len(blues) != 2:
            deferred.add(target)
            continue
        try:
            mid = state
            if state.edge_multiplicity[e] > 2:
                mid = clear_edge(mid, e, tuple(blues), **_protection(mid, polygon))
            mid = clear_vertex(
                mid, tip, _blue_fan(mid, polygon, tip), **_protection(mid, polygon)
            )
            state, polygon = absorb_inner_edge(mid, polygon, e)
            absorbed = True
        except (Anomaly, NotInner, NotSeparating, PreconditionUnmet):
            deferred.add(target)


def extend_polygon(state, polygon) -> tuple[PaintState, BluePolygon, str]:
    """One extension round across the lowest extension-set member.

    Outcomes: Extended, InnerEdgeAbsorbed (a slit was absorbed along the
    way), FigureEight (the boundary just pinched), DiskSituation (no
    extension exists), SphereSituation (the boundary closed onto a black
    triangle; the paper argues this cannot happen).
    """
    base = state.base
    red = polygon.red_edges
    black_candidates = sorted(state.black_tris - polygon.blue_tris)

    if len(polygon.cycles) == 1 and len(polygon.cycles[0]) == 3 and len(red) == 3:
        for f in black_candidates:
            if set(base.tri_edge_ids[f]) == set(red) and len(set(base.tri_edge_ids[f])) == 3:
                polygon = replace(
                    polygon,
                    blue_tris=polygon.blue_tris | {f},
                    blue_edges=polygon.blue_edges | red,
                    cycles=(),
                    acquisitions=polygon.acquisitions + (f,),
                )
                return state._record("sphere_situation", (f,)), polygon, SPHERE_SITUATION

    loops_before = len(polygon.cycles)
    viable = []
    for f in black_candidates:
        for rho in sorted(e for e in set(base.tri_edge_ids[f]) if e in red):
            hits = [
                (ci, si)
                for ci, walk in enumerate(polygon.cycles)
                for si, step in enumerate(walk)
                if step[0] == rho
            ]
            if len(hits) != 1:
                continue
            ci, si = hits[0]
            _, a, b = polygon.cycles[ci][si]
            try:
                _apex_of(state, f, rho, a, b)
            except Anomaly:
                continue
            viable.append((f, rho))
    if not viable:
        if any(any(e in red for e in base.tri_edge_ids[f]) for f in black_candidates):
            raise Anomaly("every extension candidate is degenerate")
        return state, polygon, DISK_SITUATION

    # lowest candidate first; clearing failures fall through to the next
    result = None
    failure = None
    for tri, rho in viable[:MAX_CLEAR_ATTEMPTS]:
        try:
            result = _extend_across(state, polygon, tri, rho)
            break
        except Anomaly as exc:
            failure = exc
    if result is None:
        raise Anomaly(f"no extension candidate could be cleared: {failure}")
    state, polygon = result
    state, polygon, absorbed = _cancel_slits(state, polygon)

    if not polygon.cycles:
        return state._record("sphere_situation", (tri,)), polygon, SPHERE_SITUATION
    cycles = _normalize_cycles(polygon.cycles)
    support = polygon.support
    if len(cycles) == 2 and loops_before == 1:
        shared_tails = set(s[1] for s in cycles[0]) & set(s[1] for s in cycles[1])
        support = min(shared_tails) if shared_tails else None
    polygon = replace(polygon, cycles=cycles, support=support)
    state = state._record("extend_polygon", (tri, rho))
    if len(cycles) > loops_before and len(cycles) == 2 and support is not None:
        return state, polygon, FIGURE_EIGHT
    return state, polygon, INNER_EDGE_ABSORBED if absorbed else EXTENDED


def reduce_figure_eight(state, polygon) -> tuple[PaintState, BluePolygon]:
    """Retract one loop of a figure-eight boundary (farthest edge first).

    Candidates that would pinch the boundary somewhere new are skipped;
    if every candidate does, the reduction stalls with ReductionStall
    and the caller may keep extending on the pinched boundary instead.
    """
    if len(polygon.cycles) == 1:
        return state, polygon
    if len(polygon.cycles) != 2 or polygon.support is None:
        raise PreconditionUnmet("figure-eight reduction needs two loops and a support")
    base = state.base
    x0 = polygon.support
    # one triangle joins the blue set per step, so the triangle count
    # bounds any terminating reduction
    budget = base.triangle_count + 8

    while len(polygon.cycles) == 2:
        if budget <= 0:
            raise Anomaly("figure-eight reduction exceeded the move budget")
        budget -= 1
        order = sorted(
            range(2),
            key=lambda ci: (len(polygon.cycles[ci]), min(s[0] for s in polygon.cycles[ci])),
        )
        li = order[0]
        loop = polygon.cycles[li]
        loop_red = {s[0] for s in loop}
        candidates = sorted(
            f
            for f in state.black_tris - polygon.blue_tris
            if any(e in loop_red for e in base.tri_edge_ids[f])
        )
        if not candidates:
            raise Anomaly("figure-eight loop carries no black triangle")

        closing = None
        if len(loop) == 3 and len(loop_red) == 3:
            for f in candidates:
                if set(base.tri_edge_ids[f]) == loop_red and len(set(base.tri_edge_ids[f])) == 3:
                    closing = f
                    break
        if closing is not None:
            state, polygon = _close_loop(state, polygon, li, closing, x0)
            break

        def edge_distance(si):
            return min(si, len(loop) - 1 - si)

        ranked = sorted(
            {
                (-edge_distance(si), f, step[0])
                for f in candidates
                for si, step in enumerate(loop)
                if step[0] in set(base.tri_edge_ids[f])
            }
        )
        accepted = None
        for _, tri, rho in ranked[:MAX_CLEAR_ATTEMPTS]:
            try:
                trial_state, trial_polygon = _extend_across(state, polygon, tri, rho)
                trial_state, trial_polygon, _ = _cancel_slits(trial_state, trial_polygon)
            except Anomaly:
                continue
            counts = _tail_occurrences(trial_polygon.cycles)
            doubled = [v for v, c in counts.items() if c >= 2]
            if any(c > 2 for c in counts.values()) or len(doubled) > 1:
                continue
            accepted = (trial_state, trial_polygon)
            break
        if accepted is None:
            raise ReductionStall("every figure-eight extension deepens the pinch")
        state, polygon = accepted
        polygon = replace(polygon, cycles=_normalize_cycles(polygon.cycles))
        if len(polygon.cycles) == 1:
            polygon = replace(polygon, support=None)
            break

    if len(polygon.cycles) == 1:
        polygon = replace(polygon, support=None)
    return state._record("reduce_figure_eight", (x0,)), polygon


def _close_loop(state, polygon, li, closing, x0):
    """Blue the single black triangle bounded by a 3-step loop."""
    base = state.base
    loop = polygon.cycles[li]
    loop_red = {s[0] for s in loop}
    for e in sorted(loop_red):
        blues = _blue_on_edge(state, polygon, e)
        if len(blues) != 1:
            raise Anomaly(f"loop edge {e} has {len(blues)} blue sides")
        if state.edge_multiplicity[e] > 2:
            state = clear_edge(
                state, e, (blues[0], closing),
                **_protection(state, polygon, extra_tris=(closing,)),
            )
    polygon = replace(
        polygon,
        blue_tris=polygon.blue_tris | {closing},
        acquisitions=polygon.acquisitions + (closing,),
    )
    loop_verts = sorted({s[1] for s in loop} - {x0})
    for w in loop_verts:
        try:
            state = clear_vertex(
                state, w, _blue_fan(state, polygon, w), **_protection(state, polygon)
            )
        except NotSeparating as exc:
            raise Anomaly(f"loop vertex {w} could not be cleared: {exc}")
    polygon = replace(
        polygon,
        blue_edges=polygon.blue_edges | loop_red,
        blue_verts=polygon.blue_verts | set(loop_verts),
        cycles=tuple(w for k, w in enumerate(polygon.cycles) if k != li),
        support=None,
    )
    return state, polygon


def handle_disk_situation(state, polygon) -> PaintState:
    """Clear boundary-vertex pyramids, then retract the whole polygon.

    The resulting spine must have strictly fewer black triangles than
    the one the polygon was seeded on.  Raises DiskReopened when the
    clearing repaints put new black triangles onto the red boundary, in
    which case the caller should resume extending.
    """
    base = state.base
    red = polygon.red_edges

    def ext_members(st):
        return [
            f
            for f in st.black_tris - polygon.blue_tris
            if any(e in red for e in base.tri_edge_ids[f])
        ]

    if ext_members(state):
        raise PreconditionUnmet("extension set is not empty")

    budget = 4 * base.tet_count
    skip = set()
    while True:
        if budget <= 0:
            raise Anomaly("boundary pyramids kept regrowing")
        budget -= 1
        dirty = None
        for v in sorted(polygon.red_verts - skip):
            blocked = [
                f
                for f in state.black_tris - polygon.blue_tris
                if v in base.tri_vertex_ids[f]
            ]
            if blocked:
                dirty = v
                break
        if dirty is None:
            break
        try:
            state = clear_vertex(
                state, dirty, _blue_fan(state, polygon, dirty), **_protection(state, polygon)
            )
        except (Anomaly, NotSeparating):
            skip.add(dirty)      # pinched vertex: best effort, retraction decides
        if ext_members(state):
            raise DiskReopened(state)

    remaining = list(polygon.acquisitions)
    while remaining:
        mult = state.edge_multiplicity
        pick = None
        for tri in reversed(remaining):
            free = sorted(e for e in set(base.tri_edge_ids[tri]) if mult[e] == 1)
            if free:
                pick = (tri, free[0])
                break
        if pick is None:
            raise Anomaly("polygon retraction blocked: no free blue triangle")
        tri, e = pick
        state = collapse_free_triangle(state, tri, e)
        remaining.remove(tri)

    if len(state.black_tris) >= polygon.seeded_black_count:
        raise Anomaly(
            f"disk retraction did not shrink the spine "
            f"({len(state.black_tris)} >= {polygon.seeded_black_count})"
        )
    return state._record("handle_disk_situation", (polygon.acquisitions[0],))


# -- recognizer --------------------------------------------------------


SPHERE = "SPHERE"
NOT_SIMPLY_CONNECTED = "NOT_SIMPLY_CONNECTED"
ANOMALY = "ANOMALY"
ITERATION_LIMIT = "ITERATION_LIMIT"


@dataclass(frozen=True)
class Verdict:
    kind: str
    steps: int
    tets: int
    detail: str
    profile: HomologyProfile | None = None

    def format_line(self) -> str:
        return f"verdict={self.kind} steps={self.steps} tets={self.tets} detail={self.detail}"

    @property
    def exit_status(self) -> int:
        return {SPHERE: 0, NOT_SIMPLY_CONNECTED: 2, ANOMALY: 3, ITERATION_LIMIT: 4}[self.kind]


@dataclass(frozen=True)
class RecognizerConfig:
    seed_tet: int = 0
    strategy: str = "bfs"
    max_steps: int = 10**6
    trace_path: str | None = None
    subdivision_limit: int = 2


def recognize(tri: Triangulation, config: RecognizerConfig = RecognizerConfig()) -> tuple[Verdict, MoveTrace]:
    """Full pipeline: homology gate, spine, collapse, polygon rounds.

    Every failure mode is a verdict, never an exception: non-sphere
    homology refuses early, anomalies preserve their trace, and the
    step budget plus state-hash cycle detection bound the run.
    """
    profile = homology(ChainComplex.from_triangulation(tri))
    gate_bad = (
        not profile.is_trivial(1)
        or not profile.is_trivial(2)
        or profile.group(3) != (1, ())
        or profile.group(0) != (1, ())
    )
    if gate_bad:
        detail = f"H1={profile.format_group(1)}"
        verdict = Verdict(NOT_SIMPLY_CONNECTED, 0, tri.tet_count, detail, profile)
        _write_trace(config.trace_path, MoveTrace())
        return verdict, MoveTrace()

    budget = MoveBudget(config.max_steps)
    current = tri
    trace = MoveTrace()
    subdivisions = 0
    last_anomaly = None

    while True:
        for strategy, seed in _attempt_ladder(config, current.tet_count):
            if budget.spent():
                return _finish(
                    Verdict(ITERATION_LIMIT, budget.used, current.tet_count, "step budget exhausted"),
                    trace,
                    config,
                )
            budget.charge()
            state = build_initial_spine(current, seed, strategy)
            state = replace(state, trace=_concat(trace, state.trace))
            verdict, state, anomaly = _recognize_on_spine(state, budget)
            trace = state.trace
            if anomaly is None:
                return _finish(verdict, trace, config)
            last_anomaly = anomaly
        subdivisions += 1
        if subdivisions > config.subdivision_limit:
            verdict = Verdict(
                ANOMALY, len(trace), current.tet_count, f"anomaly: {last_anomaly}"
            )
            return _finish(verdict, trace, config)
        current = barycentric_subdivision(current)
        trace = trace.append("subdivide", (current.tet_count,), 0, 0, 0, 0)


def _attempt_ladder(config, tet_count):
    """Deterministic spine choices tried per refinement level."""
    ladder = [(config.strategy, config.seed_tet % tet_count)]
    for strategy in ("bfs", "dfs", "star"):
        for seed in (0, 1 % tet_count):
            if (strategy, seed) not in ladder:
                ladder.append((strategy, seed))
    return ladder


def _concat(prefix: MoveTrace, suffix: MoveTrace) -> MoveTrace:
    trace = prefix
    for rec in suffix.records:
        trace = trace.append(
            rec.op, rec.args, rec.black_tris, rec.black_edges, rec.black_verts, rec.chi
        )
    return trace


def _pick_seed(state):
    """Lowest-id black triangle with embedded vertices and edges."""
    base = state.base
    for f in sorted(state.black_tris):
        if len(set(base.tri_vertex_ids[f])) == 3 and len(set(base.tri_edge_ids[f])) == 3:
            return f
    return min(state.black_tris)


def _recognize_on_spine(state, budget):
    """Collapse/polygon rounds on one spine.

    Returns (verdict, state, None) on a decision and (None, state,
    anomaly) when a move reported an Anomaly, so the caller can decide
    between subdividing and giving up with the trace preserved.
    """
    seen = {}
    try:
        while True:
            state, outcome = collapse_all(state, budget)
            if outcome == POINT:
                report = check_invariants(state, expect_simply_connected=True)
                if not report.ok:
                    raise Anomaly(f"point spine fails certification: {report.failures[0]}")
                verdict = Verdict(
                    SPHERE, len(state.trace), state.base.tet_count, "spine collapsed to a point"
                )
                return verdict, state, None
            if budget.spent():
                return (
                    Verdict(ITERATION_LIMIT, budget.used, state.base.tet_count, "step budget exhausted"),
                    state,
                    None,
                )
            key = (state.black_tris, state.black_edges, state.black_verts)
            bucket = seen.setdefault(hash(key), [])
            if key in bucket:
                return (
                    Verdict(ITERATION_LIMIT, budget.used, state.base.tet_count, "state cycle detected"),
                    state,
                    None,
                )
            bucket.append(key)

            if not state.black_tris:
                raise Anomaly("collapse stuck on a one-dimensional spine")
            seed = _pick_seed(state)
            budget.charge()
            state, polygon = seed_polygon(state, seed)
            rounds = 4 * state.base.triangle_count + 32
            while True:
                rounds -= 1
                if rounds <= 0:
                    raise Anomaly("polygon round budget exhausted without a disk situation")
                if budget.spent():
                    return (
                        Verdict(ITERATION_LIMIT, budget.used, state.base.tet_count, "step budget exhausted"),
                        state,
                        None,
                    )
                budget.charge()
                state, polygon, outcome = extend_polygon(state, polygon)
                if outcome in (EXTENDED, INNER_EDGE_ABSORBED):
                    continue
                if outcome == FIGURE_EIGHT:
                    try:
                        state, polygon = reduce_figure_eight(state, polygon)
                    except ReductionStall:
                        pass       # keep extending on the pinched boundary
                    continue
                if outcome == DISK_SITUATION:
                    try:
                        state = handle_disk_situation(state, polygon)
                        break
                    except DiskReopened as reopened:
                        state = reopened.args[0]
                        continue       # clearing re-created candidates; extend on
                if outcome == SPHERE_SITUATION:
                    return (
                        Verdict(
                            ANOMALY,
                            len(state.trace),
                            state.base.tet_count,
                            "sphere situation observed (flagged impossible)",
                        ),
                        state,
                        None,
                    )
    except Anomaly as anomaly:
        return None, state, anomaly


def _finish(verdict, trace, config):
    _write_trace(config.trace_path, trace)
    return verdict, trace


def _write_trace(path, trace):
    if path:
        with open(path, "w") as fh:
            fh.write(trace.format())
