"""Cell/spine decompositions of closed 3-manifold triangulations.

The package splits a triangulated closed 3-manifold into a single open
cell and a black 2-complex spine, collapses the spine greedily, rebuilds
it with certified edge- and vertex-clearing moves, grows blue canonical
polygons through it, and reports a sphere verdict exactly when the spine
contracts to a point, with an integer-homology oracle certifying every
intermediate state.
"""

from .errors import (
    Anomaly,
    DisconnectedComplex,
    EmptyTriangulation,
    GluingSyntaxError,
    InvalidGluing,
    InvalidParameters,
    MoveNotApplicable,
    NotFree,
    NotInner,
    NotIsolated,
    NotSeparating,
    OverflowGuard,
    PreconditionUnmet,
    SpinecellError,
    UnknownSimplex,
)
from .homology import (
    ChainComplex,
    GroupPresentation,
    HomologyProfile,
    euler_characteristic,
    homology,
    pi1_presentation,
    smith_normal_form,
)
from .pachner import (
    PachnerCorrespondence,
    applicable_targets,
    pachner_move,
    scramble,
)
from .polygon import (
    BluePolygon,
    RecognizerConfig,
    Verdict,
    absorb_inner_edge,
    extend_polygon,
    handle_disk_situation,
    recognize,
    reduce_figure_eight,
    seed_polygon,
)
from .rebuild import (
    PyramidReport,
    SChain,
    clear_edge,
    clear_vertex,
    detect_pyramids,
    edge_star_chain,
    repair_dead_ends,
)
from .spine import (
    InvariantReport,
    MoveTrace,
    PaintState,
    TraceRecord,
    TriangleClass,
    build_initial_spine,
    check_invariants,
    classify_triangles,
    collapse_all,
    collapse_free_triangle,
    collapse_isolated_edge,
    is_point_spine,
)
from .triangulation import (
    SimplexId,
    SurfaceComplex,
    Triangulation,
    ValidationReport,
    barycentric_subdivision,
    generate,
    lens_space,
    parse_triangulation,
    validate_closed_manifold,
)

__all__ = [name for name in dir() if not name.startswith("_")]
