"""Exact straightedge-and-compass constructions, construction games and their limits."""

from .closure import (
    Budget,
    Configuration,
    OpSet,
    closure_step,
    closure_to_depth,
    contains,
    density_probe,
    generic_quadruple_check,
)
from .game import (
    force_generic_quadruple,
    force_point_on_curve,
    play,
    pullback_adversary,
    rational_adversary,
    replay,
)
from .lab import defeat_strategy, find_test_divergence, rational_plane_derivability, transform_trace
from .lang import check, parse, pretty_print
from .numbers import ConstructibleReal, approx, parse_real, real, sign, sqrt
from .projective import (
    Conic,
    HLine,
    HPoint,
    ProjMap,
    apply_map,
    circle_circle_intersections,
    circle_from,
    circle_preserving_map,
    hyperbolic_map,
    join,
    line,
    line_conic_intersections,
    meet,
    point,
    rotation_map,
    unit_circle,
)

__all__ = [
    "Budget",
    "Configuration",
    "OpSet",
    "closure_step",
    "closure_to_depth",
    "contains",
    "density_probe",
    "generic_quadruple_check",
    "force_generic_quadruple",
    "force_point_on_curve",
    "play",
    "pullback_adversary",
    "rational_adversary",
    "replay",
    "defeat_strategy",
    "find_test_divergence",
    "rational_plane_derivability",
    "transform_trace",
    "check",
    "parse",
    "pretty_print",
    "ConstructibleReal",
    "approx",
    "parse_real",
    "real",
    "sign",
    "sqrt",
    "Conic",
    "HLine",
    "HPoint",
    "ProjMap",
    "apply_map",
    "circle_circle_intersections",
    "circle_from",
    "circle_preserving_map",
    "hyperbolic_map",
    "join",
    "line",
    "line_conic_intersections",
    "meet",
    "point",
    "rotation_map",
    "unit_circle",
]

__version__ = "0.1.0"
