"""Geometry of H-convex functions on the Heisenberg group.

Library + CLI for H-sections, three-hop sections, engulfing constants, and
the induced quasi-metric, validated against closed forms.
"""

from .core import (
    Decomposition3,
    HPoint,
    HorizontalVector,
    PlaneTrace,
    decompose3,
    dilate,
    exp_horizontal,
    gauge_dist,
    gauge_norm,
    group_inv,
    group_mul,
    on_horizontal_plane,
    plane_trace,
    tilde_ball_contains,
)
from .funcs import HConvexFn, check_h_convexity, make_function, parse_expr
from .hnsections import Budget, HnMembership, Witness, hn_contains, verify_witness
from .quasimetric import QuasiDistance, d_phi
from .sections import h_section_boundary, m_M, round_constants
from .validate import chain_suite, closed_form_t_max, eta, example_agreement

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "HPoint",
    "HorizontalVector",
    "PlaneTrace",
    "Decomposition3",
    "group_mul",
    "group_inv",
    "dilate",
    "gauge_norm",
    "gauge_dist",
    "exp_horizontal",
    "on_horizontal_plane",
    "plane_trace",
    "decompose3",
    "tilde_ball_contains",
    "HConvexFn",
    "make_function",
    "parse_expr",
    "check_h_convexity",
    "h_section_boundary",
    "m_M",
    "round_constants",
    "Budget",
    "Witness",
    "HnMembership",
    "hn_contains",
    "verify_witness",
    "QuasiDistance",
    "d_phi",
    "closed_form_t_max",
    "eta",
    "example_agreement",
    "chain_suite",
]
