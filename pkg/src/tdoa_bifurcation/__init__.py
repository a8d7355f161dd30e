"""Geometry of planar TDOA localization with three receivers.

Forward map, feasibility of measurements, closed-form inverse, and the
exact quintic that separates unique from ambiguous source positions.
"""

from ._kernels import BACKEND
from .bifurcation import (
    AtReceiver,
    CurveArc,
    DerivedScalars,
    GradientVanishes,
    IdealPoint,
    PointRegion,
    QuinticCurve,
    asymptotes,
    build_quintic,
    classify_point,
    derived_scalars,
    distance_to_curve,
    ideal_points,
    lemma_identity_residual,
    residual_chain,
    sample_curve,
    verify_leading_form,
)
from .exact import BivariatePoly, parse_rational
from .geometry import AffineLine, CollinearReceivers, ReceiverConfig, Vec2, load_config, make_config, wedge_star
from .localize import LocalizationResult, branch_residual, localize, localize_many
from .tdoa import (
    TauRegion,
    TdoaPair,
    classify_tau,
    ellipse_value,
    polytope_membership,
    polytope_vertices,
    tangency_points,
    tau2_forward,
)

__version__ = "0.1.0"
