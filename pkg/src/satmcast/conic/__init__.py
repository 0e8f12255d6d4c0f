"""Dense LP / convex QP / SDP interior-point kernel."""

from .cones import Cone, smat, svec
from .kkt import kkt_residuals
from .problems import (
    ConicSolution,
    KktResiduals,
    LpProblem,
    QpProblem,
    SdpConstraint,
    SdpProblem,
    dump_problem,
)
from .solver import solve_lp, solve_qp, solve_sdp

__all__ = [
    "Cone",
    "smat",
    "svec",
    "kkt_residuals",
    "ConicSolution",
    "KktResiduals",
    "LpProblem",
    "QpProblem",
    "SdpConstraint",
    "SdpProblem",
    "dump_problem",
    "solve_lp",
    "solve_qp",
    "solve_sdp",
]
