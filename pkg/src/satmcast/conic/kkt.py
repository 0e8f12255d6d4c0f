"""Independent KKT residual checker.

Recomputes primal feasibility, dual feasibility and complementarity from
raw standard-form data and a candidate primal-dual triple.  Deliberately
separate from the solver loop so reported diagnostics are never echoes of
solver-internal quantities.
"""

from __future__ import annotations

import numpy as np

from .cones import Cone
from .problems import KktResiduals

__all__ = ["kkt_residuals"]


def _cone_violation(cone: Cone, v: np.ndarray) -> float:
    me = cone.min_eig(v)
    if me == np.inf:
        return 0.0
    return max(0.0, -me) / (1.0 + float(np.abs(v).max(initial=0.0)))


def kkt_residuals(Q, c, A, b, cone: Cone, x, y, z) -> KktResiduals:
    """Scaled residuals of the standard-form KKT system.

    primal:  ||Ax - b||_inf / (1 + ||b||_inf), plus cone violation of x
    dual:    ||Qx + c - A'y - z||_inf / (1 + ||c||_inf), plus cone violation of z
    compl:   |<x, z>| / (1 + |primal obj| + |dual obj|)
    """
    qx = Q @ x if Q is not None else np.zeros_like(x)
    if A.shape[0]:
        rp = np.abs(A @ x - b).max() / (1.0 + np.abs(b).max())
        aty = A.T @ y
    else:
        rp = 0.0
        aty = 0.0
    rd = np.abs(qx + c - aty - z).max() / (1.0 + np.abs(c).max())
    pobj = float(0.5 * x @ qx + c @ x)
    dobj = float(b @ y - 0.5 * x @ qx) if A.shape[0] else float(-0.5 * x @ qx)
    comp = abs(float(x @ z)) / (1.0 + abs(pobj) + abs(dobj))
    return KktResiduals(
        primal=float(max(rp, _cone_violation(cone, x))),
        dual=float(max(rd, _cone_violation(cone, z))),
        complementarity=float(comp),
    )
