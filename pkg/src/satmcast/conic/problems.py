"""Problem containers and solution type for the dense conic kernel.

Three user-facing problem classes (LP, convex QP, SDP) are canonicalized
by the solver into one standard form

    minimize   0.5 x'Qx + c'x
    subject to A x = b,   x in K = R^p_+  x  PSD(d_1) x ... x PSD(d_B)

with PSD blocks stored in scaled (svec) vectorization.  Complex Hermitian
matrix variables are accepted and handled through the real symmetric
embedding [[Re,-Im],[Im,Re]].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "LpProblem",
    "QpProblem",
    "SdpProblem",
    "SdpConstraint",
    "ConicSolution",
    "KktResiduals",
    "dump_problem",
]


def _as_2d(M, name):
    if M is None:
        return None
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    return M


def _as_1d(v, name):
    if v is None:
        return None
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    return v


@dataclass
class LpProblem:
    """min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lb <= x <= ub.

    Bounds default to x >= 0; pass -inf/+inf entries to free them.
    """

    c: np.ndarray
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        self.c = _as_1d(self.c, "c")
        n = self.c.shape[0]
        self.A_ub = _as_2d(self.A_ub, "A_ub")
        self.b_ub = _as_1d(self.b_ub, "b_ub")
        self.A_eq = _as_2d(self.A_eq, "A_eq")
        self.b_eq = _as_1d(self.b_eq, "b_eq")
        self.lb = np.zeros(n) if self.lb is None else _as_1d(self.lb, "lb")
        self.ub = np.full(n, np.inf) if self.ub is None else _as_1d(self.ub, "ub")
        for M, v, tag in ((self.A_ub, self.b_ub, "ub"), (self.A_eq, self.b_eq, "eq")):
            if (M is None) != (v is None):
                raise ValueError(f"A_{tag} and b_{tag} must be given together")
            if M is not None and (M.shape[1] != n or M.shape[0] != v.shape[0]):
                raise ValueError(f"A_{tag}/b_{tag} dimensions inconsistent")
        if self.lb.shape[0] != n or self.ub.shape[0] != n:
            raise ValueError("bound dimensions inconsistent")
        # lb > ub is legal input: the solver reports it as infeasible

    @property
    def n(self) -> int:
        return self.c.shape[0]


@dataclass
class QpProblem(LpProblem):
    """min 0.5 x'Qx + c'x under the same constraint structure as LpProblem.

    Q must be symmetric positive semidefinite.
    """

    Q: np.ndarray | None = None

    def __post_init__(self):
        super().__post_init__()
        if self.Q is None:
            raise ValueError("QpProblem requires Q")
        self.Q = _as_2d(self.Q, "Q")
        n = self.n
        if self.Q.shape != (n, n):
            raise ValueError("Q must be n x n")
        if not np.allclose(self.Q, self.Q.T, atol=1e-10):
            raise ValueError("Q must be symmetric")
        w = np.linalg.eigvalsh(0.5 * (self.Q + self.Q.T))
        if w.min() < -1e-8 * max(1.0, abs(w.max())):
            raise ValueError("Q must be positive semidefinite")


@dataclass
class SdpConstraint:
    """One linear constraint  sum_b <A_b, X_b> + a's  (sense)  rhs.

    ``blocks`` maps block index -> coefficient matrix (symmetric real for
    'sym' blocks, Hermitian complex for 'herm' blocks); ``scalars`` is the
    coefficient vector over the scalar variables.  sense is '<=', '>=' or '='.
    """

    blocks: dict
    scalars: np.ndarray | None
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in ("<=", ">=", "="):
            raise ValueError("sense must be '<=', '>=' or '='")


@dataclass
class SdpProblem:
    """Linear objective over PSD matrix variables plus nonnegative scalars.

    block_specs: sequence of ('sym', d) or ('herm', d) declaring each matrix
    variable.  Objective coefficients mirror the constraint layout.  Scalar
    variables are constrained nonnegative.
    """

    block_specs: list
    n_scalars: int = 0
    obj_blocks: dict = field(default_factory=dict)
    obj_scalars: np.ndarray | None = None
    constraints: list = field(default_factory=list)

    def __post_init__(self):
        for kind, d in self.block_specs:
            if kind not in ("sym", "herm") or d < 1:
                raise ValueError(f"bad block spec ({kind}, {d})")
        if self.obj_scalars is not None:
            self.obj_scalars = _as_1d(np.asarray(self.obj_scalars, dtype=float),
                                      "obj_scalars")
            if self.obj_scalars.shape[0] != self.n_scalars:
                raise ValueError("obj_scalars length mismatch")

    def add_constraint(self, blocks, scalars, sense, rhs):
        self.constraints.append(SdpConstraint(blocks, scalars, sense, float(rhs)))


class KktResiduals(NamedTuple):
    primal: float
    dual: float
    complementarity: float

    def max(self) -> float:
        return max(self.primal, self.dual, self.complementarity)


@dataclass
class ConicSolution:
    """Solver output.

    x holds the primal point in the caller's coordinates: an ndarray for
    LP/QP, and for SDP a (list of block matrices, scalar array) pair.
    Duals y/z and the KKT residuals refer to the canonical standard form;
    the residuals are recomputed from scratch by an independent checker,
    never echoed from solver internals.
    """

    status: str                        # 'optimal' | 'infeasible' | 'max-iter'
    x: object
    objective: float
    dual_objective: float
    kkt_residuals: KktResiduals
    y: np.ndarray
    z: np.ndarray
    iterations: int
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _write_matrix(lines, name, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines.append(f"{name} {M.shape[0]} {M.shape[1]}")
    for row in M:
        lines.append(" ".join(f"{v:.17g}" for v in row))


def dump_problem(problem, path=None) -> str:
    """Plain-text canonical dump (header line, then matrices row-major).

    Intended for cross-checking instances against external modeling tools.
    """
    lines = []
    if isinstance(problem, QpProblem):
        lines.append("qp")
        _write_matrix(lines, "Q", problem.Q)
    elif isinstance(problem, LpProblem):
        lines.append("lp")
    elif isinstance(problem, SdpProblem):
        lines.append("sdp")
        lines.append("blocks " + " ".join(f"{k}:{d}" for k, d in problem.block_specs))
        lines.append(f"scalars {problem.n_scalars}")
        for b, M in sorted(problem.obj_blocks.items()):
            _write_matrix(lines, f"obj_block {b} re", np.real(M))
            if np.iscomplexobj(M):
                _write_matrix(lines, f"obj_block {b} im", np.imag(M))
        if problem.obj_scalars is not None:
            _write_matrix(lines, "obj_scalars", problem.obj_scalars[None, :])
        for i, con in enumerate(problem.constraints):
            lines.append(f"constraint {i} sense {con.sense} rhs {con.rhs:.17g}")
            for b, M in sorted(con.blocks.items()):
                _write_matrix(lines, f"A_block {b} re", np.real(M))
                if np.iscomplexobj(M):
                    _write_matrix(lines, f"A_block {b} im", np.imag(M))
            if con.scalars is not None:
                _write_matrix(lines, "a_scalars", np.asarray(con.scalars)[None, :])
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text
    else:
        raise TypeError(f"cannot dump {type(problem)!r}")
    _write_matrix(lines, "c", problem.c[None, :])
    if problem.A_ub is not None:
        _write_matrix(lines, "A_ub", problem.A_ub)
        _write_matrix(lines, "b_ub", problem.b_ub[None, :])
    if problem.A_eq is not None:
        _write_matrix(lines, "A_eq", problem.A_eq)
        _write_matrix(lines, "b_eq", problem.b_eq[None, :])
    _write_matrix(lines, "lb", problem.lb[None, :])
    _write_matrix(lines, "ub", problem.ub[None, :])
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
