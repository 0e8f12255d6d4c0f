"""Dense primal-dual interior-point kernel for LP / convex QP / SDP.

Standard form handled by the core loop:

    minimize   0.5 x'Qx + c'x
    subject to A x = b,    x in K = R^p_+ x PSD(d_1) x ... x PSD(d_B)

Mehrotra predictor-corrector with Nesterov-Todd scaling on every cone
component.  Each iteration eliminates (dx, dz) and solves a Schur system
of size m (the number of equality rows), which keeps desk-scale SDPs with
many small matrix blocks cheap.  Q may only act on the orthant part; the
public problem classes never need more.

Primal infeasibility is reported as a status, detected through a Farkas
certificate read off the diverging dual iterates: a y with -A'y in the
dual cone and b'y > 0 proves the constraint set empty.
"""

from __future__ import annotations

import numpy as np

from .cones import Cone, smat, svec
from .kkt import kkt_residuals
from .problems import ConicSolution, LpProblem, QpProblem, SdpProblem

__all__ = ["solve_lp", "solve_qp", "solve_sdp", "solve_canonical", "CanonicalProblem"]

_STEP_DAMP = 0.99


class CanonicalProblem:
    """Standard-form data plus the map back to caller coordinates."""

    def __init__(self, Q, c, A, b, cone: Cone, obj_const=0.0, recover=None):
        self.Q = Q
        self.c = np.asarray(c, dtype=float)
        self.A = np.asarray(A, dtype=float).reshape(-1, self.c.shape[0])
        self.b = np.asarray(b, dtype=float)
        self.cone = cone
        self.obj_const = float(obj_const)
        self.recover = recover if recover is not None else (lambda u: u)


class _Scaling:
    """Nesterov-Todd scaling state at the current iterate."""

    def __init__(self, cone: Cone, x, z):
        self.cone = cone
        nl = cone.n_lin
        xl = np.maximum(x[:nl], 1e-300)
        zl = np.maximum(z[:nl], 1e-300)
        self.w = np.sqrt(xl / zl)
        self.lam_lin = np.sqrt(xl * zl)
        self.T_half = []
        self.T_ihalf = []
        self.lam_eigs = []
        self.lam_vecs = []
        self.lam_mats = []
        for bidx, d in enumerate(cone.psd_dims):
            X = cone.block_mat(x, bidx)
            Z = cone.block_mat(z, bidx)
            wx, Ux = np.linalg.eigh(X)
            wx = np.maximum(wx, 1e-14 * max(1.0, wx.max()))
            Xh = (Ux * np.sqrt(wx)) @ Ux.T
            M = Xh @ Z @ Xh
            wm, Um = np.linalg.eigh(0.5 * (M + M.T))
            wm = np.maximum(wm, 1e-28)
            Mih = (Um / np.sqrt(np.sqrt(wm))) @ Um.T  # M^{-1/4}
            # T = X^{1/2} M^{-1/2} X^{1/2}; build via its square root pieces
            Mihalf = Mih @ Mih.T
            T = Xh @ Mihalf @ Xh
            T = 0.5 * (T + T.T)
            wt, Ut = np.linalg.eigh(T)
            wt = np.maximum(wt, 1e-300)
            Th = (Ut * np.sqrt(wt)) @ Ut.T
            Tih = (Ut / np.sqrt(wt)) @ Ut.T
            lam = Tih @ X @ Tih
            lam = 0.5 * (lam + lam.T)
            wl, Ul = np.linalg.eigh(lam)
            wl = np.maximum(wl, 1e-300)
            self.T_half.append(Th)
            self.T_ihalf.append(Tih)
            self.lam_mats.append(lam)
            self.lam_eigs.append(wl)
            self.lam_vecs.append(Ul)

    # -- operators on full-length vectors ------------------------------
    def scale_primal(self, v):
        """W^{-1} v (into scaled space)."""
        out = np.empty_like(v)
        c = self.cone
        out[: c.n_lin] = v[: c.n_lin] / self.w
        for b in range(len(c.psd_dims)):
            Tih = self.T_ihalf[b]
            c.set_block(out, b, Tih @ c.block_mat(v, b) @ Tih)
        return out

    def scale_dual(self, v):
        """W v (into scaled space)."""
        out = np.empty_like(v)
        c = self.cone
        out[: c.n_lin] = v[: c.n_lin] * self.w
        for b in range(len(c.psd_dims)):
            Th = self.T_half[b]
            c.set_block(out, b, Th @ c.block_mat(v, b) @ Th)
        return out

    def apply_theta(self, v):
        """(W'W)^{-1} v, the term added to Q in the reduced system."""
        out = np.empty_like(v)
        c = self.cone
        out[: c.n_lin] = v[: c.n_lin] / (self.w * self.w)
        for b in range(len(c.psd_dims)):
            Tih = self.T_ihalf[b]
            Tinv = Tih @ Tih
            c.set_block(out, b, Tinv @ c.block_mat(v, b) @ Tinv)
        return out

    def lam_jordan_square(self):
        """lambda o lambda as a full-length vector."""
        c = self.cone
        out = np.empty(c.dim)
        out[: c.n_lin] = self.lam_lin ** 2
        for b in range(len(c.psd_dims)):
            lam = self.lam_mats[b]
            c.set_block(out, b, lam @ lam)
        return out

    def jordan_prod(self, u, v):
        """u o v in scaled space (elementwise / symmetrized product)."""
        c = self.cone
        out = np.empty(c.dim)
        out[: c.n_lin] = u[: c.n_lin] * v[: c.n_lin]
        for b in range(len(c.psd_dims)):
            U = c.block_mat(u, b)
            V = c.block_mat(v, b)
            c.set_block(out, b, 0.5 * (U @ V + V @ U))
        return out

    def jordan_div_lam(self, r):
        """Solve lambda o d = r for d."""
        c = self.cone
        out = np.empty(c.dim)
        out[: c.n_lin] = r[: c.n_lin] / np.maximum(self.lam_lin, 1e-300)
        for b in range(len(c.psd_dims)):
            wl, Ul = self.lam_eigs[b], self.lam_vecs[b]
            R = c.block_mat(r, b)
            Rt = Ul.T @ R @ Ul
            denom = 0.5 * (wl[:, None] + wl[None, :])
            c.set_block(out, b, Ul @ (Rt / denom) @ Ul.T)
        return out


class _Factorization:
    """Per-iteration factorization of H = Q + Theta and the Schur system."""

    def __init__(self, Q, A, cone: Cone, scal: _Scaling, block_stacks):
        self.cone = cone
        self.scal = scal
        self.A = A
        self.Q = Q
        nl = cone.n_lin
        theta_lin = 1.0 / (scal.w * scal.w)
        if Q is None:
            self.h_diag = theta_lin
            self.h_chol = None
        else:
            Hl = Q[:nl, :nl] + np.diag(theta_lin)
            self.h_diag = None
            self.h_chol = np.linalg.cholesky(Hl)
        m = A.shape[0]
        S = np.zeros((m, m))
        if nl and m:
            Al = A[:, :nl]
            S += Al @ self._solve_lin(Al.T)
        for b in range(len(cone.psd_dims)):
            Mst = block_stacks[b]        # (m, d, d)
            if m == 0:
                continue
            T = scal.T_half[b] @ scal.T_half[b]
            TMT = np.matmul(np.matmul(T, Mst), T)
            S += np.einsum("iab,jab->ij", Mst, TMT)
        self.S = S
        self.s_chol = None
        if m:
            jitter = 0.0
            base = max(np.trace(S) / m, 1.0)
            for _ in range(4):
                try:
                    self.s_chol = np.linalg.cholesky(
                        S + jitter * np.eye(m) if jitter else S)
                    break
                except np.linalg.LinAlgError:
                    jitter = max(jitter * 100.0, 1e-14 * base)
            if self.s_chol is None:
                raise np.linalg.LinAlgError("Schur factorization failed")

    def _solve_lin(self, rhs):
        if self.h_diag is not None:
            return rhs / self.h_diag[:, None] if rhs.ndim == 2 else rhs / self.h_diag
        L = self.h_chol
        tmp = np.linalg.solve(L, rhs)
        return np.linalg.solve(L.T, tmp)

    def solve_h(self, v):
        """H^{-1} v for a full-length vector."""
        out = np.empty_like(v)
        c = self.cone
        nl = c.n_lin
        out[:nl] = self._solve_lin(v[:nl])
        for b in range(len(c.psd_dims)):
            T = self.scal.T_half[b] @ self.scal.T_half[b]
            c.set_block(out, b, T @ c.block_mat(v, b) @ T)
        return out

    def solve_schur(self, rhs):
        L = self.s_chol
        return np.linalg.solve(L.T, np.linalg.solve(L, rhs))

    def _apply_h(self, v):
        out = self.scal.apply_theta(v)
        if self.Q is not None:
            out = out + self.Q @ v
        return out

    def _solve_kkt(self, f, g):
        A = self.A
        hf = self.solve_h(f)
        if A.shape[0]:
            dy = self.solve_schur(g - A @ hf)
            dx = hf + self.solve_h(A.T @ dy)
        else:
            dy = np.zeros(0)
            dx = hf
        return dx, dy

    def directions(self, f, g, s_c, refine: int = 1):
        """Solve the reduced Newton system.

        (Q+Theta) dx - A' dy = f,  A dx = g.  One round of iterative
        refinement counters the ill-conditioning of Theta near the central
        path's end.  dz is then recovered from the dual Newton row
        dz = Q dx - A'dy + (s_c - f), which that row satisfies exactly;
        remaining solve error lands in the complementarity equation, which
        is relinearized at the next iterate anyway.
        """
        A = self.A
        dx, dy = self._solve_kkt(f, g)
        for _ in range(refine):
            r1 = f - self._apply_h(dx)
            if A.shape[0]:
                r1 = r1 + A.T @ dy
                r2 = g - A @ dx
            else:
                r2 = np.zeros(0)
            ddx, ddy = self._solve_kkt(r1, r2)
            dx = dx + ddx
            dy = dy + ddy
        dz = s_c - f
        if self.Q is not None:
            dz = dz + self.Q @ dx
        if A.shape[0]:
            dz = dz - A.T @ dy
        return dx, dy, dz


def _block_stacks(A, cone: Cone):
    """Constraint rows reshaped into per-block symmetric matrices."""
    stacks = []
    m = A.shape[0]
    for b, d in enumerate(cone.psd_dims):
        sl = slice(cone.offsets[b], cone.offsets[b + 1])
        stacks.append(np.stack([smat(A[i, sl], d) for i in range(m)])
                      if m else np.zeros((0, d, d)))
    return stacks


def _initial_point(Q, c, A, b, cone: Cone):
    """Least-squares start pushed into the cone interior."""
    n = c.shape[0]
    m = A.shape[0]
    e = cone.identity()
    if m:
        x_hat = np.linalg.lstsq(A, b, rcond=None)[0]
        y = np.linalg.lstsq(A.T, c, rcond=None)[0]
    else:
        x_hat = np.zeros(n)
        y = np.zeros(0)
    z_hat = c + (Q @ x_hat if Q is not None else 0.0) - (A.T @ y if m else 0.0)

    def push(v):
        me = cone.min_eig(v)
        delta = max(-1.5 * me, 0.0)
        return v + delta * e

    x1, z1 = push(x_hat), push(z_hat)
    gap = float(x1 @ z1)
    ez, ex = float(e @ z1), float(e @ x1)
    dx = max(0.5 * gap / ez if ez > 1e-12 else 0.0, 1e-2 * (1.0 + np.abs(x1).max()))
    dz = max(0.5 * gap / ex if ex > 1e-12 else 0.0, 1e-2 * (1.0 + np.abs(z1).max()))
    return x1 + dx * e, y, z1 + dz * e


def _certificate(A, b, y, z, anorm, res_tol, pos_tol):
    """Farkas test: normalized (y, z) with A'y + z ~ 0 and b'y > 0."""
    if y.shape[0] == 0:
        return False
    by = float(b @ y)
    if by <= pos_tol * max(1.0, np.abs(y).max()):
        return False
    res = np.abs(A.T @ (y / by) + z / by).max()
    return res <= res_tol * max(1.0, anorm)


def solve_canonical(prob: CanonicalProblem, tol: float = 1e-7,
                    max_iter: int = 200, verbose: bool = False) -> dict:
    """Run the predictor-corrector loop on standard-form data."""
    Q, c, b, cone = prob.Q, prob.c, prob.b, prob.cone
    # row equilibration: rescale each constraint row to unit max entry
    if prob.A.shape[0]:
        row_scale = np.maximum(np.abs(prob.A).max(axis=1), 1e-12)
        A = prob.A / row_scale[:, None]
        b = b / row_scale
    else:
        row_scale = np.ones(0)
        A = prob.A
    anorm = np.abs(A).max() if A.size else 1.0
    stacks = _block_stacks(A, cone)
    x, y, z = _initial_point(Q, c, A, b, cone)
    nu = max(cone.degree, 1)
    status, message = "max-iter", "iteration limit reached"
    best = None
    best_score = np.inf
    since_best = 0
    it = 0
    for it in range(1, max_iter + 1):
        qx = Q @ x if Q is not None else 0.0
        r_p = A @ x - b if A.shape[0] else np.zeros(0)
        r_d = qx + c - (A.T @ y if A.shape[0] else 0.0) - z
        gap = float(x @ z)
        pobj = float(0.5 * x @ qx + c @ x) if Q is not None else float(c @ x)
        dobj = float(b @ y - 0.5 * x @ qx) if Q is not None else float(b @ y)
        rel_p = np.abs(r_p).max() / (1.0 + np.abs(b).max()) if r_p.size else 0.0
        rel_d = np.abs(r_d).max() / (1.0 + np.abs(c).max())
        rel_g = gap / (1.0 + max(abs(pobj), abs(dobj)))
        score = max(rel_p, rel_d, rel_g)
        if verbose:
            print(f"it {it:3d} pobj {pobj: .6e} dobj {dobj: .6e} "
                  f"rp {rel_p:.2e} rd {rel_d:.2e} gap {rel_g:.2e} "
                  f"|y| {np.abs(y).max(initial=0):.2e}")
        if score < best_score:
            best_score, best, since_best = score, (x.copy(), y.copy(), z.copy()), 0
        else:
            since_best += 1
        if score <= tol:
            status, message = "optimal", ""
            break
        # residuals deteriorating well past the best point: numerical limit
        if score > 1e4 * best_score or since_best >= 12:
            status, message = "max-iter", "progress stalled"
            break
        # an approximate Farkas ray is convincing on its own when tight, or
        # earlier when the primal residual is clearly not shrinking
        loose = rel_p > max(1e-5, 100.0 * tol)
        if _certificate(A, b, y, z, anorm,
                        res_tol=1e-7 if loose else max(1e-9, 0.01 * tol),
                        pos_tol=1e-12):
            status, message = "infeasible", "Farkas certificate found"
            break
        if np.abs(x).max() > 1e13:
            status, message = "max-iter", "primal iterates diverged"
            break
        scal = _Scaling(cone, x, z)
        try:
            fac = _Factorization(Q, A, cone, scal, stacks)
        except np.linalg.LinAlgError:
            status, message = "max-iter", "factorization breakdown"
            break
        mu = gap / nu
        # predictor
        dx_a, dy_a, dz_a = fac.directions(-r_d - z, -r_p, -z)
        ap = min(1.0, cone.max_step(x, dx_a))
        ad = min(1.0, cone.max_step(z, dz_a))
        mu_aff = float((x + ap * dx_a) @ (z + ad * dz_a)) / nu
        sigma = min(max((mu_aff / mu) ** 3, 0.0), 1.0) if mu > 0 else 0.0
        # corrector
        corr = scal.jordan_prod(scal.scale_primal(dx_a), scal.scale_dual(dz_a))
        r_c = sigma * mu * cone.identity() - scal.lam_jordan_square() - corr
        s_c = scal.scale_primal(scal.jordan_div_lam(r_c))
        dx, dy, dz = fac.directions(-r_d + s_c, -r_p, s_c)
        ap = min(1.0, _STEP_DAMP * cone.max_step(x, dx))
        ad = min(1.0, _STEP_DAMP * cone.max_step(z, dz))
        if Q is not None:
            # a common step keeps the dual row's Q dx term consistent
            ap = ad = min(ap, ad)
        if ap < 1e-10 and ad < 1e-10:
            status, message = "max-iter", "step sizes collapsed"
            break
        x = x + ap * dx
        y = y + ad * dy
        z = z + ad * dz
    if status != "optimal" and best is not None:
        x, y, z = best
        if best_score <= tol:
            status, message = "optimal", ""
    if status == "max-iter" and _certificate(A, b, y, z, anorm,
                                             res_tol=1e-7, pos_tol=1e-9):
        status, message = "infeasible", "Farkas certificate found (post-scan)"
    return {
        "x": x,
        "y": y / row_scale if y.shape[0] else y,
        "z": z,
        "status": status,
        "iterations": it,
        "message": message,
    }


def _finalize(prob: CanonicalProblem, raw: dict, tol: float) -> ConicSolution:
    x, y, z = raw["x"], raw["y"], raw["z"]
    qxx = float(x @ prob.Q @ x) if prob.Q is not None else 0.0
    pobj = 0.5 * qxx + float(prob.c @ x) + prob.obj_const
    dobj = float(prob.b @ y) - 0.5 * qxx + prob.obj_const
    res = kkt_residuals(prob.Q, prob.c, prob.A, prob.b, prob.cone, x, y, z)
    status = raw["status"]
    if status == "optimal" and res.max() > 10.0 * tol:
        status = "max-iter"
    return ConicSolution(
        status=status,
        x=prob.recover(x),
        objective=pobj,
        dual_objective=dobj,
        kkt_residuals=res,
        y=y,
        z=z,
        iterations=raw["iterations"],
        message=raw["message"],
    )


# ------------------------------------------------------------------
# canonicalization
# ------------------------------------------------------------------

def _canon_lp_qp(p: LpProblem) -> CanonicalProblem:
    n = p.n
    cols = []          # (orig index, sign) per orthant variable
    shift = np.zeros(n)
    box_rows = []      # (var column, width)
    for i in range(n):
        lo, hi = p.lb[i], p.ub[i]
        if np.isfinite(lo):
            shift[i] = lo
            cols.append((i, 1.0))
            if np.isfinite(hi):
                box_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[i] = hi
            cols.append((i, -1.0))
        else:
            cols.append((i, 1.0))
            cols.append((i, -1.0))
    n_u = len(cols)
    S = np.zeros((n, n_u))
    for j, (i, sgn) in enumerate(cols):
        S[i, j] = sgn

    m_ub = 0 if p.A_ub is None else p.A_ub.shape[0]
    m_eq = 0 if p.A_eq is None else p.A_eq.shape[0]
    n_box = len(box_rows)
    n_std = n_u + m_ub + n_box
    m_std = m_eq + m_ub + n_box
    A = np.zeros((m_std, n_std))
    b = np.zeros(m_std)
    r = 0
    if m_eq:
        A[:m_eq, :n_u] = p.A_eq @ S
        b[:m_eq] = p.b_eq - p.A_eq @ shift
        r = m_eq
    if m_ub:
        A[r:r + m_ub, :n_u] = p.A_ub @ S
        A[r:r + m_ub, n_u:n_u + m_ub] = np.eye(m_ub)
        b[r:r + m_ub] = p.b_ub - p.A_ub @ shift
        r += m_ub
    for k, (j, width) in enumerate(box_rows):
        A[r + k, j] = 1.0
        A[r + k, n_u + m_ub + k] = 1.0
        b[r + k] = width

    Q = getattr(p, "Q", None)
    c_std = np.zeros(n_std)
    const = float(p.c @ shift)
    if Q is not None:
        c_std[:n_u] = S.T @ (p.c + Q @ shift)
        const += float(0.5 * shift @ Q @ shift)
        Q_std = np.zeros((n_std, n_std))
        Q_std[:n_u, :n_u] = S.T @ Q @ S
    else:
        c_std[:n_u] = S.T @ p.c
        Q_std = None

    def recover(u):
        return S @ u[:n_u] + shift

    return CanonicalProblem(Q_std, c_std, A, b, Cone(n_std), const, recover)


def _embed_herm(M: np.ndarray) -> np.ndarray:
    """Coefficient embedding with Re<M, X> = <embed(M), embed_var(X)>."""
    R, I = np.real(M), np.imag(M)
    return 0.5 * np.block([[R, -I], [I, R]])


def _canon_sdp(p: SdpProblem) -> CanonicalProblem:
    kinds = [k for k, _ in p.block_specs]
    dims = [2 * d if k == "herm" else d for k, d in p.block_specs]
    svec_lens = [d * (d + 1) // 2 for d in dims]
    m = len(p.constraints)
    slack_senses = [con.sense for con in p.constraints if con.sense != "="]
    n_slack = len(slack_senses)
    n_lin = p.n_scalars + n_slack
    cone = Cone(n_lin, dims)
    n = cone.dim

    def block_coeff(kind, M):
        M = np.asarray(M)
        if kind == "herm":
            return svec(_embed_herm(M))
        return svec(np.asarray(M, dtype=float))

    c = np.zeros(n)
    if p.obj_scalars is not None:
        c[: p.n_scalars] = p.obj_scalars
    for bidx, M in p.obj_blocks.items():
        sl = slice(cone.offsets[bidx], cone.offsets[bidx + 1])
        c[sl] = block_coeff(kinds[bidx], M)

    A = np.zeros((m, n))
    b = np.zeros(m)
    slack_j = 0
    for i, con in enumerate(p.constraints):
        if con.scalars is not None:
            A[i, : p.n_scalars] = np.asarray(con.scalars, dtype=float)
        for bidx, M in con.blocks.items():
            sl = slice(cone.offsets[bidx], cone.offsets[bidx + 1])
            A[i, sl] = block_coeff(kinds[bidx], M)
        b[i] = con.rhs
        if con.sense != "=":
            A[i, p.n_scalars + slack_j] = 1.0 if con.sense == "<=" else -1.0
            slack_j += 1

    specs = list(p.block_specs)

    def recover(u):
        mats = []
        for bidx, (kind, d) in enumerate(specs):
            Y = cone.block_mat(u, bidx)
            if kind == "herm":
                P = 0.5 * (Y[:d, :d] + Y[d:, d:])
                Qi = 0.5 * (Y[d:, :d] - Y[:d, d:])
                X = P + 1j * Qi
                mats.append(0.5 * (X + X.conj().T))
            else:
                mats.append(Y)
        return mats, u[: p.n_scalars].copy()

    return CanonicalProblem(None, c, A, b, cone, 0.0, recover)


# ------------------------------------------------------------------
# public entry points
# ------------------------------------------------------------------

def solve_lp(p: LpProblem, tol: float = 1e-7, max_iter: int = 200) -> ConicSolution:
    """Minimize c'x over the polyhedron described by ``p``."""
    prob = _canon_lp_qp(p)
    return _finalize(prob, solve_canonical(prob, tol, max_iter), tol)


def solve_qp(p: QpProblem, tol: float = 1e-7, max_iter: int = 200) -> ConicSolution:
    """Minimize 0.5 x'Qx + c'x over the polyhedron described by ``p``."""
    prob = _canon_lp_qp(p)
    return _finalize(prob, solve_canonical(prob, tol, max_iter), tol)


def solve_sdp(p: SdpProblem, tol: float = 1e-7, max_iter: int = 200) -> ConicSolution:
    """Minimize the linear objective over PSD blocks and nonneg scalars."""
    prob = _canon_sdp(p)
    return _finalize(prob, solve_canonical(prob, tol, max_iter), tol)
