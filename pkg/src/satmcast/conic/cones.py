"""Cone bookkeeping for the interior-point kernel.

Variables live in K = R^p_+ x PSD(d_1) x ... x PSD(d_B).  PSD blocks use
the scaled vectorization svec (off-diagonal entries multiplied by sqrt(2))
so Euclidean dot products of svec'd blocks equal Frobenius inner products.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Cone", "svec", "smat"]

_SQRT2 = math.sqrt(2.0)


def svec_indices(d: int):
    return np.triu_indices(d)


def svec(M: np.ndarray) -> np.ndarray:
    d = M.shape[0]
    iu, ju = np.triu_indices(d)
    v = M[iu, ju].astype(float).copy()
    v[iu != ju] *= _SQRT2
    return v


def smat(v: np.ndarray, d: int) -> np.ndarray:
    iu, ju = np.triu_indices(d)
    w = np.asarray(v, dtype=float).copy()
    w[iu != ju] /= _SQRT2
    M = np.zeros((d, d))
    M[iu, ju] = w
    M[ju, iu] = w
    return M


class Cone:
    """Layout of one orthant chunk followed by PSD blocks."""

    def __init__(self, n_lin: int, psd_dims=()):
        self.n_lin = int(n_lin)
        self.psd_dims = tuple(int(d) for d in psd_dims)
        self.block_sizes = [d * (d + 1) // 2 for d in self.psd_dims]
        offs = [self.n_lin]
        for s in self.block_sizes:
            offs.append(offs[-1] + s)
        self.offsets = offs
        self.dim = offs[-1]
        # barrier degree: orthant count plus sum of block orders
        self.degree = self.n_lin + sum(self.psd_dims)

    def lin(self, v: np.ndarray) -> np.ndarray:
        return v[: self.n_lin]

    def block(self, v: np.ndarray, b: int) -> np.ndarray:
        return v[self.offsets[b]: self.offsets[b + 1]]

    def block_mat(self, v: np.ndarray, b: int) -> np.ndarray:
        return smat(self.block(v, b), self.psd_dims[b])

    def identity(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[: self.n_lin] = 1.0
        for b, d in enumerate(self.psd_dims):
            self.set_block(e, b, np.eye(d))
        return e

    def set_block(self, v: np.ndarray, b: int, M: np.ndarray) -> None:
        v[self.offsets[b]: self.offsets[b + 1]] = svec(M)

    def min_eig(self, v: np.ndarray) -> float:
        """Smallest orthant entry / block eigenvalue (cone-interior measure)."""
        vals = []
        if self.n_lin:
            vals.append(float(self.lin(v).min()))
        for b in range(len(self.psd_dims)):
            vals.append(float(np.linalg.eigvalsh(self.block_mat(v, b)).min()))
        return min(vals) if vals else np.inf

    def max_step(self, v: np.ndarray, dv: np.ndarray) -> float:
        """Largest alpha with v + alpha*dv remaining in the (closed) cone."""
        alpha = np.inf
        if self.n_lin:
            vl, dl = self.lin(v), self.lin(dv)
            neg = dl < 0
            if np.any(neg):
                alpha = min(alpha, float((-vl[neg] / dl[neg]).min()))
        for b, d in enumerate(self.psd_dims):
            V = self.block_mat(v, b)
            D = self.block_mat(dv, b)
            # generalized min eigenvalue of (D, V): step limited by most
            # negative eigenvalue of V^-1/2 D V^-1/2
            w, U = np.linalg.eigh(V)
            w = np.maximum(w, 1e-14 * max(1.0, w.max()))
            Vih = U @ np.diag(1.0 / np.sqrt(w)) @ U.T
            m = float(np.linalg.eigvalsh(Vih @ D @ Vih).min())
            if m < 0:
                alpha = min(alpha, -1.0 / m)
        return alpha
