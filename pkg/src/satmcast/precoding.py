"""Multigroup multicast precoder synthesis under per-antenna power limits.

One precoding vector w_k serves every user of group k with the same
symbol stream, so each group's rate is set by its worst user's SINR:

    SINR_i = |w_k' h_i|^2 / (sum_{l!=k} |w_l' h_i|^2 + sigma_i^2),  i in G_k.

Three designs are provided on top of a QoS power-ratio kernel:

* ``max_sum_rate`` - iterative two-step heuristic: re-target the QoS
  problem at the current per-group minima, then reallocate group powers by
  a projected subgradient ascent on sum_k log2(1 + min-SINR_k) inside the
  per-antenna feasibility polytope.
* ``max_sum_rate_available`` - the same loop with the power projection
  constrained to keep every user's SINR at or above a floor, trading sum
  rate for guaranteed availability.
* ``max_throughput_modcod`` - discretized throughput maximization: group
  targets snap to the spectral-efficiency table's thresholds and are
  greedily raised one tier at a time while the per-antenna budget allows.

The QoS kernel (``solve_qos``) minimizes the worst per-antenna power
ratio subject to per-user SINR targets via semidefinite relaxation of the
rank-one precoder outer products followed by Gaussian randomization with
an LP power rescaling per candidate.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .conic import LpProblem, QpProblem, SdpProblem, solve_lp, solve_qp, solve_sdp
from .modcod import ModcodTable, ceil_to_threshold, floor_to_threshold

__all__ = [
    "GroupPartition",
    "PrecodingMatrix",
    "SolverConfig",
    "QosResult",
    "SumRateResult",
    "sinr",
    "per_antenna_power",
    "solve_qos",
    "project_pac",
    "project_pac_availability",
    "subgradient_step",
    "max_sum_rate",
    "max_sum_rate_available",
    "max_throughput_modcod",
]

LN2 = math.log(2.0)

# relative margin added to SINR constraints so solver-tolerance wiggle can
# never push a returned precoder below its nominal targets
SINR_GUARD = 1e-7

_POWER_FLOOR = 1e-30


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint user-index groups, one multicast group per transmit antenna."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        seen = set()
        for g in groups:
            if not g:
                raise ValueError("empty group")
            for i in g:
                if i in seen:
                    raise ValueError(f"user {i} appears in more than one group")
                seen.add(i)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_users(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def users_per_group(self) -> float:
        return self.n_users / self.n_groups

    def group_of(self) -> dict:
        return {i: k for k, g in enumerate(self.groups) for i in g}


@dataclass(frozen=True)
class PrecodingMatrix:
    """Square precoder, column w_k beamforming toward group k."""

    W: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=complex)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("W must be square (one column per antenna/group)")
        object.__setattr__(self, "W", W)

    @property
    def powers(self) -> np.ndarray:
        """p_k = ||w_k||^2."""
        return np.sum(np.abs(self.W) ** 2, axis=0)

    @property
    def directions(self) -> np.ndarray:
        """Unit-norm columns v_k (zero-power columns fall back to e_k)."""
        p = self.powers
        V = np.array(self.W, dtype=complex)
        for k in range(V.shape[1]):
            if p[k] > _POWER_FLOOR:
                V[:, k] /= math.sqrt(p[k])
            else:
                V[:, k] = 0.0
                V[k % V.shape[0], k] = 1.0
        return V

    @property
    def log_powers(self) -> np.ndarray:
        return np.log(np.maximum(self.powers, _POWER_FLOOR))


@dataclass
class SolverConfig:
    """Tunables of the iterative designs (defaults follow the desk setup)."""

    t_max: int = 1                  # subgradient steps per outer iteration
    delta0: float = 0.4             # initial subgradient step, then halved
    n_rand: int = 100               # Gaussian randomizations per QoS solve
    outer_tol: float = 1e-3         # relative sum-rate improvement cutoff
    outer_max_iters: int = 20
    rng_seed: int = 0
    sdp_tol: float = 1e-8
    lp_tol: float = 1e-9
    qp_tol: float = 1e-9

    def __post_init__(self):
        if self.t_max < 1 or self.n_rand < 1 or self.delta0 <= 0:
            raise ValueError("t_max, n_rand must be >= 1 and delta0 > 0")

    def rng(self, *salt) -> np.random.Generator:
        words = [int(self.rng_seed) & 0x7FFFFFFF]
        for s in salt:
            words.append(zlib.crc32(str(s).encode()) if isinstance(s, str)
                         else int(s) & 0xFFFFFFFF)
        return np.random.default_rng(np.random.SeedSequence(words))


@dataclass
class QosResult:
    """Outcome of the QoS power-ratio minimization."""

    status: str                     # optimal | infeasible | randomization-failure | sdr-failure
    r_star: float | None
    W: np.ndarray | None
    sdr_lower_bound: float | None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass
class SumRateResult:
    status: str                     # optimal | infeasible
    precoder: PrecodingMatrix | None
    sum_rate: float
    iterations: int = 0
    trace: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# ------------------------------------------------------------------
# elementary quantities
# ------------------------------------------------------------------

def sinr(W: np.ndarray, H: np.ndarray, partition: GroupPartition,
         noise_var=1.0) -> np.ndarray:
    """Per-user SINR (linear).  Row i of H is the conjugated channel h_i'."""
    W = np.asarray(W, dtype=complex)
    H = np.asarray(H, dtype=complex)
    gains = np.abs(H @ W) ** 2          # gains[i, l] = |w_l' h_i|^2
    noise = np.broadcast_to(np.asarray(noise_var, dtype=float), (H.shape[0],))
    out = np.zeros(H.shape[0])
    for k, grp in enumerate(partition.groups):
        idx = list(grp)
        sig = gains[idx, k]
        interf = gains[idx, :].sum(axis=1) - sig
        out[idx] = sig / (interf + noise[idx])
    return out


def per_antenna_power(W: np.ndarray) -> np.ndarray:
    """P_n = [W W']_nn, the power radiated by antenna n."""
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("W must be square")
    return np.sum(np.abs(W) ** 2, axis=1)


def group_min_sinrs(W, H, partition, noise_var=1.0) -> np.ndarray:
    s = sinr(W, H, partition, noise_var)
    return np.array([min(s[i] for i in g) for g in partition.groups])


def sum_rate(W, H, partition, noise_var=1.0) -> float:
    mins = group_min_sinrs(W, H, partition, noise_var)
    return float(np.log2(1.0 + mins).sum())


# ------------------------------------------------------------------
# QoS power-ratio minimization (SDR + Gaussian randomization)
# ------------------------------------------------------------------

def _sqrt_psd(X: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(0.5 * (X + X.conj().T))
    w = np.maximum(w, 0.0)
    return (U * np.sqrt(w)) @ U.conj().T


def _rescale_lp(a, vn2, targets, noise, p_ant, groups, lp_tol):
    """Min-max antenna power ratio over group powers for fixed directions.

    a[i, l] = |v_l' h_i|^2, vn2[n, k] = |v_k[n]|^2.  Variables are the K
    group powers and the ratio t; SINR constraints are linear in the
    powers.  Returns (powers, ratio) or None when infeasible.
    """
    K = len(groups)
    rows = []
    rhs = []
    for k, grp in enumerate(groups):
        for i in grp:
            row = np.zeros(K + 1)
            row[:K] = targets[i] * a[i, :]
            row[k] = -a[i, k]
            rows.append(row)
            rhs.append(-targets[i] * noise[i] * (1.0 + SINR_GUARD))
    for n in range(vn2.shape[0]):
        row = np.zeros(K + 1)
        row[:K] = vn2[n]
        row[K] = -p_ant[n]
        rows.append(row)
        rhs.append(0.0)
    c = np.zeros(K + 1)
    c[K] = 1.0
    sol = solve_lp(LpProblem(c=c, A_ub=np.array(rows), b_ub=np.array(rhs)),
                   tol=lp_tol)
    if not sol.optimal:
        return None
    return np.maximum(sol.x[:K], 0.0), float(sol.x[K])


def solve_qos(H: np.ndarray, partition: GroupPartition, targets: np.ndarray,
              p_ant: np.ndarray, cfg: SolverConfig,
              rng: np.random.Generator | None = None) -> QosResult:
    """Minimize the worst per-antenna power ratio under per-user SINR targets.

    Relaxes w_k w_k' to PSD matrix variables (SINR constraints become
    linear), records the relaxation optimum as a lower bound, then draws
    ``cfg.n_rand`` candidate direction sets from the relaxed covariances
    and rescales group powers by LP, keeping the best feasible candidate.

    The returned precoder meets every target (or better) and radiates at
    most r_star * P_n per antenna, with r_star recomputed from the actual
    precoder.
    """
    H = np.asarray(H, dtype=complex)
    targets = np.asarray(targets, dtype=float)
    p_ant = np.asarray(p_ant, dtype=float)
    if np.any(targets <= 0) or not np.all(np.isfinite(targets)):
        raise ValueError("SINR targets must be positive and finite")
    if np.any(p_ant <= 0):
        raise ValueError("per-antenna limits must be positive")
    n_t = H.shape[1]
    groups = partition.groups
    K = len(groups)
    noise = np.ones(H.shape[0])
    rng = cfg.rng("qos") if rng is None else rng

    sdp = SdpProblem(block_specs=[("herm", n_t)] * K, n_scalars=1,
                     obj_scalars=np.array([1.0]))
    outer = {}
    for k, grp in enumerate(groups):
        for i in grp:
            outer[i] = np.outer(H[i], H[i].conj())
    for k, grp in enumerate(groups):
        for i in grp:
            blocks = {l: (-targets[i]) * outer[i] for l in range(K) if l != k}
            blocks[k] = outer[i]
            sdp.add_constraint(blocks, np.array([0.0]), ">=",
                               targets[i] * noise[i])
    for n in range(n_t):
        E = np.zeros((n_t, n_t))
        E[n, n] = 1.0
        sdp.add_constraint({k: E for k in range(K)},
                           np.array([-p_ant[n]]), "<=", 0.0)

    rel = solve_sdp(sdp, tol=cfg.sdp_tol)
    if rel.status == "infeasible":
        return QosResult("infeasible", None, None, None)
    if not rel.optimal:
        return QosResult("sdr-failure", None, None, None)
    X_blocks, scalars = rel.x
    sdr_bound = float(scalars[0])

    roots = [_sqrt_psd(X) for X in X_blocks]
    best_W = None
    best_r = np.inf
    for _ in range(cfg.n_rand):
        V = np.empty((n_t, K), dtype=complex)
        for k in range(K):
            g = (rng.standard_normal(n_t) + 1j * rng.standard_normal(n_t)) \
                / math.sqrt(2.0)
            u = roots[k] @ g
            nrm = np.linalg.norm(u)
            if nrm < 1e-12:
                u = np.zeros(n_t, dtype=complex)
                u[k % n_t] = 1.0
                nrm = 1.0
            V[:, k] = u / nrm
        a = np.abs(H @ V) ** 2
        vn2 = np.abs(V) ** 2
        res = _rescale_lp(a, vn2, targets, noise, p_ant, groups, cfg.lp_tol)
        if res is None:
            continue
        powers, _ = res
        W = V * np.sqrt(powers)
        r = float(np.max(per_antenna_power(W) / p_ant))
        if r < best_r:
            best_r, best_W = r, W
    if best_W is None:
        return QosResult("randomization-failure", None, None, sdr_bound)
    return QosResult("optimal", best_r, best_W, sdr_bound)


# ------------------------------------------------------------------
# power projections
# ------------------------------------------------------------------

def project_pac(x: np.ndarray, V: np.ndarray, p_ant: np.ndarray,
                qp_tol: float = 1e-9) -> np.ndarray:
    """Euclidean projection of a group-power vector onto the feasible set
    {p >= 0 : [sum_k p_k v_k v_k']_nn <= P_n}.

    Never infeasible (p = 0 always qualifies).
    """
    x = np.asarray(x, dtype=float)
    M = np.abs(np.asarray(V)) ** 2       # M[n, k] = |v_k[n]|^2
    K = x.shape[0]
    sol = solve_qp(QpProblem(c=-2.0 * x, Q=2.0 * np.eye(K),
                             A_ub=M, b_ub=np.asarray(p_ant, dtype=float)),
                   tol=qp_tol)
    if not sol.optimal:
        raise RuntimeError(f"power projection failed: {sol.status} {sol.message}")
    return np.maximum(sol.x, 0.0)


def project_pac_availability(x, V, H, partition: GroupPartition, gamma_min,
                             noise_var, p_ant,
                             qp_tol: float = 1e-9) -> np.ndarray | None:
    """Projection of ``project_pac`` restricted by per-user minimum SINRs.

    Adds the rows p_k a_ik - gamma_min * sum_{l!=k} p_l a_il >=
    gamma_min * sigma_i^2 (linear in p for fixed directions).  Returns
    None when the floor is unsupportable with these directions, signalling
    the caller that gamma_min cannot be met.
    """
    x = np.asarray(x, dtype=float)
    V = np.asarray(V, dtype=complex)
    H = np.asarray(H, dtype=complex)
    gamma_min = float(gamma_min)
    K = x.shape[0]
    M = np.abs(V) ** 2
    noise = np.broadcast_to(np.asarray(noise_var, dtype=float), (H.shape[0],))
    rows = [M]
    rhs = [np.asarray(p_ant, dtype=float)]
    if gamma_min > 0.0:
        g_eff = gamma_min * (1.0 + SINR_GUARD)
        a = np.abs(H @ V) ** 2
        for k, grp in enumerate(partition.groups):
            for i in grp:
                row = g_eff * a[i, :]
                row[k] = -a[i, k]
                rows.append(row[None, :])
                rhs.append(np.array([-g_eff * noise[i]]))
    A_ub = np.vstack(rows)
    b_ub = np.concatenate(rhs)
    sol = solve_qp(QpProblem(c=-2.0 * x, Q=2.0 * np.eye(K),
                             A_ub=A_ub, b_ub=b_ub), tol=qp_tol)
    if sol.status == "infeasible":
        return None
    if not sol.optimal:
        raise RuntimeError(f"availability projection failed: {sol.status}")
    return np.maximum(sol.x, 0.0)


# ------------------------------------------------------------------
# subgradient power reallocation
# ------------------------------------------------------------------

def subgradient_step(s: np.ndarray, V: np.ndarray, H: np.ndarray,
                     partition: GroupPartition, noise_var=1.0) -> np.ndarray:
    """Search direction r at log-powers s for the update s - delta * r.

    r is the negative (super)gradient of U(s) = sum_k log2(1 + min-SINR_k)
    with p = exp(s), differentiating through the worst user of each group:

        dU/ds_j = sum_k w_k * (1{j=k} - 1{j!=k} * p_j a_{m_k,j} / D_{m_k}),
        w_k = SINR_{m_k} / ((1 + SINR_{m_k}) * ln 2),

    where m_k is group k's worst user and D its interference-plus-noise.
    """
    s = np.asarray(s, dtype=float)
    V = np.asarray(V, dtype=complex)
    H = np.asarray(H, dtype=complex)
    p = np.exp(s)
    K = s.shape[0]
    a = np.abs(H @ V) ** 2
    noise = np.broadcast_to(np.asarray(noise_var, dtype=float), (H.shape[0],))
    grad = np.zeros(K)
    for k, grp in enumerate(partition.groups):
        idx = list(grp)
        tot = a[idx, :] @ p
        denom = tot - p[k] * a[idx, k] + noise[idx]
        ratios = p[k] * a[idx, k] / denom
        j_min = int(np.argmin(ratios))
        m = idx[j_min]
        sinr_m = ratios[j_min]
        d_m = denom[j_min]
        w_k = sinr_m / ((1.0 + sinr_m) * LN2)
        coupling = -p * a[m, :] / d_m
        coupling[k] = 1.0
        grad += w_k * coupling
    return -grad


# ------------------------------------------------------------------
# sum-rate loops
# ------------------------------------------------------------------

def _active_groups(H, partition: GroupPartition):
    """Groups where every member has a nonzero channel row."""
    norms = np.linalg.norm(H, axis=1)
    return [k for k, g in enumerate(partition.groups)
            if all(norms[i] > 0.0 for i in g)]


def _restrict(H, partition: GroupPartition, active):
    """Channel rows and re-indexed partition for the active groups."""
    users = [i for k in active for i in partition.groups[k]]
    remap = {u: j for j, u in enumerate(users)}
    sub_groups = tuple(tuple(remap[i] for i in partition.groups[k])
                       for k in active)
    return H[users], GroupPartition(sub_groups), users


def _expand_precoder(W_sub, active, n_t):
    W = np.zeros((n_t, n_t), dtype=complex)
    for j, k in enumerate(active):
        W[:, k] = W_sub[:, j]
    return W


def _pac_rescale(W, p_ant):
    """Scale down (never up) so per-antenna powers respect the limits."""
    ratio = float(np.max(per_antenna_power(W) / p_ant))
    if ratio > 1.0:
        return W / math.sqrt(ratio)
    return W


def _sum_rate_loop(H, partition, p_ant, gamma_min, cfg, trace):
    """Shared driver: QoS re-targeting plus projected subgradient ascent.

    gamma_min <= 0 runs the unconstrained variant; positive values keep
    every iterate's minimum SINR at or above the floor.
    """
    H = np.asarray(H, dtype=complex)
    p_ant = np.asarray(p_ant, dtype=float)
    n_t = H.shape[1]
    active = _active_groups(H, partition)
    if not active:
        return SumRateResult("optimal", PrecodingMatrix(np.zeros((n_t, n_t))),
                             0.0, 0, trace if trace is not None else [])
    Hs, part_s, _ = _restrict(H, partition, active)
    noise = np.ones(Hs.shape[0])
    rng = cfg.rng("sumrate")
    trace = trace if trace is not None else []

    p_tot = float(p_ant.sum())
    W = np.full((n_t, len(active)), math.sqrt(p_tot) / n_t, dtype=complex)
    W = _pac_rescale(_expand_precoder(W, active, n_t), p_ant)

    best_sr = -np.inf
    best_W = None
    delta = cfg.delta0

    def consider(Wc):
        nonlocal best_sr, best_W
        sr = sum_rate(Wc, H, partition)
        if sr > best_sr:
            best_sr, best_W = sr, Wc
        return sr

    if gamma_min <= 0.0:
        consider(W)

    prev_best = -np.inf
    it = 0
    for it in range(1, cfg.outer_max_iters + 1):
        if it == 1 and gamma_min > 0.0:
            # availability support check doubles as the first re-targeting
            g_users = np.full(Hs.shape[0], gamma_min)
        else:
            mins = group_min_sinrs(W[:, :], H, partition)[active]
            g_groups = np.maximum(mins, 1e-9)
            if gamma_min > 0.0:
                g_groups = np.maximum(g_groups, gamma_min)
            g_users = np.empty(Hs.shape[0])
            for j, grp in enumerate(part_s.groups):
                for i in grp:
                    g_users[i] = g_groups[j]
        qr = solve_qos(Hs, part_s, g_users, p_ant, cfg, rng)
        if not qr.optimal:
            if it == 1:
                return SumRateResult("infeasible", None, 0.0, it, trace)
            break                      # revert to incumbent
        if qr.r_star > 1.0 + 1e-6:
            # candidate would overdrive an antenna: unusable
            if it == 1 and gamma_min > 0.0:
                return SumRateResult("infeasible", None, 0.0, it, trace)
            break
        W_q = _pac_rescale(_expand_precoder(qr.W, active, n_t), p_ant)
        consider(W_q)

        pm = PrecodingMatrix(qr.W)
        V = pm.directions
        s = np.log(np.maximum(pm.powers, _POWER_FLOOR))
        for _ in range(cfg.t_max):
            r_dir = subgradient_step(s, V, Hs, part_s, noise)
            x_pt = np.exp(s - delta * r_dir)
            delta *= 0.5
            if gamma_min > 0.0:
                p_new = project_pac_availability(x_pt, V, Hs, part_s,
                                                 gamma_min, noise, p_ant,
                                                 cfg.qp_tol)
                if p_new is None:
                    p_new = np.exp(s)   # keep the last availability-safe point
            else:
                p_new = project_pac(x_pt, V, p_ant, cfg.qp_tol)
            s = np.log(np.maximum(p_new, _POWER_FLOOR))
        W_new = _pac_rescale(
            _expand_precoder(V * np.sqrt(np.exp(s)), active, n_t), p_ant)
        if gamma_min > 0.0:
            ok = group_min_sinrs(W_new, H, partition)[active].min() \
                >= gamma_min * (1.0 - 1e-9)
            if ok:
                consider(W_new)
        else:
            consider(W_new)
        W = W_new                      # loop state for the next re-targeting
        if trace is not None:
            trace.append({"iteration": it, "objective": best_sr,
                          "r_star": qr.r_star, "accepted": best_sr > prev_best})
        if best_sr - prev_best <= cfg.outer_tol * max(1.0, abs(prev_best)) \
                and it > 1:
            prev_best = best_sr
            break
        prev_best = best_sr
    return SumRateResult("optimal", PrecodingMatrix(best_W), best_sr, it, trace)


def max_sum_rate(H, partition: GroupPartition, p_ant, cfg: SolverConfig,
                 trace: list | None = None) -> SumRateResult:
    """Per-antenna power constrained sum-rate maximization."""
    return _sum_rate_loop(H, partition, p_ant, 0.0, cfg, trace)


def max_sum_rate_available(H, partition: GroupPartition, p_ant, gamma_min,
                           cfg: SolverConfig,
                           trace: list | None = None) -> SumRateResult:
    """Sum-rate maximization with every user's SINR kept >= gamma_min.

    gamma_min is linear; gamma_min <= 0 reduces to ``max_sum_rate``.
    Returns infeasible status when the floor is unsupportable.
    """
    return _sum_rate_loop(H, partition, p_ant, float(gamma_min), cfg, trace)


# ------------------------------------------------------------------
# discretized (MODCOD-aware) throughput maximization
# ------------------------------------------------------------------

def _floor_target(sinr_lin: float, table: ModcodTable, gamma_min: float) -> float:
    tier, _ = floor_to_threshold(10.0 * math.log10(max(sinr_lin, 1e-30)), table)
    if tier < 0:
        return gamma_min
    return max(10.0 ** (table.thresholds_db[tier] / 10.0), gamma_min)


def max_throughput_modcod(H, partition: GroupPartition, p_ant,
                          table: ModcodTable, gamma_min, cfg: SolverConfig,
                          trace: list | None = None) -> SumRateResult:
    """Greedy tier-raising throughput maximization over the MODCOD table.

    Seeds with the availability-constrained design, snaps group targets to
    table thresholds, orders groups by the power ratio a one-tier raise
    would need, then sweeps in that order raising one tier per visit and
    keeping a raise only when the QoS solve stays within the per-antenna
    budget; a sweep with no accepted raise terminates.
    """
    H = np.asarray(H, dtype=complex)
    p_ant = np.asarray(p_ant, dtype=float)
    gamma_min = float(gamma_min)
    t1 = 10.0 ** (table.thresholds_db[0] / 10.0)
    if gamma_min < t1 * (1.0 - 1e-12):
        raise ValueError("gamma_min must be at or above the lowest threshold")
    trace = trace if trace is not None else []
    seed = max_sum_rate_available(H, partition, p_ant, gamma_min, cfg, None)
    if not seed.optimal:
        return SumRateResult("infeasible", None, 0.0, 0, trace)

    n_t = H.shape[1]
    active = _active_groups(H, partition)
    Hs, part_s, _ = _restrict(H, partition, active)
    rng = cfg.rng("modcod")
    K = len(active)
    W = seed.precoder.W

    def user_targets(group_targets):
        g = np.empty(Hs.shape[0])
        for j, grp in enumerate(part_s.groups):
            for i in grp:
                g[i] = group_targets[j]
        return g

    def discrete_objective(group_targets):
        total = 0.0
        for t in group_targets:
            _, eff = floor_to_threshold(10.0 * math.log10(t), table)
            total += eff
        return total

    mins = group_min_sinrs(W, H, partition)[active]
    targets = np.array([_floor_target(m, table, gamma_min) for m in mins])
    qr = solve_qos(Hs, part_s, user_targets(targets), p_ant, cfg, rng)
    if qr.optimal and qr.r_star <= 1.0 + 1e-9:
        W = _pac_rescale(_expand_precoder(qr.W, active, n_t), p_ant)
    obj = discrete_objective(targets)
    trace.append({"iteration": 0, "objective": obj, "r_star": qr.r_star,
                  "accepted": True})

    def raised(tgt_lin):
        nxt = ceil_to_threshold(10.0 * math.log10(tgt_lin) - 1e-9, table)
        if nxt is None:
            return None
        return 10.0 ** (nxt[1] / 10.0)

    # ordering pass: cost of raising each group one tier, others fixed
    costs = np.full(K, np.inf)
    for j in range(K):
        up = raised(targets[j])
        if up is None:
            continue
        probe = targets.copy()
        probe[j] = up
        pr = solve_qos(Hs, part_s, user_targets(probe), p_ant, cfg, rng)
        if pr.optimal:
            costs[j] = pr.r_star
    order = np.argsort(costs, kind="stable")

    step = 0
    improved = True
    while improved:
        improved = False
        for j in order:
            up = raised(targets[j])
            if up is None or up <= targets[j] * (1.0 + 1e-12):
                continue
            cand = targets.copy()
            cand[j] = up
            qr = solve_qos(Hs, part_s, user_targets(cand), p_ant, cfg, rng)
            step += 1
            accepted = qr.optimal and qr.r_star <= 1.0 + 1e-9
            if accepted:
                targets = cand
                W = _pac_rescale(_expand_precoder(qr.W, active, n_t), p_ant)
                obj = discrete_objective(targets)
                improved = True
            trace.append({"iteration": step, "objective": obj,
                          "r_star": qr.r_star if qr.r_star is not None else float("inf"),
                          "accepted": bool(accepted)})
    sr = sum_rate(W, H, partition)
    return SumRateResult("optimal", PrecodingMatrix(W), sr, step, trace)
