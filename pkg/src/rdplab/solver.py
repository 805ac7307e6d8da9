"""Numerical computation of the rate-distortion-perception function.

Minimizes I(X; Xhat) over channels subject to a distortion budget
E[Delta] <= D and a perception budget d(p_X, p_Xhat) <= P.

Algorithms:

* polyhedral perception constraints (total variation, coupling cost,
  squared Wasserstein) and the P = 0 marginal-equality case: away-step
  Frank-Wolfe with exact line search; every linear subproblem is an LP over
  the channel polytope intersected with the constraints (scipy HiGHS);
* Kullback-Leibler perception with P > 0: outer dual bisection on the
  perception multiplier with an inner Frank-Wolfe solve of
  I + mu * KL(p_X || p_Xhat) over the distortion polytope.

A channel with independent output (rate zero) is tried first; when some
product channel satisfies both budgets the optimum is exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog

from .divergences import (
    COUPLING_COST,
    KL,
    TV,
    WASSERSTEIN_SQ,
    DivergenceSpec,
    divergence,
)
from .pmf import Channel, Pmf, mutual_information_matrix

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITER_LIMIT = "iter_limit"

_LOG2 = math.log(2.0)
_CLIP = 1e-300


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-6  # Frank-Wolfe duality-gap target, in bits
    max_iter: int = 20000
    feas_tol: float = 1e-9


@dataclass(frozen=True, eq=False)
class RdpProblem:
    """One instance (p_X, Delta, d, D, P) with an optional output alphabet."""

    source: Pmf
    distortion: np.ndarray = field(repr=False)
    divergence: DivergenceSpec = field(default_factory=lambda: DivergenceSpec(TV))
    dist_budget: float = 0.0
    perc_budget: float = 0.0
    output_alphabet: tuple | None = None

    def __post_init__(self) -> None:
        out = self.output_alphabet
        if out is None:
            out = self.source.labels
        out = tuple(out)
        object.__setattr__(self, "output_alphabet", out)
        m, k = len(self.source.atoms), len(out)
        if m > 256 or k > 256:
            raise ValueError("alphabets beyond 256 symbols are out of scope")
        delta = np.asarray(self.distortion, dtype=float)
        if delta.shape != (m, k):
            raise ValueError(f"distortion matrix shape {delta.shape}, expected {(m, k)}")
        if np.any(delta < 0.0) or not np.all(np.isfinite(delta)):
            raise ValueError("distortion matrix must be finite and nonnegative")
        if out == self.source.labels:
            if np.any(np.diag(delta) != 0.0):
                raise ValueError("Delta(x, x) must vanish when alphabets coincide")
            off = delta + np.where(np.eye(m, dtype=bool), np.inf, 0.0)
            if np.any(off <= 0.0):
                raise ValueError("Delta(x, xhat) must be positive off the diagonal")
        object.__setattr__(self, "distortion", delta)
        if self.dist_budget < 0.0 or self.perc_budget < 0.0:
            raise ValueError("budgets must be nonnegative")
        if not self.divergence.convex_in_second:
            raise ValueError("divergence must be convex in its second argument")
        if self.divergence.kind in (TV, KL) and out != self.source.labels:
            raise ValueError(f"{self.divergence.kind} needs matching alphabets")
        if self.divergence.kind == COUPLING_COST and self.divergence.cost.shape != (m, k):
            raise ValueError("perception cost matrix shape does not match alphabets")
        if self.divergence.kind == WASSERSTEIN_SQ:
            self.source.real_values()
            _real_values(out)

    def perception_cost_matrix(self) -> np.ndarray | None:
        """Cost matrix of the embedded-coupling perception constraint, if any."""
        if self.divergence.kind == COUPLING_COST:
            return self.divergence.cost
        if self.divergence.kind == WASSERSTEIN_SQ:
            x = self.source.real_values()
            y = _real_values(self.output_alphabet)
            return (x[:, None] - y[None, :]) ** 2
        return None


def _real_values(labels) -> np.ndarray:
    vals = []
    for a in labels:
        if isinstance(a, bool) or not isinstance(a, (int, float)):
            raise ValueError(f"label {a!r} is not a real value")
        vals.append(float(a))
    return np.array(vals, dtype=float)


@dataclass(frozen=True, eq=False)
class RdpSolution:
    rate: float
    channel: Channel
    achieved_dist: float
    achieved_perc: float
    status: str
    primal_gap_estimate: float
    iterations: int


# ---------------------------------------------------------------------------
# LP subproblems
# ---------------------------------------------------------------------------


class _Polytope:
    """LP data for min <c, w> over the feasible channel set.

    Variable layout: the m*k channel entries first, then auxiliary variables
    (TV slack per output atom, or an embedded coupling for transport-type
    perception constraints).
    """

    def __init__(self, prob: RdpProblem, perception: bool, equality: bool):
        p = prob.source.probs
        m, k = prob.distortion.shape
        self.m, self.k = m, k
        n = m * k
        a_eq, b_eq, a_ub, b_ub = [], [], [], []
        for i in range(m):  # row-stochasticity
            row = np.zeros(n)
            row[i * k : (i + 1) * k] = 1.0
            a_eq.append(row)
            b_eq.append(1.0)
        drow = (p[:, None] * prob.distortion).ravel()
        a_ub.append(drow)
        b_ub.append(prob.dist_budget)
        self.n_aux = 0
        if equality:
            # P = 0: the output marginal must equal the source law exactly
            target = {lab: pr for lab, pr in prob.source.atoms}
            for j, lab in enumerate(prob.output_alphabet):
                row = np.zeros(n)
                row[j::k] = p
                a_eq.append(row)
                b_eq.append(target.get(lab, 0.0))
        elif perception and prob.divergence.kind == TV:
            self.n_aux = k
            px = prob.source.probs  # matching alphabets enforced upstream
            for j in range(k):
                qrow = np.zeros(n)
                qrow[j::k] = p
                row = np.concatenate([qrow, np.zeros(k)])
                row[n + j] = -1.0
                a_ub.append(row)  # q_j - t_j <= px_j
                b_ub.append(px[j])
                row2 = np.concatenate([-qrow, np.zeros(k)])
                row2[n + j] = -1.0
                a_ub.append(row2)  # -q_j - t_j <= -px_j
                b_ub.append(-px[j])
            trow = np.concatenate([np.zeros(n), 0.5 * np.ones(k)])
            a_ub.append(trow)
            b_ub.append(prob.perc_budget)
        elif perception:
            cost = prob.perception_cost_matrix()
            if cost is None:
                raise ValueError("no LP encoding for this divergence")
            self.n_aux = m * k
            for i in range(m):  # coupling rows match the source
                row = np.zeros(n + m * k)
                row[n + i * k : n + (i + 1) * k] = 1.0
                a_eq.append(row)
                b_eq.append(p[i])
            for j in range(k):  # coupling columns match the output marginal
                row = np.zeros(n + m * k)
                row[j::k][:m] = -p  # note: first n entries, stride k
                row[n + j :: k][: m] = 1.0
                a_eq.append(row)
                b_eq.append(0.0)
            crow = np.concatenate([np.zeros(n), cost.ravel()])
            a_ub.append(crow)
            b_ub.append(prob.perc_budget)
        n_tot = n + self.n_aux
        self.a_eq = np.array([np.pad(r, (0, n_tot - len(r))) for r in a_eq])
        self.b_eq = np.array(b_eq)
        self.a_ub = np.array([np.pad(r, (0, n_tot - len(r))) for r in a_ub])
        self.b_ub = np.array(b_ub)
        self.n_tot = n_tot

    def minimize(self, grad: np.ndarray | None) -> np.ndarray | None:
        """Vertex minimizing <grad, w>; None when the polytope is empty."""
        c = np.zeros(self.n_tot)
        if grad is not None:
            c[: self.m * self.k] = grad.ravel()
        res = linprog(
            c,
            A_ub=self.a_ub,
            b_ub=self.b_ub,
            A_eq=self.a_eq,
            b_eq=self.b_eq,
            bounds=(0.0, None),
            method="highs",
        )
        if not res.success:
            return None
        return res.x[: self.m * self.k].reshape(self.m, self.k)


def _zero_rate_channel(prob: RdpProblem) -> np.ndarray | None:
    """Feasible product channel p(xhat|x) = q(xhat), which has rate zero."""
    p = prob.source.probs
    m, k = prob.distortion.shape
    col_cost = p @ prob.distortion
    a_eq = [np.ones(k)]
    b_eq = [1.0]
    a_ub = [col_cost]
    b_ub = [prob.dist_budget]
    n_aux = 0
    if prob.perc_budget == 0.0 or prob.divergence.kind == KL:
        if prob.divergence.kind == KL and prob.perc_budget > 0.0:
            return None  # handled by the dual path
        # q must equal the source law
        target = {lab: pr for lab, pr in prob.source.atoms}
        for j, lab in enumerate(prob.output_alphabet):
            row = np.zeros(k)
            row[j] = 1.0
            a_eq.append(row)
            b_eq.append(target.get(lab, 0.0))
    elif prob.divergence.kind == TV:
        n_aux = k
        px = prob.source.probs
        for j in range(k):
            row = np.zeros(2 * k)
            row[j] = 1.0
            row[k + j] = -1.0
            a_ub.append(row)
            b_ub.append(px[j])
            row2 = np.zeros(2 * k)
            row2[j] = -1.0
            row2[k + j] = -1.0
            a_ub.append(row2)
            b_ub.append(-px[j])
        trow = np.zeros(2 * k)
        trow[k:] = 0.5
        a_ub.append(trow)
        b_ub.append(prob.perc_budget)
    else:
        cost = prob.perception_cost_matrix()
        n_aux = m * k
        for i in range(m):
            row = np.zeros(k + m * k)
            row[k + i * k : k + (i + 1) * k] = 1.0
            a_eq.append(row)
            b_eq.append(p[i])
        for j in range(k):
            row = np.zeros(k + m * k)
            row[j] = -1.0
            row[k + j :: k][: m] = 1.0
            a_eq.append(row)
            b_eq.append(0.0)
        crow = np.zeros(k + m * k)
        crow[k:] = cost.ravel()
        a_ub.append(crow)
        b_ub.append(prob.perc_budget)
    n_tot = k + n_aux
    res = linprog(
        np.zeros(n_tot),
        A_ub=np.array([np.pad(r, (0, n_tot - len(r))) for r in a_ub]),
        b_ub=np.array(b_ub),
        A_eq=np.array([np.pad(r, (0, n_tot - len(r))) for r in a_eq]),
        b_eq=np.array(b_eq),
        bounds=(0.0, None),
        method="highs",
    )
    if not res.success:
        return None
    q = np.clip(res.x[:k], 0.0, None)
    q = q / q.sum()
    return np.tile(q, (m, 1))


# ---------------------------------------------------------------------------
# Objective and away-step Frank-Wolfe
# ---------------------------------------------------------------------------


def _mi_value(p: np.ndarray, w: np.ndarray) -> float:
    return mutual_information_matrix(p, w)


def _mi_grad(p: np.ndarray, w: np.ndarray) -> np.ndarray:
    q = np.clip(p @ w, _CLIP, None)
    wc = np.clip(w, _CLIP, None)
    return p[:, None] * np.log2(wc / q[None, :])


def _kl_to_marginal(px: np.ndarray, q: np.ndarray) -> float:
    qc = np.clip(q, _CLIP, None)
    mask = px > 0.0
    return float(np.sum(px[mask] * np.log2(px[mask] / qc[mask])))


class _Objective:
    """I(X; Xhat) plus an optional mu * KL(p_X || p_Xhat) penalty."""

    def __init__(self, p: np.ndarray, mu: float = 0.0):
        self.p = p
        self.mu = mu

    def value(self, w: np.ndarray) -> float:
        v = _mi_value(self.p, w)
        if self.mu > 0.0:
            v += self.mu * _kl_to_marginal(self.p, self.p @ w)
        return v

    def grad(self, w: np.ndarray) -> np.ndarray:
        g = _mi_grad(self.p, w)
        if self.mu > 0.0:
            q = np.clip(self.p @ w, _CLIP, None)
            g = g - self.mu * np.outer(self.p, self.p / (q * _LOG2))
        return g


def _line_search(obj: _Objective, w: np.ndarray, d: np.ndarray, t_max: float) -> float:
    """Exact minimization of the convex 1-D restriction via derivative bisection."""

    def dphi(t: float) -> float:
        return float(np.sum(obj.grad(w + t * d) * d))

    if dphi(t_max) <= 0.0:
        return t_max
    lo, hi = 0.0, t_max
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if dphi(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _frank_wolfe(
    obj: _Objective,
    polytope: _Polytope,
    w0: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, int]:
    """Away-step Frank-Wolfe; returns (iterate, duality gap, iterations)."""
    atoms: list[np.ndarray] = [w0.copy()]
    weights: list[float] = [1.0]
    w = w0.copy()
    gap = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = obj.grad(w)
        s = polytope.minimize(g)
        if s is None:
            raise RuntimeError("LP subproblem became infeasible")
        gap = float(np.sum(g * (w - s)))
        if gap < tol:
            break
        scores = [float(np.sum(g * a)) for a in atoms]
        vi = int(np.argmax(scores))
        away_gap = scores[vi] - float(np.sum(g * w))
        if gap >= away_gap or weights[vi] >= 1.0 - 1e-12:
            d = s - w
            t = _line_search(obj, w, d, 1.0)
            if t <= 0.0:
                break
            weights = [x * (1.0 - t) for x in weights]
            key = np.round(s, 12).tobytes()
            for i, a in enumerate(atoms):
                if np.round(a, 12).tobytes() == key:
                    weights[i] += t
                    break
            else:
                atoms.append(s)
                weights.append(t)
        else:
            d = w - atoms[vi]
            t_max = weights[vi] / (1.0 - weights[vi])
            t = _line_search(obj, w, d, t_max)
            if t <= 0.0:
                break
            weights = [x * (1.0 + t) for x in weights]
            weights[vi] -= t
        w = w + t * d
        # prune dead atoms and merge duplicates to keep the active set small
        keep = [i for i, x in enumerate(weights) if x > 1e-14]
        atoms = [atoms[i] for i in keep]
        weights = [weights[i] for i in keep]
        if it % 32 == 0:
            total = sum(weights)
            weights = [x / total for x in weights]
            w = sum(x * a for x, a in zip(weights, atoms))
    return np.clip(w, 0.0, None), gap, it


# ---------------------------------------------------------------------------
# Public solver entry points
# ---------------------------------------------------------------------------


def solve_rdp(prob: RdpProblem, opts: SolverOptions | None = None) -> RdpSolution:
    """Minimize I(X; Xhat) subject to the distortion and perception budgets."""
    opts = opts or SolverOptions()
    p = prob.source.probs
    zr = _zero_rate_channel(prob)
    if zr is not None:
        return _finish(prob, zr, 0.0, 0, OPTIMAL)
    if prob.divergence.kind == KL and prob.perc_budget > 0.0:
        return _solve_kl_dual(prob, opts)
    polytope = _Polytope(prob, perception=True, equality=prob.perc_budget == 0.0)
    w0 = polytope.minimize(None)
    if w0 is None:
        return _infeasible(prob)
    obj = _Objective(p)
    w, gap, it = _frank_wolfe(obj, polytope, w0, opts.tol, opts.max_iter)
    status = OPTIMAL if gap < opts.tol else ITER_LIMIT
    return _finish(prob, w, gap, it, status)


def _solve_kl_dual(prob: RdpProblem, opts: SolverOptions) -> RdpSolution:
    """Dual bisection on the KL-perception multiplier, BA-style inner solves."""
    p = prob.source.probs
    min_dist = float(np.sum(p * prob.distortion.min(axis=1)))
    if min_dist > prob.dist_budget + opts.feas_tol:
        return _infeasible(prob)
    polytope = _Polytope(prob, perception=False, equality=False)
    w0 = polytope.minimize(None)
    if w0 is None:
        return _infeasible(prob)
    inner_tol = opts.tol / 4.0
    cache: dict[float, tuple[np.ndarray, float, int]] = {}
    total_iters = 0

    def inner(mu: float, start: np.ndarray):
        nonlocal total_iters
        if mu not in cache:
            w, gap, it = _frank_wolfe(
                _Objective(p, mu), polytope, start, inner_tol, opts.max_iter
            )
            total_iters += it
            cache[mu] = (w, _kl_to_marginal(p, p @ w), gap)
        return cache[mu]

    w, kl, gap = inner(0.0, w0)
    if kl <= prob.perc_budget:
        status = OPTIMAL if gap < opts.tol else ITER_LIMIT
        return _finish(prob, w, gap, total_iters, status)
    mu_lo, mu_hi = 0.0, 1.0
    for _ in range(64):
        _, kl_hi, _ = inner(mu_hi, w)
        if kl_hi <= prob.perc_budget:
            break
        mu_lo, mu_hi = mu_hi, mu_hi * 2.0
    else:
        # not even a huge multiplier drives the divergence below budget
        return _infeasible(prob)
    for _ in range(200):
        slack = mu_hi * max(0.0, prob.perc_budget - cache[mu_hi][1])
        if slack + cache[mu_hi][2] < opts.tol or mu_hi - mu_lo < 1e-12 * mu_hi:
            break
        mid = 0.5 * (mu_lo + mu_hi)
        _, kl_mid, _ = inner(mid, cache[mu_hi][0])
        if kl_mid <= prob.perc_budget:
            mu_hi = mid
        else:
            mu_lo = mid
    w, kl, inner_gap = cache[mu_hi]
    gap_est = inner_gap + mu_hi * max(0.0, prob.perc_budget - kl)
    status = OPTIMAL if gap_est < 10.0 * opts.tol else ITER_LIMIT
    return _finish(prob, w, gap_est, total_iters, status)


def _finish(prob, w, gap, iterations, status) -> RdpSolution:
    w = np.clip(w, 0.0, None)
    w = w / w.sum(axis=1, keepdims=True)
    channel = Channel(prob.source.labels, prob.output_alphabet, w)
    p = prob.source.probs
    rate = mutual_information_matrix(p, channel.matrix)
    achieved_d = float(np.sum(p[:, None] * channel.matrix * prob.distortion))
    q = Pmf.from_probs(prob.output_alphabet, p @ channel.matrix)
    achieved_p = divergence(prob.divergence, prob.source, q)
    return RdpSolution(
        rate=rate,
        channel=channel,
        achieved_dist=achieved_d,
        achieved_perc=achieved_p,
        status=status,
        primal_gap_estimate=float(gap),
        iterations=iterations,
    )


def _infeasible(prob: RdpProblem) -> RdpSolution:
    k = len(prob.output_alphabet)
    uniform = np.full((len(prob.source.atoms), k), 1.0 / k)
    channel = Channel(prob.source.labels, prob.output_alphabet, uniform)
    p = prob.source.probs
    q = Pmf.from_probs(prob.output_alphabet, p @ uniform)
    return RdpSolution(
        rate=math.inf,
        channel=channel,
        achieved_dist=float(np.sum(p[:, None] * uniform * prob.distortion)),
        achieved_perc=divergence(prob.divergence, prob.source, q),
        status=INFEASIBLE,
        primal_gap_estimate=math.inf,
        iterations=0,
    )


def sweep_curve(
    prob_template: RdpProblem,
    dist_grid,
    perc_grid=None,
    opts: SolverOptions | None = None,
) -> list[tuple[float, float, RdpSolution]]:
    """Solve over a sorted (D, P) grid, one instance per point.

    Failures at single grid points are recorded in the per-point status and
    the sweep continues.
    """
    dist_grid = list(dist_grid)
    perc_grid = list(perc_grid) if perc_grid is not None else [prob_template.perc_budget]
    if not dist_grid or not perc_grid:
        raise ValueError("grids must be nonempty")
    if sorted(dist_grid) != dist_grid or sorted(perc_grid) != perc_grid:
        raise ValueError("grids must be sorted ascending")
    out = []
    for perc in perc_grid:
        for dist in dist_grid:
            prob = replace(prob_template, dist_budget=dist, perc_budget=perc)
            try:
                sol = solve_rdp(prob, opts)
            except Exception:
                sol = _infeasible(prob)
            out.append((float(dist), float(perc), sol))
    return out


# ---------------------------------------------------------------------------
# Classic rate-distortion on a gridded output alphabet (Blahut-Arimoto)
# ---------------------------------------------------------------------------


class GridInfeasibleError(ValueError):
    """The distortion target is below the best achievable on the output grid."""


def rd_function_grid(
    p_x: Pmf,
    output_atoms,
    cost,
    dist: float,
    ba_tol: float = 1e-13,
    max_ba_iter: int = 20000,
) -> float:
    """Classical R(D) on a finite output grid via Blahut-Arimoto.

    Sweeps the Lagrangian slope and bisects it until the expected cost matches
    `dist`; returns the rate in bits.
    """
    p = p_x.probs
    atoms = list(output_atoms)
    if callable(cost):
        cmat = np.array([[float(cost(x, v)) for v in atoms] for x in p_x.labels])
    else:
        cmat = np.asarray(cost, dtype=float)
    if cmat.shape != (len(p), len(atoms)):
        raise ValueError("cost shape does not match alphabets")
    d_floor = float(np.sum(p * cmat.min(axis=1)))
    if dist < d_floor - 1e-12:
        raise GridInfeasibleError(
            f"target {dist} below grid floor {d_floor}"
        )
    d_zero_rate = float(np.min(p @ cmat))
    if dist >= d_zero_rate:
        return 0.0

    def ba_point(lam: float, iters: int, tol: float) -> tuple[float, float]:
        q = np.full(len(atoms), 1.0 / len(atoms))
        expd = np.exp2(-lam * cmat)
        for _ in range(iters):
            w = q[None, :] * expd
            w /= w.sum(axis=1, keepdims=True)
            q_new = p @ w
            if np.abs(q_new - q).sum() < tol:
                q = q_new
                break
            q = q_new
        w = q[None, :] * expd
        w /= w.sum(axis=1, keepdims=True)
        rate = mutual_information_matrix(p, w)
        d_val = float(np.sum(p[:, None] * w * cmat))
        return rate, d_val

    search_iters = min(max_ba_iter, 4000)
    lam_hi = 1.0
    for _ in range(80):
        _, d_hi = ba_point(lam_hi, search_iters, 1e-11)
        if d_hi <= dist:
            break
        lam_hi *= 2.0
    else:
        raise GridInfeasibleError("slope search failed to reach the target")
    lam_lo = 0.0
    for _ in range(48):
        lam_mid = 0.5 * (lam_lo + lam_hi)
        _, d_mid = ba_point(lam_mid, search_iters, 1e-11)
        if d_mid <= dist:
            lam_hi = lam_mid
        else:
            lam_lo = lam_mid
        if abs(d_mid - dist) < 1e-9:
            break
    rate, _ = ba_point(lam_hi, max_ba_iter, ba_tol)
    return rate


# ---------------------------------------------------------------------------
# Exhaustive oracle for binary sources
# ---------------------------------------------------------------------------


def brute_force_rdp(prob: RdpProblem, resolution: float = 1e-3) -> float:
    """Grid search over binary-input channels; the solver's independent oracle.

    Returns the minimum feasible mutual information, or +inf when no grid
    point is feasible.  Guaranteed within O(resolution) of the optimum away
    from degenerate boundaries; output alphabets of size up to 3.
    """
    m = len(prob.source.atoms)
    k = len(prob.output_alphabet)
    if m != 2:
        raise ValueError("brute force supports binary sources only")
    if k == 2:
        best = _brute_binary(prob, resolution)
        if best is None:
            return math.inf
        # refine around the coarse minimizer
        a0, b0, val = best
        window = 4.0 * resolution
        fine = _brute_binary(
            prob,
            resolution / 40.0,
            a_range=(max(0.0, a0 - window), min(1.0, a0 + window)),
            b_range=(max(0.0, b0 - window), min(1.0, b0 + window)),
        )
        return val if fine is None else min(val, fine[2])
    if k == 3:
        return _brute_ternary(prob, max(resolution, 0.02))
    raise ValueError("output alphabet too large for brute force")


def _brute_binary(prob, res, a_range=(0.0, 1.0), b_range=(0.0, 1.0)):
    p = prob.source.probs
    delta = prob.distortion
    n_a = max(2, int(round((a_range[1] - a_range[0]) / res)) + 1)
    n_b = max(2, int(round((b_range[1] - b_range[0]) / res)) + 1)
    a = np.linspace(a_range[0], a_range[1], n_a)
    if prob.perc_budget == 0.0:
        # marginal equality pins b to a; outputs must carry the source labels
        target = {lab: pr for lab, pr in prob.source.atoms}
        if set(prob.output_alphabet) != set(prob.source.labels):
            return None
        t1 = target[prob.output_alphabet[1]]
        b = (p[0] * a + p[1] - t1) / p[1]
        ok = (b >= 0.0) & (b <= 1.0)
        a, b = a[ok], b[ok]
        if a.size == 0:
            return None
        aa, bb = a, b
    else:
        b = np.linspace(b_range[0], b_range[1], n_b)
        aa, bb = np.meshgrid(a, b, indexing="ij")
        aa, bb = aa.ravel(), bb.ravel()
    w01, w10 = aa, bb
    w00, w11 = 1.0 - w01, 1.0 - w10
    e_d = p[0] * (w00 * delta[0, 0] + w01 * delta[0, 1]) + p[1] * (
        w10 * delta[1, 0] + w11 * delta[1, 1]
    )
    q1 = p[0] * w01 + p[1] * w11
    q0 = 1.0 - q1
    feasible = e_d <= prob.dist_budget + 1e-12
    if prob.perc_budget > 0.0:
        perc = _binary_divergence_grid(prob, q0, q1)
        feasible &= perc <= prob.perc_budget + 1e-12
    if not np.any(feasible):
        return None
    joint = np.stack(
        [p[0] * w00, p[0] * w01, p[1] * w10, p[1] * w11], axis=0
    )
    qs = np.stack([q0, q1, q0, q1], axis=0)
    ps = np.array([p[0], p[0], p[1], p[1]])[:, None]
    terms = np.where(joint > 0.0, joint * np.log2(np.clip(joint, 1e-300, None) / np.clip(ps * qs, 1e-300, None)), 0.0)
    mi = np.clip(terms.sum(axis=0), 0.0, None)
    mi = np.where(feasible, mi, np.inf)
    idx = int(np.argmin(mi))
    return float(w01[idx]), float(w10[idx]), float(mi[idx])


def _binary_divergence_grid(prob, q0, q1):
    px = prob.source.probs
    kind = prob.divergence.kind
    if kind == TV:
        return 0.5 * (np.abs(q0 - px[0]) + np.abs(q1 - px[1]))
    if kind == KL:
        with np.errstate(divide="ignore"):
            t0 = np.where(px[0] > 0, px[0] * (np.log2(px[0]) - np.log2(q0)), 0.0)
            t1 = np.where(px[1] > 0, px[1] * (np.log2(px[1]) - np.log2(q1)), 0.0)
        return t0 + t1
    cost = prob.perception_cost_matrix()
    # 2x2 transport is linear in the free joint entry: check both endpoints
    lo = np.maximum(0.0, px[1] + q1 - 1.0)
    hi = np.minimum(px[1], q1)

    def cost_at(t):
        return (
            cost[0, 0] * (1.0 - px[1] - q1 + t)
            + cost[0, 1] * (q1 - t)
            + cost[1, 0] * (px[1] - t)
            + cost[1, 1] * t
        )

    return np.minimum(cost_at(lo), cost_at(hi))


def _brute_ternary(prob, res):
    p = prob.source.probs
    delta = prob.distortion
    grid = np.arange(0.0, 1.0 + res / 2, res)
    rows = [
        (x, y, 1.0 - x - y)
        for x in grid
        for y in grid
        if x + y <= 1.0 + 1e-12
    ]
    rows = [(x, y, max(z, 0.0)) for x, y, z in rows]
    best = math.inf
    rows_arr = np.array(rows)
    for r0 in rows_arr:
        w = np.empty((2, 3))
        w[0] = r0
        e0 = p[0] * float(r0 @ delta[0])
        cand = p[1] * (rows_arr @ delta[1])
        e_d = e0 + cand
        q = p[0] * r0[None, :] + p[1] * rows_arr
        feasible = e_d <= prob.dist_budget + 1e-12
        if prob.perc_budget == 0.0:
            target = np.array(
                [dict(prob.source.atoms).get(lab, 0.0) for lab in prob.output_alphabet]
            )
            feasible &= np.max(np.abs(q - target[None, :]), axis=1) <= res
        else:
            pvals = np.array(
                [
                    divergence(
                        prob.divergence,
                        prob.source,
                        Pmf.from_probs(prob.output_alphabet, qrow / qrow.sum()),
                    )
                    for qrow in q
                ]
            )
            feasible &= pvals <= prob.perc_budget + 1e-12
        if not np.any(feasible):
            continue
        mi = _mi_rows(p, r0, rows_arr, q)
        mi = np.where(feasible, mi, np.inf)
        best = min(best, float(np.min(mi)))
    return best


def _mi_rows(p, r0, rows, q):
    out = np.zeros(len(rows))
    for col in range(rows.shape[1]):
        j0 = p[0] * r0[col]
        j1 = p[1] * rows[:, col]
        qc = np.clip(q[:, col], 1e-300, None)
        t0 = np.where(j0 > 0.0, j0 * np.log2(np.clip(j0, 1e-300, None) / (p[0] * qc)), 0.0)
        t1 = np.where(j1 > 0.0, j1 * np.log2(np.clip(j1, 1e-300, None) / (p[1] * qc)), 0.0)
        out += t0 + t1
    return np.clip(out, 0.0, None)
