"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import math
import time

import numpy as np

from rdplab.pmf import Channel, Pmf, mutual_information
from rdplab.divergences import (
    divergence,
    maximal_coupling,
    total_variation,
    wasserstein_sq,
)
from rdplab.closed_forms import (
    binary_optimal_construction,
    kkt_verify,
    mirror_construction,
    phi_binary,
    phi_gaussian,
    rd_half_binary,
    varphi_binary,
    varphi_gaussian,
)
from rdplab.solver import (
    INFEASIBLE,
    RdpProblem,
    brute_force_rdp,
    rd_function_grid,
    solve_rdp,
)
from rdplab.coding import (
    DERANDOMIZED,
    SHARED_SEED,
    empirical_perception_check,
    random_typical_codebook,
    shift_ensemble_sim,
    simulate_circle,
    simulate_seed_map,
    soft_covering_tv,
)

HAMMING = np.array([[0.0, 1.0], [1.0, 0.0]])

# independently recomputed spot values (50-digit evaluation of the closed
# forms; the optimal channel's mutual information matches to full precision)
PHI_QUARTER_AT_02 = 0.1436583459307867
VARPHI_QUARTER_AT_02 = 0.3032665275070845


def _report(num: int, desc: str, failures: list) -> None:
    status = "PASS" if not failures else "FAIL"
    print(f"\nACCEPTANCE {num:02d} [{desc}]: {status}")
    assert not failures, f"criterion {num} ({desc}): " + "; ".join(failures)


def test_criterion_01_circle_constants():
    failures = []
    for scheme in ("private", "common", "antipodal", "unconstrained"):
        start = time.perf_counter()
        est = simulate_circle(scheme, samples=1_000_000, seed=2024)
        elapsed = time.perf_counter() - start
        if abs(est.mean - est.analytic) > 3 * est.std_error:
            failures.append(
                f"{scheme}: |{est.mean:.6f} - {est.analytic:.6f}| > 3se={3 * est.std_error:.6f}"
            )
        if elapsed >= 5.0:
            failures.append(f"{scheme}: {elapsed:.1f}s >= 5s")
    _report(1, "one-bit circle constants", failures)


def test_criterion_02_binary_closed_forms():
    failures = []
    rho = 0.25
    dmax = 2 * rho * (1 - rho)
    grid = np.linspace(0.0, dmax, 200)
    phi = np.array([phi_binary(rho, d) for d in grid])
    var = np.array([varphi_binary(rho, d) for d in grid])
    rdh = np.array([rd_half_binary(rho, d) for d in grid])
    if not np.all(phi <= var + 1e-9):
        failures.append("phi > varphi somewhere")
    if not np.all(var <= rdh + 1e-9):
        failures.append("varphi > Hb(rho) - Hb(D/2) somewhere")
    if not (np.all(np.diff(phi) <= 1e-9) and np.all(np.diff(var) <= 1e-9)):
        failures.append("curves not nonincreasing")
    if phi[-1] != 0.0 or var[-1] != 0.0 or phi[-2] <= 0.0 or var[-2] <= 0.0:
        failures.append("curves do not vanish exactly at D = 0.375")
    if abs(phi_binary(rho, 0.2) - PHI_QUARTER_AT_02) > 1e-5:
        failures.append(f"phi(0.25, 0.2) = {phi_binary(rho, 0.2):.7f}")
    if abs(varphi_binary(rho, 0.2) - VARPHI_QUARTER_AT_02) > 1e-5:
        failures.append(f"varphi(0.25, 0.2) = {varphi_binary(rho, 0.2):.7f}")
    _report(2, "binary closed forms", failures)


def test_criterion_03_gaussian_closed_forms():
    failures = []
    if abs(phi_gaussian(1.0, 1.0) - 0.5 * math.log2(4.0 / 3.0)) > 1e-6:
        failures.append("phi(1, 1) != (1/2) log2(4/3)")
    if abs(varphi_gaussian(1.0, 1.0) - 0.5) > 1e-6:
        failures.append("varphi(1, 1) != 0.5")
    if phi_gaussian(1.0, 2.0) != 0.0 or varphi_gaussian(1.0, 2.0) != 0.0:
        failures.append("curves nonzero at D = 2 sigma^2")
    _report(3, "Gaussian closed forms", failures)


def test_criterion_04_solver_vs_closed_form():
    failures = []
    start = time.perf_counter()
    for dist in np.arange(0.05, 0.351, 0.05):
        prob = RdpProblem(
            source=Pmf.bernoulli(0.25),
            distortion=HAMMING,
            divergence=total_variation(),
            dist_budget=float(dist),
            perc_budget=0.0,
        )
        sol = solve_rdp(prob)
        expect = phi_binary(0.25, float(dist))
        if abs(sol.rate - expect) > 1e-3:
            failures.append(f"D={dist:.2f}: {sol.rate:.5f} vs {expect:.5f}")
    elapsed = time.perf_counter() - start
    if elapsed >= 10.0:
        failures.append(f"runtime {elapsed:.1f}s >= 10s")
    _report(4, "solver matches phi at P = 0", failures)


def test_criterion_05_solver_vs_brute_force():
    failures = []
    rng = np.random.default_rng(20240817)
    for trial in range(50):
        rho = float(rng.uniform(0.08, 0.5))
        delta = np.array(
            [[0.0, float(rng.uniform(0.2, 2.0))], [float(rng.uniform(0.2, 2.0)), 0.0]]
        )
        div = total_variation() if trial % 2 == 0 else wasserstein_sq()
        dist = float(rng.uniform(0.02, 0.6)) * float(delta.max())
        perc = float(rng.uniform(0.0, 0.5))
        prob = RdpProblem(
            source=Pmf.bernoulli(rho),
            distortion=delta,
            divergence=div,
            dist_budget=dist,
            perc_budget=perc,
        )
        sol = solve_rdp(prob)
        oracle = brute_force_rdp(prob, resolution=2e-3)
        if sol.status == INFEASIBLE:
            if oracle != math.inf:
                failures.append(f"trial {trial}: solver infeasible, oracle {oracle:.4f}")
        elif abs(sol.rate - oracle) > 2e-3:
            failures.append(f"trial {trial}: {sol.rate:.5f} vs oracle {oracle:.5f}")
    _report(5, "solver vs brute force (50 random)", failures)


def test_criterion_06_kkt_certification():
    failures = []
    for rho in np.linspace(0.05, 0.5, 10):
        for frac in np.linspace(0.05, 0.95, 10):
            dist = float(frac * 2 * rho * (1 - rho))
            sol = binary_optimal_construction(float(rho), dist)
            rep = kkt_verify(float(rho), dist, sol)
            if not rep.passed:
                failures.append(f"(rho={rho:.2f}, D={dist:.3f}) residuals too large")
            if max(rep.equality_residual, rep.distortion_residual) > 1e-9:
                failures.append(f"(rho={rho:.2f}, D={dist:.3f}) residual > 1e-9")
            if rep.inequality_margin < -1e-9:
                failures.append(f"(rho={rho:.2f}, D={dist:.3f}) margin < -1e-9")
    import dataclasses

    sol = binary_optimal_construction(0.25, 0.2)
    if kkt_verify(0.25, 0.2, dataclasses.replace(sol, lam=sol.lam * 1.01)).passed:
        failures.append("perturbed multiplier still passes")
    swapped = Pmf.from_pairs(
        [(sol.a, sol.p_v.probs[1]), (1 - sol.a, sol.p_v.probs[0])]
    )
    if kkt_verify(0.25, 0.2, dataclasses.replace(sol, p_v=swapped)).passed:
        failures.append("swapped weights still pass")
    _report(6, "KKT certificates on a 10x10 grid", failures)


def test_criterion_07_rd_half_cross_check():
    failures = []
    grid = np.linspace(0.0, 1.0, 513)
    for dist in (0.10, 0.15, 0.20, 0.25, 0.30):
        rate = rd_function_grid(
            Pmf.bernoulli(0.25), grid, lambda x, v: (x - v) ** 2, dist / 2.0
        )
        expect = varphi_binary(0.25, dist)
        if abs(rate - expect) > 2e-3:
            failures.append(f"D={dist}: {rate:.5f} vs {expect:.5f}")
    _report(7, "R(D/2) grid solver vs varphi", failures)


def test_criterion_08_maximal_coupling():
    failures = []
    rng = np.random.default_rng(11)
    for trial in range(100):
        k = int(rng.integers(2, 9))
        labels = tuple(range(k))
        p = Pmf.from_probs(labels, rng.dirichlet(np.ones(k)))
        q = Pmf.from_probs(labels, rng.dirichlet(np.ones(k)))
        coup = maximal_coupling(p, q)
        tv = divergence(total_variation(), p, q)
        if abs(coup.off_diagonal_mass() - tv) > 1e-12:
            failures.append(f"trial {trial}: off-diagonal mass != TV")
        if np.max(np.abs(coup.joint.sum(axis=1) - p.probs)) > 1e-12:
            failures.append(f"trial {trial}: left marginal off")
        if np.max(np.abs(coup.joint.sum(axis=0) - q.probs)) > 1e-12:
            failures.append(f"trial {trial}: right marginal off")
    _report(8, "maximal coupling (100 random pairs)", failures)


def test_criterion_09_mirror_construction():
    failures = []
    rng = np.random.default_rng(29)
    for trial in range(20):
        p = Pmf.bernoulli(float(rng.uniform(0.05, 0.95)))
        rows = rng.dirichlet(np.ones(2), size=2)
        ch = Channel((0, 1), ("u", "v"), rows)
        mc = mirror_construction(p, ch)
        if np.max(np.abs(mc.marginal_xhat().probs - p.probs)) > 1e-12:
            failures.append(f"trial {trial}: output marginal differs from source")
        if abs(mc.expected_sq_distortion() - 2 * mc.expected_sq_to_u()) > 1e-12:
            failures.append(f"trial {trial}: E[(X-Xhat)^2] != 2 E[(X-U)^2]")
    _report(9, "mirror construction (20 random binary)", failures)


def test_criterion_10_soft_covering():
    failures = []
    start = time.perf_counter()
    p = Pmf.bernoulli(0.5)
    bsc = Channel.bsc(0.11)
    means = []
    for n in (4, 8, 12):
        tvs = [
            soft_covering_tv(bsc, random_typical_codebook(p, n, 1.0, 0.6, seed=s), p)
            for s in range(20)
        ]
        means.append(float(np.mean(tvs)))
    if not (means[0] > means[1] > means[2]):
        failures.append(f"TV not strictly decreasing at R=1: {means}")
    for n in (4, 8, 12):
        tvs = [
            soft_covering_tv(bsc, random_typical_codebook(p, n, 0.1, 0.6, seed=s), p)
            for s in range(20)
        ]
        if np.mean(tvs) < 0.3:
            failures.append(f"R=0.1, n={n}: mean TV {np.mean(tvs):.3f} < 0.3")
    elapsed = time.perf_counter() - start
    if elapsed >= 60.0:
        failures.append(f"runtime {elapsed:.1f}s >= 60s")
    _report(10, "soft covering above/below the mutual information", failures)


def test_criterion_11_deterministic_block_coding():
    failures = []
    rho, construction_d = 0.25, 0.3
    sol = binary_optimal_construction(rho, construction_d)
    channel = sol.p_v_given_x
    p_x = Pmf.bernoulli(rho)
    rate = mutual_information(p_x, channel) + 0.1
    n, delta, trials = 64, 0.05, 10_000
    mc_err = 3 * 0.5 / math.sqrt(trials)
    for mode in (SHARED_SEED, DERANDOMIZED):
        rep = shift_ensemble_sim(
            channel,
            p_x,
            lambda x, v: (x - v) ** 2,
            n=n,
            rate_bits=rate,
            delta=delta,
            trials=trials,
            seed=99,
            mode=mode,
            alpha=0.25,
        )
        e_ref = rep.diagnostics["reference_distortion"]
        if rep.avg_distortion > e_ref + delta:
            failures.append(
                f"{mode}: distortion {rep.avg_distortion:.4f} > {e_ref:.4f} + {delta}"
            )
        if rep.max_perletter_divergence > 2 * delta + mc_err:
            failures.append(
                f"{mode}: per-letter TV {rep.max_perletter_divergence:.4f} > "
                f"{2 * delta + mc_err:.4f}"
            )
        if rep.perception_violations != 0:
            failures.append(f"{mode}: {rep.perception_violations} perception violations")
    # every codeword is P-typical with the typicality slack
    p_tilde = channel.push(p_x)
    cb = random_typical_codebook(p_tilde, n, rate, delta, seed=99)
    budget = divergence(wasserstein_sq(), p_x, p_tilde) + 2 * delta * len(p_tilde.atoms)
    for m in range(len(cb)):
        if not empirical_perception_check(
            cb.word_labels(m), p_x, wasserstein_sq(), budget
        ):
            failures.append(f"codeword {m} fails the perception check")
            break
    _report(11, "shift-ensemble block coding at n = 64", failures)


def test_criterion_12_seed_simulation():
    failures = []
    cases = [
        (Pmf.bernoulli(0.5), 4, 16),
        (Pmf.bernoulli(0.5), 3, 8),
        (Pmf.bernoulli(0.5), 5, 32),
        (Pmf.bernoulli(0.25), 8, 8),
        (Pmf.bernoulli(0.3), 6, 10),
        (Pmf.uniform((0, 1, 2)), 5, 9),
        (Pmf.from_probs((0, 1, 2), (0.6, 0.3, 0.1)), 7, 12),
    ]
    for p, n0, n in cases:
        sm = simulate_seed_map(p, n0, n)
        if sm.tv_to_uniform > sm.bound:
            failures.append(f"(n0={n0}, n={n}): TV {sm.tv_to_uniform} > bound {sm.bound}")
    for n0, n in ((4, 16), (3, 8), (5, 32)):
        sm = simulate_seed_map(Pmf.bernoulli(0.5), n0, n)
        if sm.tv_to_uniform != 0.0:
            failures.append(f"dyadic (n0={n0}, n={n}): TV {sm.tv_to_uniform} != 0")
    _report(12, "seed simulation bound", failures)
