"""
Fast invariant suite behind ``secureas selftest``.

Each property returns ``(passed, detail)``.  ``tol_scale`` multiplies every
numeric tolerance; it exists so a corrupted tolerance can be injected and the
failure path exercised.
"""
from __future__ import annotations

import itertools
import time

import numpy as np

from .beamforming import mrt_directions, update_W, w_quadratic
from .fp import secrecy_surrogate, tight_aux
from .model import ChannelSet, SystemConfig, g_bound, is_power_feasible, power, wssr
from .numerics import BisectionSpec, bisect_monotone, solve_power_qp
from .so import _wssr_batch, fp_beamforming, greedy_select

__all__ = ["PROPERTIES", "random_instance", "exhaustive_best", "run_selftest"]


def random_instance(rng, M, N, K, J, power_budget=None):
    """Unit-variance Rayleigh instance with random weights and noise powers."""
    cfg = SystemConfig(
        M, N, K, J,
        power_budget if power_budget is not None else rng.uniform(0.5, 5.0),
        rng.uniform(0.5, 2.0, K),
        rng.uniform(0.5, 2.0, K),
        rng.uniform(0.5, 2.0, J),
    )

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    return cfg, ChannelSet(cn(M, K), cn(M, J))


def exhaustive_best(cfg, ch, W):
    """Best WSSR of ``W`` over every ``N``-subset (value, mask)."""
    combos = list(itertools.combinations(range(cfg.M), cfg.N))
    masks = np.zeros((len(combos), cfg.M))
    for row, idx in enumerate(combos):
        masks[row, list(idx)] = 1.0
    values = _wssr_batch(cfg, ch, W, masks)
    best = int(np.argmax(values))
    return float(values[best]), masks[best]


def _random_W(rng, cfg):
    W = rng.standard_normal((cfg.M, cfg.K)) + 1j * rng.standard_normal((cfg.M, cfg.K))
    return W * np.sqrt(cfg.power_budget / power(W))


def surrogate_tightness(rng, tol_scale):
    worst = 0.0
    for _ in range(30):
        M = int(rng.integers(3, 9))
        cfg, ch = random_instance(rng, M, int(rng.integers(1, M)), int(rng.integers(1, 4)), int(rng.integers(1, 3)))
        s = np.zeros(M)
        s[rng.choice(M, cfg.N, replace=False)] = 1.0
        W = _random_W(rng, cfg)
        g = g_bound(cfg, ch)
        aux = tight_aux(cfg, ch, W, s, g)
        err = abs(secrecy_surrogate(cfg, ch, W, s, aux, g) / np.log(2) - wssr(cfg, ch, W, s).wssr)
        worst = max(worst, err)
    return worst <= 1e-9 * tol_scale, f"max |surrogate - WSSR| = {worst:.2e} bits"


def bisection(rng, tol_scale):
    root = bisect_monotone(lambda x: 2.0 - x ** 3, BisectionSpec(0.0, 2.0, tolerance=1e-12))
    err_root = abs(root - 2.0 ** (1 / 3))
    # power-active beamformer subproblem must meet the budget with equality
    worst = 0.0
    for _ in range(10):
        cfg, ch = random_instance(rng, 6, 3, 2, 2, power_budget=1e-3)
        s = np.ones(cfg.M)
        aux = tight_aux(cfg, ch, mrt_directions(cfg, ch, s), s, g_bound(cfg, ch), b=cfg.weights)
        A, a = w_quadratic(cfg, ch, s, aux, g_bound(cfg, ch))
        sol = solve_power_qp(A, a, cfg.power_budget, tol=1e-12)
        if sol.lam > 0:
            worst = max(worst, abs(power(sol.W) / cfg.power_budget - 1.0))
    ok = err_root <= 1e-10 * tol_scale and worst <= 1e-8 * tol_scale
    return ok, f"root error {err_root:.1e}, power-equation residual {worst:.1e}"


def greedy_vs_exhaustive(rng, tol_scale):
    hits = total = 0
    for N in (2, 3):
        for _ in range(10):
            cfg, ch = random_instance(rng, 6, N, 2, 2)
            W = fp_beamforming(cfg, ch)
            sel = greedy_select(cfg, ch, W)
            best, _ = exhaustive_best(cfg, ch, W)
            got = wssr(cfg, ch, W, sel.s).wssr
            if got > best + 1e-9:
                return False, "greedy beat exhaustive search"
            hits += got >= best - 1e-9 * tol_scale * max(1.0, best)
            total += 1
    return hits >= 0.6 * total, f"greedy optimal on {hits}/{total} instances"


def power_feasibility(rng, tol_scale):
    worst = -np.inf
    for _ in range(10):
        cfg, ch = random_instance(rng, 6, 3, 2, 2)
        s = np.zeros(cfg.M)
        s[:cfg.N] = 1.0
        g = g_bound(cfg, ch)
        aux = tight_aux(cfg, ch, mrt_directions(cfg, ch, s), s, g, b=cfg.weights)
        W = update_W(cfg, ch, s, aux, g).W
        worst = max(worst, power(W) / cfg.power_budget - 1.0)
        if not is_power_feasible(W, cfg.power_budget, slack=1e-6 * tol_scale):
            return False, f"power exceeded budget by {worst:.1e} (relative)"
    return True, f"max relative power excess {worst:.1e}"


def mrt_single_user(rng, tol_scale):
    cfg, ch = random_instance(rng, 8, 3, 1, 1)
    w = mrt_directions(cfg, ch)[:, 0]
    h = ch.H[:, 0]
    cos = abs(np.vdot(h, w)) / (np.linalg.norm(h) * np.linalg.norm(w))
    return 1.0 - cos <= 1e-3 * tol_scale, f"cosine to the channel {cos:.6f}"


PROPERTIES = {
    "surrogate-tightness": surrogate_tightness,
    "bisection": bisection,
    "greedy-vs-exhaustive": greedy_vs_exhaustive,
    "power-feasibility": power_feasibility,
    "mrt-direction": mrt_single_user,
}


def run_selftest(tol_scale=1.0, seed=20240601, out=print):
    """Run every property, print one line each and return the failing names."""
    failed = []
    for name, prop in PROPERTIES.items():
        t0 = time.perf_counter()
        try:
            ok, detail = prop(np.random.default_rng([seed, len(name)]), tol_scale)
        except Exception as exc:  # a crash is a failure of that property
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out(f"{'PASS' if ok else 'FAIL'}  {name:22s} {detail}  ({time.perf_counter() - t0:.2f}s)")
        if not ok:
            failed.append(name)
    return failed
