"""
Beamformer block of the transformed problem.

For fixed selection and auxiliaries the beamformer subproblem is the convex
power-constrained quadratic

    min_W  sum_k w_k^H A_k w_k - 2 Re{w_k^H a_k}   s.t.  tr(W W^H) <= p,

solved in closed form up to a scalar multiplier found by bisection.
"""
from __future__ import annotations

import numpy as np

from .fp import AuxState, secrecy_surrogate, surrogate_terms, tight_aux, update_alpha, update_b, update_beta, update_eta
from .model import as_mask, g_bound
from .numerics import PowerQPSolution, solve_power_qp

__all__ = ["w_quadratic", "update_W", "mrt_directions", "fp_iterate"]


def w_quadratic(cfg, ch, s, aux: AuxState, g):
    """Assemble ``A`` (K x M x M) and ``a`` (M x K) of the beamformer subproblem.

    ``A_k = sum_i b_i (1 + alpha_i) |eta_i|^2 D h_i h_i^H D
    + b_k (1 + beta_k) / (1 + g) sum_j D g_j g_j^H D / delta_j^2`` and
    ``a_k = b_k (1 + alpha_k) eta_k D h_k`` with ``D = diag(s)``.
    """
    s = as_mask(s, cfg.M)
    Hs = s[:, None] * ch.H
    Gs = s[:, None] * ch.G
    user_coef = aux.b * (1.0 + aux.alpha) * np.abs(aux.eta) ** 2
    common = (Hs * user_coef) @ Hs.conj().T
    leak = (Gs / cfg.noise_eve) @ Gs.conj().T
    eve_coef = aux.b * (1.0 + aux.beta) / (1.0 + g)
    A = common[None, :, :] + eve_coef[:, None, None] * leak[None, :, :]
    a = Hs * (aux.b * (1.0 + aux.alpha) * aux.eta)
    return A, a


def update_W(cfg, ch, s, aux: AuxState, g, bisect_tol=1e-10) -> PowerQPSolution:
    """Exact minimizer of the beamformer subproblem at the current state.

    Returns ``(W, lam, degenerate)``; ``degenerate`` flags ``W = 0`` because
    every linear term vanished (all users inactive or all ``eta = 0``).
    """
    A, a = w_quadratic(cfg, ch, s, aux, g)
    return solve_power_qp(A, a, cfg.power_budget, tol=bisect_tol)


def mrt_directions(cfg, ch, s=None):
    """Unit-norm MRT directions with an equal power split, ``tr(W W^H) = p``.

    Columns of users whose (masked) channel vanishes are zero and their share
    is spread over the remaining users.
    """
    H = ch.H if s is None else as_mask(s, cfg.M)[:, None] * ch.H
    norms = np.linalg.norm(H, axis=0)
    alive = norms > 0
    W = np.zeros((cfg.M, cfg.K), dtype=complex)
    if np.any(alive):
        W[:, alive] = H[:, alive] / norms[alive] * np.sqrt(cfg.power_budget / alive.sum())
    return W


def fp_iterate(cfg, ch, s, W0=None, g=None, tol=1e-7, max_iters=500, bisect_tol=1e-10, warmup_iters=50):
    """Alternate the closed-form ``W, b, alpha, beta, eta`` updates with ``s`` fixed.

    The first (at most ``warmup_iters``) sweeps hold ``b`` at the user
    weights, so they ascend the unclipped weighted rate gap; only then is
    ``b`` switched to its indicator update.  Starting the indicator rule cold
    from a poor beamformer can switch every user off at once, after which
    ``W = 0`` is a fixed point.

    Returns ``(W, aux, trace)`` where ``trace`` holds the ascended objective
    (:func:`secrecy_surrogate`, nats) after initialization and after each
    sweep.  Each phase stops once the change falls below
    ``tol * max(1, |objective|)``; ``max_iters`` bounds the total sweep count.
    """
    s = as_mask(s, cfg.M)
    if g is None:
        g = g_bound(cfg, ch)
    W = mrt_directions(cfg, ch, s) if W0 is None else np.asarray(W0, dtype=complex)
    relaxed = bool(np.any((s < 0) | (s > 1)))
    aux = tight_aux(cfg, ch, W, s, g, b=cfg.weights, relaxed=relaxed)
    trace = [secrecy_surrogate(cfg, ch, W, s, aux, g)]
    warm = min(warmup_iters, max_iters)
    for it in range(max_iters):
        sol = update_W(cfg, ch, s, aux, g, bisect_tol)
        W = sol.W
        if sol.degenerate:
            aux = tight_aux(cfg, ch, W, s, g, b=np.zeros(cfg.K), relaxed=relaxed)
            trace.append(0.0)
            break
        if warm:
            b = cfg.weights.copy()
        else:
            g1, f2 = surrogate_terms(cfg, ch, W, s, aux, g)
            b = update_b(g1, f2 - np.log1p(g), cfg.weights)
        aux = AuxState(
            b,
            update_alpha(cfg, ch, W, s),
            update_beta(cfg, ch, W, s, g, relaxed=relaxed),
            update_eta(cfg, ch, W, s),
        )
        trace.append(secrecy_surrogate(cfg, ch, W, s, aux, g))
        settled = abs(trace[-1] - trace[-2]) <= tol * max(1.0, abs(trace[-1]))
        if warm:
            warm = 0 if settled else warm - 1
        elif settled:
            break
    return W, aux, trace
