"""
Fractional-programming reformulation of the WSSR objective.

The clamped secrecy rate is replaced by activity weights ``b`` (bang-bang in
``{0, w_k}``), the eavesdropper term is rewritten with the bound ``g`` so that
both logarithms are log-of-ratio terms, the Lagrangian dual transform
introduces ``alpha`` and ``beta``, and the quadratic transform introduces
``eta``.  Every auxiliary variable has a closed-form maximizer, collected
here.

All surrogate quantities use natural logarithms; divide by ``ln 2`` to
compare with rates in bits.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvariantError
from .model import effective_gains, g_bound

__all__ = [
    "AuxState",
    "update_b",
    "update_alpha",
    "update_beta",
    "update_eta",
    "surrogate_f1",
    "surrogate_f2",
    "surrogate_g1",
    "surrogate_terms",
    "surrogate_objective",
    "secrecy_surrogate",
    "tight_aux",
]

BOUND_SLACK = 1e-8


@dataclass(frozen=True)
class AuxState:
    """Auxiliary variables of the transformed problem, all length ``K``."""

    b: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    eta: np.ndarray

    def replace(self, **changes):
        return replace(self, **changes)


def update_b(g1, f2, weights):
    """Bang-bang activity weights: ``w_k`` where ``g1_k + f2_k > 0``, else 0.

    The inequality is strict, so a user whose contribution is exactly zero is
    switched off.
    """
    g1 = np.asarray(g1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    return np.where(g1 + f2 > 0, np.asarray(weights, dtype=float), 0.0)


def update_alpha(cfg, ch, W, s):
    """Optimal ``alpha_k``: the SINR of user ``k``."""
    HW, _ = effective_gains(cfg, ch, W, s)
    P = np.abs(HW) ** 2
    signal = np.diag(P).copy()
    return signal / (cfg.noise_ut + P.sum(axis=1) - signal)


def update_beta(cfg, ch, W, s, g=None, relaxed=False):
    """Optimal ``beta_k = (g - eve_snr_k) / (1 + eve_snr_k)``.

    For a feasible selection the eavesdropper SNR never exceeds ``g``;
    round-off below zero is clamped and anything worse raises
    :class:`InvariantError`.  With ``relaxed=True`` (selection entries outside
    ``[0, 1]`` are allowed) the unclamped value is returned; it stays above
    ``-1`` and is still the exact maximizer of ``f2`` over ``beta``.
    """
    if g is None:
        g = g_bound(cfg, ch)
    _, GW = effective_gains(cfg, ch, W, s)
    gbar = (np.abs(GW) ** 2 / cfg.noise_eve[:, None]).sum(axis=0)
    beta = (g - gbar) / (1.0 + gbar)
    if relaxed:
        return beta
    if np.any(gbar > g + BOUND_SLACK * max(1.0, g)):
        raise InvariantError(
            f"eavesdropper SNR {gbar.max():.6g} exceeds the bound g={g:.6g}; "
            "the selection is not feasible"
        )
    return np.maximum(beta, 0.0)


def update_eta(cfg, ch, W, s):
    """Optimal quadratic-transform multipliers (complex, length ``K``)."""
    HW, _ = effective_gains(cfg, ch, W, s)
    total = (np.abs(HW) ** 2).sum(axis=1) + cfg.noise_ut
    return np.diag(HW) / total


def _per_user(cfg, ch, W, s):
    HW, GW = effective_gains(cfg, ch, W, s)
    total = (np.abs(HW) ** 2).sum(axis=1) + cfg.noise_ut
    gbar = (np.abs(GW) ** 2 / cfg.noise_eve[:, None]).sum(axis=0)
    return np.diag(HW).copy(), total, gbar


def _f1(alpha, direct, total):
    return np.log1p(alpha) - alpha + (1.0 + alpha) * np.abs(direct) ** 2 / total


def _f2(beta, gbar, g):
    return np.log1p(beta) - beta + (1.0 + beta) * (g - gbar) / (1.0 + g)


def _g1(alpha, eta, direct, total):
    quad = 2.0 * np.real(np.conj(eta) * direct) - np.abs(eta) ** 2 * total
    return np.log1p(alpha) - alpha + (1.0 + alpha) * quad


def surrogate_f1(k, alpha_k, cfg, ch, W, s):
    """Lagrangian-dual surrogate of ``ln(1 + SINR_k)``; tight at ``alpha_k = SINR_k``."""
    direct, total, _ = _per_user(cfg, ch, W, s)
    return float(_f1(alpha_k, direct[k], total[k]))


def surrogate_f2(k, beta_k, cfg, ch, W, s, g):
    """Surrogate of ``ln((1 + g) / (1 + eve_snr_k))``; tight at the optimal ``beta_k``."""
    _, _, gbar = _per_user(cfg, ch, W, s)
    return float(_f2(beta_k, gbar[k], g))


def surrogate_g1(k, alpha_k, eta_k, cfg, ch, W, s):
    """Quadratic-transform version of :func:`surrogate_f1` (concave in ``eta_k``)."""
    direct, total, _ = _per_user(cfg, ch, W, s)
    return float(_g1(alpha_k, eta_k, direct[k], total[k]))


def surrogate_terms(cfg, ch, W, s, aux: AuxState, g):
    """Vectors ``(g1, f2)`` of the per-user surrogate terms."""
    direct, total, gbar = _per_user(cfg, ch, W, s)
    return _g1(aux.alpha, aux.eta, direct, total), _f2(aux.beta, gbar, g)


def surrogate_objective(cfg, ch, W, s, aux: AuxState, g):
    """``sum_k b_k (g1_k + f2_k)`` in nats."""
    g1, f2 = surrogate_terms(cfg, ch, W, s, aux, g)
    return float(aux.b @ (g1 + f2))


def secrecy_surrogate(cfg, ch, W, s, aux: AuxState, g):
    """Surrogate with the ``ln(1 + g)`` offset of each active user removed.

    At tight auxiliaries this equals ``ln 2`` times the weighted sum of
    unclamped secrecy rates over active users; with the optimal ``b`` it is
    ``ln 2`` times the WSSR.  This is the objective the solvers ascend, since
    the offset depends on ``b`` and would otherwise keep every user active.
    """
    g1, f2 = surrogate_terms(cfg, ch, W, s, aux, g)
    return float(aux.b @ (g1 + f2 - np.log1p(g)))


def tight_aux(cfg, ch, W, s, g, b=None, relaxed=False) -> AuxState:
    """Closed-form ``alpha``, ``beta``, ``eta`` at ``(W, s)``, then optimal ``b``.

    Pass ``b`` to keep given activity weights instead of re-optimizing them.
    """
    alpha = update_alpha(cfg, ch, W, s)
    beta = update_beta(cfg, ch, W, s, g, relaxed=relaxed)
    eta = update_eta(cfg, ch, W, s)
    aux = AuxState(np.zeros(cfg.K), alpha, beta, eta)
    if b is None:
        g1, f2 = surrogate_terms(cfg, ch, W, s, aux, g)
        b = update_b(g1, f2 - np.log1p(g), cfg.weights)
    return aux.replace(b=np.asarray(b, dtype=float))
