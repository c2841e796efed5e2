"""
Low-complexity sequential optimization: design the beamformer with every
antenna active, then pick ``N`` antennas greedily for that beamformer.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .beamforming import fp_iterate
from .model import SecrecyReport, SelectionState, effective_gains, wssr

__all__ = ["fp_beamforming", "greedy_select", "so_solve", "SOResult", "greedy_evaluations"]


def fp_beamforming(cfg, ch, inner_tol=1e-7, max_iters=500, s=None, W0=None, return_trace=False):
    """FP beamformer for a fixed selection (all antennas when ``s`` is None).

    Alternates the closed-form beamformer and auxiliary updates until the
    surrogate objective changes by less than ``inner_tol`` (relative).  The
    result satisfies the power budget.
    """
    if s is None:
        s = np.ones(cfg.M)
    W, _, trace = fp_iterate(cfg, ch, s, W0=W0, tol=inner_tol, max_iters=max_iters)
    if return_trace:
        return W, trace
    return W


def _wssr_batch(cfg, ch, W, masks):
    """WSSR of ``W`` under each row of ``masks`` (shape ``(B, M)``)."""
    masked = masks[:, :, None] * W[None, :, :]  # (B, M, K)
    HW = np.einsum("mk,bmi->bki", ch.H.conj(), masked)
    GW = np.einsum("mj,bmk->bjk", ch.G.conj(), masked)
    P = np.abs(HW) ** 2
    signal = np.einsum("bkk->bk", P)
    gamma = signal / (cfg.noise_ut + P.sum(axis=2) - signal)
    gamma_bar = (np.abs(GW) ** 2 / cfg.noise_eve[None, :, None]).sum(axis=1)
    rates = np.maximum(np.log2(1.0 + gamma) - np.log2(1.0 + gamma_bar), 0.0)
    return rates @ cfg.weights


def greedy_select(cfg, ch, W) -> SelectionState:
    """Constructive greedy antenna selection for a fixed beamformer.

    Starting from no active antennas, each of ``N`` rounds activates the
    inactive antenna giving the largest exact WSSR; ties go to the lowest
    index.  An antenna is activated every round even when every candidate
    lowers the WSSR, so exactly ``N`` antennas are returned.
    """
    effective_gains(cfg, ch, W, np.ones(cfg.M))  # shape checks
    W = np.asarray(W, dtype=complex).reshape(cfg.M, cfg.K)
    s = np.zeros(cfg.M)
    for _ in range(cfg.N):
        candidates = np.flatnonzero(s == 0)
        masks = np.repeat(s[None, :], candidates.size, axis=0)
        masks[np.arange(candidates.size), candidates] = 1.0
        values = _wssr_batch(cfg, ch, W, masks)
        s[candidates[int(np.argmax(values))]] = 1.0
    return SelectionState(s, "binary")


def greedy_evaluations(M, N):
    """Number of WSSR evaluations performed by :func:`greedy_select`."""
    return sum(M - t + 1 for t in range(1, N + 1))


class SOResult(NamedTuple):
    W: np.ndarray
    selection: SelectionState
    report: SecrecyReport


def so_solve(cfg, ch, tol=1e-7, max_iters=500, refine=False) -> SOResult:
    """Sequential design: full-array FP beamforming, then greedy selection.

    With ``refine=True`` the beamformer is re-optimized on the selected
    antennas (starting from the masked full-array design) and the better of
    the two beamformers by exact WSSR is kept.
    """
    W = fp_beamforming(cfg, ch, inner_tol=tol, max_iters=max_iters)
    selection = greedy_select(cfg, ch, W)
    s = selection.s
    W_sel = s[:, None] * W
    best = (W_sel, wssr(cfg, ch, W_sel, s))
    if refine:
        W_ref = s[:, None] * fp_beamforming(cfg, ch, inner_tol=tol, max_iters=max_iters, s=s, W0=W_sel)
        report = wssr(cfg, ch, W_ref, s)
        if report.wssr > best[1].wssr:
            best = (W_ref, report)
    return SOResult(best[0], selection, best[1])
